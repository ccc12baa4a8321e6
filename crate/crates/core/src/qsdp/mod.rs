//! Convex quadratic SDP over a transmit/reflect pair of Hermitian PSD matrices.
//!
//! ```text
//! minimize    Tr(C_t Q_t) + Tr(C_r Q_r) + (rho/2)(||Q_t||_F^2 + ||Q_r||_F^2)
//! subject to  Tr(A_i Q_l) >= b_i,   Tr(A_j Q_l) = b_j,
//!             diagonal rules on [Q_t]_mm, [Q_r]_mm,
//!             Q_t, Q_r PSD
//! ```
//!
//! Solved by ADMM: one block carries the affine constraints (closed form via a
//! cached Cholesky factor), the other is the PSD cone plus nonnegative slacks.

mod admm;
mod dump;
mod kkt;
mod rows;
#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::Real;

pub use admm::solve_qsdp;
pub use dump::{dump_json, load_json, QsdpDump};
pub use kkt::{check_kkt, check_kkt_at};

/// Which matrix variable a trace constraint acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variable {
    Transmit,
    Reflect,
}

/// `Tr(matrix * Q_target) (>= or =) bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceConstraint<T: Real> {
    pub target: Variable,
    pub matrix: HermitianMatrix<T>,
    pub bound: T,
}

/// Per-element diagonal constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementRule {
    /// `[Q_t]_mm + [Q_r]_mm = 1`.
    Coupled,
    /// `[Q_t]_mm = 1`; row and column `m` of `Q_r` vanish.
    TransmitOnly,
    /// `[Q_r]_mm = 1`; row and column `m` of `Q_t` vanish.
    ReflectOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagonalRule {
    Free,
    Coupled,
    PerElement(Vec<ElementRule>),
}

impl DiagonalRule {
    pub(crate) fn rule(&self, m: usize) -> Option<ElementRule> {
        match self {
            DiagonalRule::Free => None,
            DiagonalRule::Coupled => Some(ElementRule::Coupled),
            DiagonalRule::PerElement(v) => Some(v[m]),
        }
    }

    /// Indices a variable may occupy; `None` when unrestricted.
    ///
    /// A PSD matrix with a zero diagonal entry has that whole row and column
    /// zero, so single-sided elements confine the other variable to a face of
    /// the cone. The solver works on that face directly.
    pub(crate) fn support(&self, var: Variable) -> Option<Vec<usize>> {
        let DiagonalRule::PerElement(v) = self else {
            return None;
        };
        let excluded = match var {
            Variable::Transmit => ElementRule::ReflectOnly,
            Variable::Reflect => ElementRule::TransmitOnly,
        };
        Some((0..v.len()).filter(|&m| v[m] != excluded).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QsdpProblem<T: Real> {
    pub dim: usize,
    pub linear_cost_t: HermitianMatrix<T>,
    pub linear_cost_r: HermitianMatrix<T>,
    pub quad_weight: T,
    pub ineq_constraints: Vec<TraceConstraint<T>>,
    pub eq_constraints: Vec<TraceConstraint<T>>,
    pub diagonal: DiagonalRule,
}

impl<T: Real> QsdpProblem<T> {
    /// Problem with the given costs and no constraints.
    pub fn new(linear_cost_t: HermitianMatrix<T>, linear_cost_r: HermitianMatrix<T>, quad_weight: T) -> Self {
        Self {
            dim: linear_cost_t.dim(),
            linear_cost_t,
            linear_cost_r,
            quad_weight,
            ineq_constraints: Vec::new(),
            eq_constraints: Vec::new(),
            diagonal: DiagonalRule::Free,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let check = |m: &HermitianMatrix<T>| {
            if m.dim() == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.dim(),
                })
            }
        };
        check(&self.linear_cost_t)?;
        check(&self.linear_cost_r)?;
        for c in self.ineq_constraints.iter().chain(&self.eq_constraints) {
            check(&c.matrix)?;
            if !c.bound.is_finite() {
                return Err(Error::InvalidParameter("constraint bound must be finite".into()));
            }
        }
        if !(self.quad_weight >= T::zero() && self.quad_weight.is_finite()) {
            return Err(Error::InvalidParameter("quadratic weight must be finite and nonnegative".into()));
        }
        if let DiagonalRule::PerElement(v) = &self.diagonal {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Objective value at `(q_t, q_r)`.
    pub fn objective(&self, q_t: &HermitianMatrix<T>, q_r: &HermitianMatrix<T>) -> T {
        let half = T::lit(0.5) * self.quad_weight;
        self.linear_cost_t.inner(q_t)
            + self.linear_cost_r.inner(q_r)
            + half * (q_t.frobenius_norm_sqr() + q_r.frobenius_norm_sqr())
    }
}

/// ADMM state that can seed a later solve of a problem with the same constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct WarmStart<T: Real> {
    pub z_t: HermitianMatrix<T>,
    pub z_r: HermitianMatrix<T>,
    pub u_t: HermitianMatrix<T>,
    pub u_r: HermitianMatrix<T>,
    pub slack: Vec<T>,
    pub slack_dual: Vec<T>,
    pub penalty: T,
}

impl<T: Real> WarmStart<T> {
    /// Primal-only start with zero duals.
    pub fn from_primal(z_t: HermitianMatrix<T>, z_r: HermitianMatrix<T>, penalty: T) -> Self {
        let n = z_t.dim();
        Self {
            z_t,
            z_r,
            u_t: HermitianMatrix::zeros(n),
            u_r: HermitianMatrix::zeros(n),
            slack: Vec::new(),
            slack_dual: Vec::new(),
            penalty,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QsdpOptions<T: Real> {
    pub tolerance: T,
    pub max_iterations: usize,
    /// Initial ADMM penalty; adapted by residual balancing.
    pub penalty: T,
    pub warm_start: Option<WarmStart<T>>,
}

impl<T: Real> Default for QsdpOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(1e-6),
            max_iterations: 20_000,
            penalty: T::one(),
            warm_start: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QsdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

impl std::fmt::Display for QsdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            QsdpStatus::Optimal => "optimal",
            QsdpStatus::MaxIterations => "max-iterations",
            QsdpStatus::Infeasible => "infeasible",
        })
    }
}

/// One merit value; the merit is non-increasing while `epoch` (penalty changes) stays fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeritPoint<T: Real> {
    pub epoch: usize,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct QsdpSolution<T: Real> {
    pub q_t_mat: HermitianMatrix<T>,
    pub q_r_mat: HermitianMatrix<T>,
    pub status: QsdpStatus,
    pub kkt_residual: T,
    pub objective: T,
    pub iterations: usize,
    /// Constraint multipliers in row order: inequalities, equalities, then one
    /// diagonal row per element when a diagonal rule is set.
    pub multipliers: Vec<T>,
    pub merit_history: Vec<MeritPoint<T>>,
    pub warm_start: WarmStart<T>,
}
