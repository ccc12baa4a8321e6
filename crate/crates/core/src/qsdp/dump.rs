//! JSON debug dump of a problem instance.
//!
//! Matrices are stored row-major as `[re, im]` pairs:
//!
//! ```json
//! { "dim": 2, "quad_weight": 0.001,
//!   "linear_cost_t": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
//!   "linear_cost_r": [...],
//!   "ineq_constraints": [{ "target": "transmit", "matrix": [...], "bound": 1e-3 }],
//!   "eq_constraints": [],
//!   "diagonal": "coupled" }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::{Cx, Real};

use super::{DiagonalRule, QsdpProblem, TraceConstraint, Variable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDump {
    pub target: Variable,
    pub matrix: Vec<[f64; 2]>,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QsdpDump {
    pub dim: usize,
    pub quad_weight: f64,
    pub linear_cost_t: Vec<[f64; 2]>,
    pub linear_cost_r: Vec<[f64; 2]>,
    pub ineq_constraints: Vec<ConstraintDump>,
    pub eq_constraints: Vec<ConstraintDump>,
    pub diagonal: DiagonalRule,
}

fn pairs<T: Real>(m: &HermitianMatrix<T>) -> Vec<[f64; 2]> {
    m.as_slice().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect()
}

fn matrix<T: Real>(dim: usize, p: &[[f64; 2]]) -> Result<HermitianMatrix<T>> {
    HermitianMatrix::new(dim, p.iter().map(|[re, im]| Cx::new(T::lit(*re), T::lit(*im))).collect())
}

impl QsdpDump {
    pub fn from_problem<T: Real>(prob: &QsdpProblem<T>) -> Self {
        let cons = |v: &[TraceConstraint<T>]| {
            v.iter()
                .map(|c| ConstraintDump {
                    target: c.target,
                    matrix: pairs(&c.matrix),
                    bound: c.bound.as_f64(),
                })
                .collect()
        };
        Self {
            dim: prob.dim,
            quad_weight: prob.quad_weight.as_f64(),
            linear_cost_t: pairs(&prob.linear_cost_t),
            linear_cost_r: pairs(&prob.linear_cost_r),
            ineq_constraints: cons(&prob.ineq_constraints),
            eq_constraints: cons(&prob.eq_constraints),
            diagonal: prob.diagonal.clone(),
        }
    }

    pub fn to_problem<T: Real>(&self) -> Result<QsdpProblem<T>> {
        let cons = |v: &[ConstraintDump]| -> Result<Vec<TraceConstraint<T>>> {
            v.iter()
                .map(|c| {
                    Ok(TraceConstraint {
                        target: c.target,
                        matrix: matrix(self.dim, &c.matrix)?,
                        bound: T::lit(c.bound),
                    })
                })
                .collect()
        };
        let prob = QsdpProblem {
            dim: self.dim,
            linear_cost_t: matrix(self.dim, &self.linear_cost_t)?,
            linear_cost_r: matrix(self.dim, &self.linear_cost_r)?,
            quad_weight: T::lit(self.quad_weight),
            ineq_constraints: cons(&self.ineq_constraints)?,
            eq_constraints: cons(&self.eq_constraints)?,
            diagonal: self.diagonal.clone(),
        };
        prob.validate()?;
        Ok(prob)
    }
}

pub fn dump_json<T: Real>(prob: &QsdpProblem<T>, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&QsdpDump::from_problem(prob))
        .map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_json<T: Real>(path: &Path) -> Result<QsdpProblem<T>> {
    let text = std::fs::read_to_string(path)?;
    let dump: QsdpDump = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    dump.to_problem()
}
