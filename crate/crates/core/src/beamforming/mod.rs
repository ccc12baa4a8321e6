//! Passive beamforming: the SCA loop over the rank-one residual, its QSDP
//! subproblems, rank-one extraction and the orthogonal-interference start.

mod oitm;
mod sca;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, max_eigpair, HermitianMatrix, PSD_TOL};
use crate::qsdp::{DiagonalRule, ElementRule, QsdpProblem, TraceConstraint, Variable};
use crate::scalar::Cx;
use crate::system::{NoiseParams, PowerPair, RateRequirements, StarProfile};

pub use oitm::{oitm_candidate, oitm_init, oitm_init_for, orthogonal_projector, OITM_MAX_ATTEMPTS};
pub use sca::{relaxation_step, sca_solve, sca_solve_from, ScaOptions, ScaState, PROX_BACKTRACKS};

/// Which coefficient set the surface can realise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SurfaceLayout {
    /// Every element transmits and reflects with `|q_t|^2 + |q_r|^2 = 1`.
    #[default]
    Star,
    /// Conventional pair of surfaces: the first half of the elements only
    /// transmits, the second half only reflects, all with unit amplitude.
    Conventional,
}

impl SurfaceLayout {
    pub fn validate(&self, m: usize) -> Result<()> {
        if *self == SurfaceLayout::Conventional && m % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "conventional layout needs an even element count, got {m}"
            )));
        }
        Ok(())
    }

    pub fn diagonal_rule(&self, m: usize) -> DiagonalRule {
        match self {
            SurfaceLayout::Star => DiagonalRule::Coupled,
            SurfaceLayout::Conventional => DiagonalRule::PerElement(
                (0..m)
                    .map(|i| {
                        if i < m / 2 {
                            ElementRule::TransmitOnly
                        } else {
                            ElementRule::ReflectOnly
                        }
                    })
                    .collect(),
            ),
        }
    }

    /// Maps arbitrary coefficient vectors onto the realisable set.
    ///
    /// `Star` rescales each element pair to unit energy; `Conventional` keeps
    /// only the phases on the active side of each element.
    pub fn project(&self, q_t: Vec<Cx<f64>>, q_r: Vec<Cx<f64>>) -> Result<StarProfile<f64>> {
        match self {
            SurfaceLayout::Star => StarProfile::normalized(q_t, q_r),
            SurfaceLayout::Conventional => {
                let m = q_t.len();
                self.validate(m)?;
                let zero = Cx::new(0.0, 0.0);
                let t = (0..m).map(|i| if i < m / 2 { unit(q_t[i]) } else { zero }).collect();
                let r = (0..m).map(|i| if i < m / 2 { zero } else { unit(q_r[i]) }).collect();
                StarProfile::new(t, r)
            }
        }
    }
}

/// Phase of `z` as a unit-modulus number (1 for `z = 0`).
pub(crate) fn unit(z: Cx<f64>) -> Cx<f64> {
    let n = z.norm();
    if n > 0.0 {
        z / n
    } else {
        Cx::new(1.0, 0.0)
    }
}

/// Subgradient of `lambda_max(Q) + (rho/2)||Q||_F^2` at `q_prev`: `u u^H + rho q_prev`.
///
/// With a repeated top eigenvalue the first eigenvector the solver reports is used.
pub fn sca_subgradient(q_prev: &HermitianMatrix<f64>, rho: f64) -> Result<HermitianMatrix<f64>> {
    let eig = hermitian_eig(q_prev);
    let min = *eig.eigenvalues().last().expect("dimension at least one");
    if min < -PSD_TOL * q_prev.frobenius_norm().max(1.0) {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let mut g = q_prev.scaled(rho);
    g.add_outer(1.0, eig.vector(0));
    Ok(g)
}

/// The two rate constraints as trace inequalities at fixed powers, each scaled
/// to a unit-Frobenius-norm matrix:
///
/// ```text
/// UL:  Tr(Q_r H1) >= R_u (p_d |h_bb|^2 + s_u) / p_u
/// DL:  Tr(Q_t (p_d H2 - R_d p_u H3)) >= R_d s_d
/// ```
///
/// A zero threshold drops its constraint.
pub fn rate_constraints(
    p: &PowerPair<f64>,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
) -> Result<Vec<TraceConstraint<f64>>> {
    let (ru, rd) = req.sinr_targets();
    let mut out = Vec::new();
    if ru > 0.0 {
        if !(p.p_u > 0.0) {
            return Err(Error::InvalidParameter("uplink power must be positive".into()));
        }
        let norm = ch.big_h1.frobenius_norm();
        if !(norm > 0.0) {
            return Err(Error::InfeasibleLink("uplink"));
        }
        out.push(TraceConstraint {
            target: Variable::Reflect,
            matrix: ch.big_h1.scaled(1.0 / norm),
            bound: ru * (p.p_d * ch.si_gain() + noise.sigma_u_sq) / (p.p_u * norm),
        });
    }
    if rd > 0.0 {
        if !(p.p_d > 0.0) {
            return Err(Error::InvalidParameter("downlink power must be positive".into()));
        }
        let a = HermitianMatrix::lin_comb(p.p_d, &ch.big_h2, -rd * p.p_u, &ch.big_h3);
        let norm = a.frobenius_norm();
        if !(norm > 0.0) {
            return Err(Error::InfeasibleLink("downlink"));
        }
        out.push(TraceConstraint {
            target: Variable::Transmit,
            matrix: a.scaled(1.0 / norm),
            bound: rd * noise.sigma_d_sq / norm,
        });
    }
    Ok(out)
}

/// SCA subproblem at `(Q_t, Q_r)` of `state`: linear costs `I - (u u^H + rho Q_l)`,
/// quadratic weight `rho`, the two rate constraints and the layout's diagonal rules.
pub fn build_subproblem(
    p: &PowerPair<f64>,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    state: &ScaState,
    rho: f64,
    layout: SurfaceLayout,
) -> Result<QsdpProblem<f64>> {
    let m = ch.num_elements();
    layout.validate(m)?;
    let id = HermitianMatrix::identity(m);
    let c_t = &id - &sca_subgradient(&state.q_t_mat, rho)?;
    let c_r = &id - &sca_subgradient(&state.q_r_mat, rho)?;
    let mut prob = QsdpProblem::new(c_t, c_r, rho);
    prob.ineq_constraints = rate_constraints(p, ch, req, noise)?;
    prob.diagonal = layout.diagonal_rule(m);
    Ok(prob)
}

/// `f(Q) = Tr(Q) - lambda_max(Q)` summed over both matrices.
pub fn residual_sum(q_t: &HermitianMatrix<f64>, q_r: &HermitianMatrix<f64>) -> Result<f64> {
    Ok(crate::numerics::rank_one_residual(q_t)? + crate::numerics::rank_one_residual(q_r)?)
}

/// `sqrt(lambda_max) u` for the top eigenpair of `q_mat`.
pub fn extract_rank_one(q_mat: &HermitianMatrix<f64>) -> Result<Vec<Cx<f64>>> {
    let residual = crate::numerics::rank_one_residual(q_mat)?;
    if residual >= 1.0 {
        return Err(Error::NotRankOneExtractable { residual });
    }
    let (lambda, u) = max_eigpair(q_mat);
    let s = lambda.max(0.0).sqrt();
    Ok(u.into_iter().map(|z| z * s).collect())
}
