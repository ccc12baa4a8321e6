use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::power::{solve_power_from_gains, total_power_gradient, LinkGains};
use crate::qsdp::{solve_qsdp, QsdpOptions, QsdpProblem, QsdpStatus, WarmStart};
use crate::system::{NoiseParams, PowerPair, RateRequirements, StarProfile};

use super::{build_subproblem, extract_rank_one, residual_sum, SurfaceLayout};

#[derive(Clone, Debug, PartialEq)]
pub struct ScaOptions {
    /// Stop once the summed rank-one residual drops below this.
    pub eps1: f64,
    pub max_k: usize,
    /// Quadratic weight of the surrogate.
    pub rho: f64,
    pub layout: SurfaceLayout,
    pub qsdp: QsdpOptions<f64>,
    /// Proximal weight of the linearized-power steps that precede the SCA loop.
    pub relax_prox: f64,
    pub relax_iters: usize,
    /// Relative power decrease below which the linearized-power steps stop.
    pub relax_tol: f64,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            eps1: 1e-6,
            max_k: 50,
            rho: 1e-3,
            layout: SurfaceLayout::Star,
            qsdp: QsdpOptions::default(),
            relax_prox: 1e-2,
            relax_iters: 20,
            relax_tol: 1e-6,
        }
    }
}

impl ScaOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0) || self.max_k == 0 || !(self.rho >= 0.0) || !(self.relax_prox > 0.0) || !(self.relax_tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "SCA options need eps1 > 0, K >= 1, rho >= 0 and a positive proximal weight".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScaState {
    pub q_t_mat: HermitianMatrix<f64>,
    pub q_r_mat: HermitianMatrix<f64>,
    /// Summed residual of the starting point followed by one entry per iteration.
    pub residual_history: Vec<f64>,
    pub k: usize,
    pub converged: bool,
    /// ADMM iterations spent across all subproblems.
    pub qsdp_iterations: usize,
}

impl ScaState {
    pub fn new(q_t_mat: HermitianMatrix<f64>, q_r_mat: HermitianMatrix<f64>) -> Result<Self> {
        let r = residual_sum(&q_t_mat, &q_r_mat)?;
        Ok(Self {
            q_t_mat,
            q_r_mat,
            residual_history: vec![r],
            k: 0,
            converged: false,
            qsdp_iterations: 0,
        })
    }

    pub fn from_profile(prof: &StarProfile<f64>) -> Result<Self> {
        let (t, r) = prof.outer_products();
        Self::new(t, r)
    }

    pub fn residual(&self) -> f64 {
        *self.residual_history.last().expect("history starts non-empty")
    }
}

/// Runs the SCA loop from a rank-one start.
pub fn sca_solve(
    p: &PowerPair<f64>,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    init: &StarProfile<f64>,
    opts: &ScaOptions,
) -> Result<(StarProfile<f64>, ScaState)> {
    sca_solve_from(p, ch, req, noise, ScaState::from_profile(init)?, opts, None)
}

/// Runs the SCA loop from arbitrary PSD iterates, optionally seeding the first
/// ADMM solve. Later subproblems are warm-started from the previous one.
pub fn sca_solve_from(
    p: &PowerPair<f64>,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    mut state: ScaState,
    opts: &ScaOptions,
    mut warm: Option<WarmStart<f64>>,
) -> Result<(StarProfile<f64>, ScaState)> {
    opts.validate()?;
    let mut best = (state.residual(), state.q_t_mat.clone(), state.q_r_mat.clone());
    while state.residual() >= opts.eps1 && state.k < opts.max_k {
        let prob = build_subproblem(p, ch, req, noise, &state, opts.rho, opts.layout)?;
        let sol = solve_subproblem(&prob, opts, warm.take(), state.k + 1)?;
        state.k += 1;
        state.qsdp_iterations += sol.iterations;
        state.q_t_mat = sol.q_t_mat;
        state.q_r_mat = sol.q_r_mat;
        let r = residual_sum(&state.q_t_mat, &state.q_r_mat)?;
        state.residual_history.push(r);
        if r < best.0 {
            best = (r, state.q_t_mat.clone(), state.q_r_mat.clone());
        }
        warm = Some(sol.warm_start);
    }
    state.converged = state.residual() < opts.eps1;
    if !state.converged {
        state.q_t_mat = best.1;
        state.q_r_mat = best.2;
    }
    let prof = opts
        .layout
        .project(extract_rank_one(&state.q_t_mat)?, extract_rank_one(&state.q_r_mat)?)?;
    Ok((prof, state))
}

fn solve_subproblem(
    prob: &QsdpProblem<f64>,
    opts: &ScaOptions,
    warm: Option<WarmStart<f64>>,
    iteration: usize,
) -> Result<crate::qsdp::QsdpSolution<f64>> {
    let qopts = QsdpOptions {
        warm_start: warm,
        ..opts.qsdp.clone()
    };
    let sol = solve_qsdp(prob, &qopts)?;
    if sol.status == QsdpStatus::Infeasible {
        return Err(Error::Subproblem {
            iteration,
            status: sol.status.to_string(),
        });
    }
    Ok(sol)
}

/// Gains `(Tr(Q_r H1), Tr(Q_t H2), Tr(Q_t H3))` of lifted iterates.
fn lifted_gains(ch: &ChannelSet<f64>, q_t: &HermitianMatrix<f64>, q_r: &HermitianMatrix<f64>) -> LinkGains<f64> {
    LinkGains {
        g1: ch.big_h1.inner(q_r).max(0.0),
        g2: ch.big_h2.inner(q_t).max(0.0),
        g3: ch.big_h3.inner(q_t).max(0.0),
        si: ch.si_gain(),
    }
}

/// Linearized-power step: starting from `prof`'s outer products, repeatedly
/// minimizes the first-order model of the closed-form total power in the gains
/// `(G1, G2, G3)` plus a proximal term over the diagonal rules and PSD cone.
/// No rate rows are imposed; the closed form prices the rates. A model step
/// that raises the power, or leaves the region where the closed form exists,
/// is retried with a tenfold proximal weight. Stops once the power's relative
/// decrease falls below `relax_tol` or after `relax_iters` steps.
///
/// Returns the relaxed iterates and the closed-form powers at their gains, at
/// which both rate constraints hold with equality.
pub fn relaxation_step(
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    prof: &StarProfile<f64>,
    opts: &ScaOptions,
) -> Result<(ScaState, PowerPair<f64>)> {
    opts.validate()?;
    let m = ch.num_elements();
    opts.layout.validate(m)?;
    let (mut q_t, mut q_r) = prof.outer_products();
    let diagonal = opts.layout.diagonal_rule(m);
    let mut p = solve_power_from_gains(&lifted_gains(ch, &q_t, &q_r), req, noise)?;
    let mut warm: Option<WarmStart<f64>> = None;
    let mut spent = 0;
    let mut kappa = opts.relax_prox;
    'outer: for _ in 0..opts.relax_iters {
        let w = total_power_gradient(&lifted_gains(ch, &q_t, &q_r), req, noise)?;
        let c_r = ch.big_h1.scaled(w[0]);
        let c_t = HermitianMatrix::lin_comb(w[1], &ch.big_h2, w[2], &ch.big_h3);
        let scale = c_t.frobenius_norm().max(c_r.frobenius_norm());
        if !(scale > 0.0) {
            break;
        }
        for _ in 0..=PROX_BACKTRACKS {
            let cost_t = HermitianMatrix::lin_comb(1.0 / scale, &c_t, -kappa, &q_t);
            let cost_r = HermitianMatrix::lin_comb(1.0 / scale, &c_r, -kappa, &q_r);
            let mut prob = QsdpProblem::new(cost_t, cost_r, kappa);
            prob.diagonal = diagonal.clone();
            let start = warm
                .clone()
                .unwrap_or_else(|| WarmStart::from_primal(q_t.clone(), q_r.clone(), opts.qsdp.penalty));
            let sol = solve_subproblem(&prob, opts, Some(start), 0)?;
            spent += sol.iterations;
            match solve_power_from_gains(&lifted_gains(ch, &sol.q_t_mat, &sol.q_r_mat), req, noise) {
                Ok(next) if next.total() <= p.total() => {
                    let decrease = (p.total() - next.total()) / p.total();
                    q_t = sol.q_t_mat;
                    q_r = sol.q_r_mat;
                    p = next;
                    warm = Some(sol.warm_start);
                    if decrease < opts.relax_tol {
                        break 'outer;
                    }
                    continue 'outer;
                }
                _ => kappa *= 10.0,
            }
        }
        break;
    }
    let mut state = ScaState::new(q_t, q_r)?;
    state.qsdp_iterations = spent;
    Ok((state, p))
}

/// Times a rejected linearized step is retried with a tenfold proximal weight.
pub const PROX_BACKTRACKS: usize = 4;
