use crate::error::{Error, Result};
use crate::numerics::{psd_project, HermitianMatrix};

use super::Variable;
use crate::scalar::Real;

use super::kkt::{cost_scale, residual};
use super::rows::{build_rows, cholesky, cholesky_solve, Row};
use super::{MeritPoint, QsdpOptions, QsdpProblem, QsdpSolution, QsdpStatus, WarmStart};

const PENALTY_MIN: f64 = 1e-6;
const PENALTY_MAX: f64 = 1e8;
const BALANCE_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;
const MAX_PENALTY_CHANGES: usize = 60;
const PROBE_EVERY: usize = 100;
const PROBE_START: usize = 1000;
const CHECK_EVERY: usize = 200;

/// Linear system `K y = rhs` of the affine block, factored for one penalty value.
struct AffineSolver<T: Real> {
    l: Vec<T>,
    n: usize,
}

impl<T: Real> AffineSolver<T> {
    fn new(gram: &[T], ineq: &[bool], rho: T, sigma: T) -> Self {
        let n = ineq.len();
        let mut k: Vec<T> = gram.iter().map(|&g| g / (rho + sigma)).collect();
        for (i, &is_ineq) in ineq.iter().enumerate() {
            if is_ineq {
                k[i * n + i] += T::one() / sigma;
            }
        }
        let max_diag = (0..n).map(|i| k[i * n + i]).fold(T::zero(), T::max);
        let mut shift = T::zero();
        loop {
            let mut shifted = k.clone();
            for i in 0..n {
                shifted[i * n + i] += shift;
            }
            if let Some(l) = cholesky(&shifted, n) {
                return Self { l, n };
            }
            // dependent equality rows: regularize just enough to factor
            shift = if shift == T::zero() {
                T::lit(1e-12) * max_diag.max(T::min_positive_value())
            } else {
                shift * T::lit(10.0)
            };
        }
    }

    fn solve(&self, b: &mut [T]) {
        cholesky_solve(&self.l, self.n, b);
    }
}

/// Projection onto the PSD matrices supported on `support`.
fn project_face<T: Real>(x: &HermitianMatrix<T>, support: &Option<Vec<usize>>) -> HermitianMatrix<T> {
    match support {
        None => psd_project(x),
        Some(idx) if idx.is_empty() => HermitianMatrix::zeros(x.dim()),
        Some(idx) => psd_project(&x.restrict(idx)).embed(x.dim(), idx),
    }
}

struct Best<T: Real> {
    kkt: T,
    z_t: HermitianMatrix<T>,
    z_r: HermitianMatrix<T>,
    y: Vec<T>,
}

/// Solves the quadratic SDP by ADMM with residual balancing.
///
/// The merit recorded per iteration is `sigma * (||dZ||^2 + ||dU||^2)` over the
/// cone block and scaled duals (slacks included); it is non-increasing while the
/// penalty `sigma` is unchanged.
pub fn solve_qsdp<T: Real>(prob: &QsdpProblem<T>, opts: &QsdpOptions<T>) -> Result<QsdpSolution<T>> {
    prob.validate()?;
    if !(opts.tolerance > T::zero()) || !(opts.penalty > T::zero()) || opts.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "solver tolerance, penalty and iteration budget must be positive".into(),
        ));
    }
    let n_dim = prob.dim;
    let raw = build_rows(prob);
    let n_raw = raw.len();
    let zero = T::zero();
    let one = T::one();

    // Rows with an all-zero operand are either vacuous or contradictory.
    let mut active = Vec::new();
    let mut raw_active: Vec<Row<T>> = Vec::new();
    let mut rows: Vec<Row<T>> = Vec::new();
    let mut norms = Vec::new();
    let mut contradictory = false;
    for (i, row) in raw.iter().enumerate() {
        let norm = row.norm();
        if norm > zero {
            active.push(i);
            raw_active.push(row.clone());
            rows.push(row.scaled(one / norm));
            norms.push(norm);
        } else if (row.ineq && row.bound > zero) || (!row.ineq && row.bound != zero) {
            contradictory = true;
        }
    }
    let n = rows.len();
    let ineq: Vec<bool> = rows.iter().map(|r| r.ineq).collect();
    let mut gram = vec![zero; n * n];
    for i in 0..n {
        for j in 0..=i {
            let g = rows[i].inner(&rows[j]);
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
    }

    let support_t = prob.diagonal.support(Variable::Transmit);
    let support_r = prob.diagonal.support(Variable::Reflect);
    let rho = prob.quad_weight;
    let (c_t, c_r) = (&prob.linear_cost_t, &prob.linear_cost_r);
    let scale = cost_scale(prob);
    let tol = opts.tolerance;

    let (mut z_t, mut z_r, mut u_t, mut u_r, mut s, mut us, mut sigma);
    match &opts.warm_start {
        Some(ws) => {
            for m in [&ws.z_t, &ws.z_r, &ws.u_t, &ws.u_r] {
                if m.dim() != n_dim {
                    return Err(Error::DimensionMismatch {
                        expected: n_dim,
                        actual: m.dim(),
                    });
                }
            }
            if !(ws.penalty > zero) {
                return Err(Error::InvalidParameter("warm-start penalty must be positive".into()));
            }
            z_t = ws.z_t.clone();
            z_r = ws.z_r.clone();
            u_t = ws.u_t.clone();
            u_r = ws.u_r.clone();
            let pick = |v: &Vec<T>| -> Vec<T> {
                if v.len() == n_raw {
                    active.iter().zip(&norms).map(|(&i, &nm)| v[i] / nm).collect()
                } else {
                    vec![zero; n]
                }
            };
            s = pick(&ws.slack);
            us = pick(&ws.slack_dual);
            sigma = ws.penalty;
        }
        None => {
            z_t = HermitianMatrix::zeros(n_dim);
            z_r = HermitianMatrix::zeros(n_dim);
            u_t = HermitianMatrix::zeros(n_dim);
            u_r = HermitianMatrix::zeros(n_dim);
            s = vec![zero; n];
            us = vec![zero; n];
            sigma = opts.penalty;
        }
    }
    sigma = sigma.max(T::lit(PENALTY_MIN)).min(T::lit(PENALTY_MAX));

    let mut solver = AffineSolver::new(&gram, &ineq, rho, sigma);
    let mut y = vec![zero; n];
    let mut merit_history = Vec::new();
    let mut epoch = 0;
    let mut penalty_changes = 0;
    let mut best: Option<Best<T>> = None;
    let mut status = QsdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut last_check = 0;
    let mut probe: Option<(usize, T)> = None;

    if contradictory {
        status = QsdpStatus::Infeasible;
    }

    let mut k = 0;
    while k < opts.max_iterations && status != QsdpStatus::Infeasible {
        k += 1;
        iterations = k;
        let denom = rho + sigma;
        let v_t = &z_t - &u_t;
        let v_r = &z_r - &u_r;
        let mut x_t = HermitianMatrix::lin_comb(sigma / denom, &v_t, -one / denom, c_t);
        let mut x_r = HermitianMatrix::lin_comb(sigma / denom, &v_r, -one / denom, c_r);
        for (i, row) in rows.iter().enumerate() {
            let w = if row.ineq { s[i] - us[i] } else { zero };
            y[i] = row.bound - row.apply(&x_t, &x_r) + w;
        }
        solver.solve(&mut y);
        for (row, &yi) in rows.iter().zip(&y) {
            row.t.add_scaled_to(yi / denom, &mut x_t);
            row.r.add_scaled_to(yi / denom, &mut x_r);
        }
        let t: Vec<T> = (0..n)
            .map(|i| if ineq[i] { s[i] - us[i] - y[i] / sigma } else { zero })
            .collect();

        let new_z_t = project_face(&(&x_t + &u_t), &support_t);
        let new_z_r = project_face(&(&x_r + &u_r), &support_r);
        let new_s: Vec<T> = (0..n).map(|i| if ineq[i] { (t[i] + us[i]).max(zero) } else { zero }).collect();

        let du_t = &x_t - &new_z_t;
        let du_r = &x_r - &new_z_r;
        let mut rp_sq = du_t.frobenius_norm_sqr() + du_r.frobenius_norm_sqr();
        let mut dz_sq = (&new_z_t - &z_t).frobenius_norm_sqr() + (&new_z_r - &z_r).frobenius_norm_sqr();
        for i in 0..n {
            let d = t[i] - new_s[i];
            rp_sq += d * d;
            us[i] += d;
            let e = new_s[i] - s[i];
            dz_sq += e * e;
        }
        u_t += &du_t;
        u_r += &du_r;
        z_t = new_z_t;
        z_r = new_z_r;
        s = new_s;

        merit_history.push(MeritPoint {
            epoch,
            value: sigma * (dz_sq + rp_sq),
        });

        let r_p = rp_sq.sqrt();
        let z_norm = (z_t.frobenius_norm_sqr() + z_r.frobenius_norm_sqr()).sqrt();
        let rp_rel = r_p / (one + z_norm);
        let rd_rel = sigma * dz_sq.sqrt() / scale;

        let gates = rp_rel <= tol && rd_rel <= tol && k >= last_check + 5;
        if gates || k % CHECK_EVERY == 0 || k == opts.max_iterations {
            last_check = k;
            let y_raw: Vec<T> = y.iter().zip(&norms).map(|(&v, &nm)| v / nm).collect();
            let kkt = residual(prob, &raw_active, &z_t, &z_r, &y_raw);
            if best.as_ref().map_or(true, |b| kkt < b.kkt) {
                best = Some(Best {
                    kkt,
                    z_t: z_t.clone(),
                    z_r: z_r.clone(),
                    y: y.clone(),
                });
            }
            if kkt <= tol {
                status = QsdpStatus::Optimal;
                break;
            }
        }

        if k >= PROBE_START && k % PROBE_EVERY == 0 {
            // Infeasible problems leave a constant nonzero dual step with a settled cone block.
            if let Some((e, last_rp)) = probe {
                let settled = dz_sq.sqrt() <= T::lit(1e-3) * r_p;
                let steady = (r_p - last_rp).abs() <= T::lit(1e-3) * r_p;
                if e == epoch && rp_rel > T::lit(1e-4) && settled && steady {
                    status = QsdpStatus::Infeasible;
                }
            }
            probe = Some((epoch, r_p));
        }

        if k % BALANCE_EVERY == 0 && penalty_changes < MAX_PENALTY_CHANGES {
            let ratio = rp_rel / rd_rel.max(T::min_positive_value());
            let factor = if ratio > T::lit(BALANCE_RATIO) && sigma < T::lit(PENALTY_MAX) {
                Some(T::lit(2.0))
            } else if ratio < T::lit(1.0 / BALANCE_RATIO) && sigma > T::lit(PENALTY_MIN) {
                Some(T::lit(0.5))
            } else {
                None
            };
            if let Some(f) = factor {
                sigma *= f;
                // keep the unscaled dual sigma * U fixed
                u_t = u_t.scaled(one / f);
                u_r = u_r.scaled(one / f);
                for v in us.iter_mut() {
                    *v /= f;
                }
                solver = AffineSolver::new(&gram, &ineq, rho, sigma);
                epoch += 1;
                penalty_changes += 1;
            }
        }
    }

    let (q_t, q_r, y_best, kkt) = match (status, best) {
        (QsdpStatus::Optimal, Some(b)) | (QsdpStatus::MaxIterations, Some(b)) => (b.z_t, b.z_r, b.y, b.kkt),
        _ => {
            let y_raw: Vec<T> = y.iter().zip(&norms).map(|(&v, &nm)| v / nm).collect();
            let kkt = residual(prob, &raw_active, &z_t, &z_r, &y_raw);
            (z_t.clone(), z_r.clone(), y.clone(), kkt)
        }
    };

    let mut multipliers = vec![zero; n_raw];
    let mut slack = vec![zero; n_raw];
    let mut slack_dual = vec![zero; n_raw];
    for (j, &i) in active.iter().enumerate() {
        multipliers[i] = y_best[j] / norms[j];
        slack[i] = s[j] * norms[j];
        slack_dual[i] = us[j] * norms[j];
    }
    Ok(QsdpSolution {
        objective: prob.objective(&q_t, &q_r),
        q_t_mat: q_t,
        q_r_mat: q_r,
        status,
        kkt_residual: kkt,
        iterations,
        multipliers,
        merit_history,
        warm_start: WarmStart {
            z_t,
            z_r,
            u_t,
            u_r,
            slack,
            slack_dual,
            penalty: sigma,
        },
    })
}
