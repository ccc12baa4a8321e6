use crate::error::{Error, Result};
use crate::numerics::{min_eigenvalue, HermitianMatrix};
use crate::scalar::Real;

use super::rows::{build_rows, Row};
use super::{QsdpProblem, QsdpSolution, Variable};

/// KKT residual of a solution, using the multipliers it carries.
pub fn check_kkt<T: Real>(prob: &QsdpProblem<T>, sol: &QsdpSolution<T>) -> Result<T> {
    check_kkt_at(prob, &sol.q_t_mat, &sol.q_r_mat, &sol.multipliers)
}

/// KKT residual of a candidate `(Q_t, Q_r, y)`; zero exactly at a primal-dual optimum.
///
/// The residual is the largest of
/// - constraint violation per row: absolute for diagonal rules, divided by
///   `max(1, ||A_i||_F)` for trace constraints,
/// - PSD violation `-lambda_min(Q_l)`,
/// - dual PSD violation `-lambda_min(S_l)` of `S_l = C_l + rho Q_l - sum_i y_i A_il`,
/// - for single-sided diagonal rules, entries of `Q_l` off its support (both
///   PSD checks are then taken on the support, the face the variable lives on),
/// - complementarity `|<S_l, Q_l>|`,
/// - sign violation of inequality multipliers and `|y_i * slack_i|`,
///
/// where the dual terms are divided by `1 + max_l ||C_l||_F`.
pub fn check_kkt_at<T: Real>(
    prob: &QsdpProblem<T>,
    q_t: &HermitianMatrix<T>,
    q_r: &HermitianMatrix<T>,
    multipliers: &[T],
) -> Result<T> {
    prob.validate()?;
    let rows = build_rows(prob);
    if multipliers.len() != rows.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            actual: multipliers.len(),
        });
    }
    for q in [q_t, q_r] {
        if q.dim() != prob.dim {
            return Err(Error::DimensionMismatch {
                expected: prob.dim,
                actual: q.dim(),
            });
        }
    }
    Ok(residual(prob, &rows, q_t, q_r, multipliers))
}

pub(crate) fn cost_scale<T: Real>(prob: &QsdpProblem<T>) -> T {
    T::one() + prob.linear_cost_t.frobenius_norm().max(prob.linear_cost_r.frobenius_norm())
}

pub(crate) fn residual<T: Real>(
    prob: &QsdpProblem<T>,
    rows: &[Row<T>],
    q_t: &HermitianMatrix<T>,
    q_r: &HermitianMatrix<T>,
    y: &[T],
) -> T {
    let zero = T::zero();
    let scale = cost_scale(prob);
    let rho = prob.quad_weight;
    let mut worst = zero;
    let mut s_t = HermitianMatrix::lin_comb(T::one(), &prob.linear_cost_t, rho, q_t);
    let mut s_r = HermitianMatrix::lin_comb(T::one(), &prob.linear_cost_r, rho, q_r);
    for (row, &yi) in rows.iter().zip(y) {
        let norm = if row.diagonal { T::one() } else { row.norm().max(T::one()) };
        let (gap, yn) = ((row.apply(q_t, q_r) - row.bound) / norm, yi * norm);
        if row.ineq {
            worst = worst.max((-gap).max(zero));
            worst = worst.max((-yn).max(zero) / scale);
            worst = worst.max((yn * gap).abs() / scale);
        } else {
            worst = worst.max(gap.abs());
        }
        row.t.add_scaled_to(-yi, &mut s_t);
        row.r.add_scaled_to(-yi, &mut s_r);
    }
    for (var, q, s) in [(Variable::Transmit, q_t, &s_t), (Variable::Reflect, q_r, &s_r)] {
        let (qf, sf) = match prob.diagonal.support(var) {
            None => (q.clone(), s.clone()),
            Some(idx) => {
                let qf = q.restrict(&idx);
                worst = worst.max((q.frobenius_norm_sqr() - qf.frobenius_norm_sqr()).max(zero).sqrt());
                if idx.is_empty() {
                    continue;
                }
                (qf, s.restrict(&idx))
            }
        };
        worst = worst.max((-min_eigenvalue(&qf)).max(zero));
        worst = worst.max((-min_eigenvalue(&sf)).max(zero) / scale);
        worst = worst.max(s.inner(q).abs() / scale);
    }
    worst
}
