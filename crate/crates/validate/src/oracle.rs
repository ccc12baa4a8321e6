//! Reference computations that share no code with the solver paths they check:
//! rates and gains summed directly, a brute-force power grid, a dual projected
//! gradient method for the QSDP and an exhaustive two-element search.

use num_complex::Complex64;
use starfd::channel::ChannelSet;
use starfd::numerics::{jacobi_eig, HermitianMatrix};
use starfd::power::{solve_power_from_gains, LinkGains};
use starfd::qsdp::{DiagonalRule, QsdpProblem, Variable};
use starfd::system::{NoiseParams, RateRequirements};

/// `|h^H q|^2`.
pub fn gain(h: &[Complex64], q: &[Complex64]) -> f64 {
    h.iter().zip(q).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()
}

pub fn sinr_target(rate: f64) -> f64 {
    2f64.powf(rate) - 1.0
}

/// Everything the two SINRs depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub si: f64,
    pub sigma_u: f64,
    pub sigma_d: f64,
}

impl Link {
    pub fn new(ch: &ChannelSet<f64>, q_t: &[Complex64], q_r: &[Complex64], noise: &NoiseParams<f64>) -> Self {
        Self {
            g1: gain(&ch.h1, q_r),
            g2: gain(&ch.h2, q_t),
            g3: gain(&ch.h3, q_t),
            si: ch.h_bb.norm_sqr(),
            sigma_u: noise.sigma_u_sq,
            sigma_d: noise.sigma_d_sq,
        }
    }

    pub fn sinr(&self, p_u: f64, p_d: f64) -> (f64, f64) {
        (
            p_u * self.g1 / (p_d * self.si + self.sigma_u),
            p_d * self.g2 / (p_u * self.g3 + self.sigma_d),
        )
    }

    pub fn rates(&self, p_u: f64, p_d: f64) -> (f64, f64) {
        let (a, b) = self.sinr(p_u, p_d);
        ((1.0 + a).log2(), (1.0 + b).log2())
    }

    /// Product of the two constraint lines' slopes in the `(p_u, p_d)` plane.
    /// The feasible wedge is nonempty exactly when this is below one.
    pub fn coupling(&self, r_u: f64, r_d: f64) -> f64 {
        (sinr_target(r_u) * self.si / self.g1) * (sinr_target(r_d) * self.g3 / self.g2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridBest {
    pub total: f64,
    pub p_u: f64,
    pub p_d: f64,
    pub cell_u: f64,
    pub cell_d: f64,
    /// Times the box was doubled before it held a feasible point.
    pub doublings: usize,
}

/// Cheapest feasible point of an `n x n` grid on `(0, U] x (0, D]`. The box
/// starts at twice the interference-free powers. A side doubles while its own
/// constraint cannot hold anywhere in the box (the uplink needs the largest
/// `p_u` with the smallest `p_d`, the downlink the reverse), and both double
/// when each can hold alone but no grid point satisfies both.
pub fn grid_power(link: &Link, r_u: f64, r_d: f64, n: usize) -> Option<GridBest> {
    let (tu, td) = (sinr_target(r_u), sinr_target(r_d));
    let mut hi_u = 2.0 * tu * link.sigma_u / link.g1;
    let mut hi_d = 2.0 * td * link.sigma_d / link.g2;
    if !(hi_u.is_finite() && hi_d.is_finite()) {
        return None;
    }
    for doublings in 0..200 {
        let (cu, cd) = (hi_u / n as f64, hi_d / n as f64);
        let mut best: Option<GridBest> = None;
        for i in 1..=n {
            let p_u = i as f64 * cu;
            for j in 1..=n {
                let p_d = j as f64 * cd;
                let ok = p_u * link.g1 >= tu * (p_d * link.si + link.sigma_u)
                    && p_d * link.g2 >= td * (p_u * link.g3 + link.sigma_d);
                if ok && best.is_none_or(|b| p_u + p_d < b.total) {
                    best = Some(GridBest {
                        total: p_u + p_d,
                        p_u,
                        p_d,
                        cell_u: cu,
                        cell_d: cd,
                        doublings,
                    });
                }
            }
        }
        if best.is_some() {
            return best;
        }
        let ul_reachable = hi_u * link.g1 >= tu * (cd * link.si + link.sigma_u);
        let dl_reachable = hi_d * link.g2 >= td * (cu * link.g3 + link.sigma_d);
        if !ul_reachable || ul_reachable == dl_reachable {
            hi_u *= 2.0;
        }
        if !dl_reachable || ul_reachable == dl_reachable {
            hi_d *= 2.0;
        }
    }
    None
}

struct Row {
    a_t: HermitianMatrix<f64>,
    a_r: HermitianMatrix<f64>,
    b: f64,
    equality: bool,
}

fn oracle_rows(prob: &QsdpProblem<f64>) -> Vec<Row> {
    let n = prob.dim;
    let zero = HermitianMatrix::zeros(n);
    let mut rows = Vec::new();
    let mut push = |target: Variable, m: &HermitianMatrix<f64>, b: f64, equality: bool| {
        let (a_t, a_r) = match target {
            Variable::Transmit => (m.clone(), zero.clone()),
            Variable::Reflect => (zero.clone(), m.clone()),
        };
        rows.push(Row { a_t, a_r, b, equality });
    };
    for c in &prob.ineq_constraints {
        push(c.target, &c.matrix, c.bound, false);
    }
    for c in &prob.eq_constraints {
        push(c.target, &c.matrix, c.bound, true);
    }
    match &prob.diagonal {
        DiagonalRule::Free => {}
        DiagonalRule::Coupled => {
            for m in 0..n {
                let mut e = vec![0.0; n];
                e[m] = 1.0;
                let d = HermitianMatrix::from_diagonal(&e);
                rows.push(Row {
                    a_t: d.clone(),
                    a_r: d,
                    b: 1.0,
                    equality: true,
                });
            }
        }
        DiagonalRule::PerElement(_) => unimplemented!("oracle covers free and coupled diagonals"),
    }
    rows
}

fn psd_part(a: &HermitianMatrix<f64>) -> HermitianMatrix<f64> {
    jacobi_eig(a).reconstruct_with(|l| l.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualOracle {
    /// Primal objective at the primal point the final multipliers induce.
    pub objective: f64,
    /// Dual objective at the final multipliers (a lower bound on the optimum).
    pub lower_bound: f64,
    /// Largest constraint violation of that primal point.
    pub violation: f64,
    pub iterations: usize,
}

/// Accelerated projected gradient ascent on the dual of a QSDP with a
/// positive quadratic weight. For multipliers `y` the inner minimizer is
/// `Q_l = [sum_i y_i A_il - C_l]_+ / rho`, so the dual is smooth with gradient
/// `b - A(Q)` and the primal optimum is read off at the dual optimum.
pub fn qsdp_dual_oracle(prob: &QsdpProblem<f64>, tol: f64, max_iter: usize) -> DualOracle {
    let rho = prob.quad_weight;
    assert!(rho > 0.0, "dual oracle needs a positive quadratic weight");
    let rows = oracle_rows(prob);
    let lip: f64 = rows
        .iter()
        .map(|r| r.a_t.frobenius_norm_sqr() + r.a_r.frobenius_norm_sqr())
        .sum::<f64>()
        / rho;
    let primal = |y: &[f64]| {
        let mut w_t = prob.linear_cost_t.scaled(-1.0);
        let mut w_r = prob.linear_cost_r.scaled(-1.0);
        for (r, &yi) in rows.iter().zip(y) {
            w_t.axpy(yi, &r.a_t);
            w_r.axpy(yi, &r.a_r);
        }
        (psd_part(&w_t).scaled(1.0 / rho), psd_part(&w_r).scaled(1.0 / rho))
    };
    let gradient = |q_t: &HermitianMatrix<f64>, q_r: &HermitianMatrix<f64>| -> Vec<f64> {
        rows.iter().map(|r| r.b - r.a_t.inner(q_t) - r.a_r.inner(q_r)).collect()
    };
    let project = |y: &mut [f64]| {
        for (r, v) in rows.iter().zip(y.iter_mut()) {
            if !r.equality {
                *v = v.max(0.0);
            }
        }
    };
    let assess = |y: &[f64]| -> DualOracle {
        let (q_t, q_r) = primal(y);
        let g = gradient(&q_t, &q_r);
        let violation = rows
            .iter()
            .zip(&g)
            .map(|(r, &gi)| {
                let v = if r.equality { gi.abs() } else { gi.max(0.0) };
                v / (r.a_t.frobenius_norm_sqr() + r.a_r.frobenius_norm_sqr()).sqrt().max(1.0)
            })
            .fold(0.0, f64::max);
        let by: f64 = rows.iter().zip(y).map(|(r, yi)| r.b * yi).sum();
        let half = 0.5 * rho;
        DualOracle {
            objective: prob.objective(&q_t, &q_r),
            lower_bound: by - half * (q_t.frobenius_norm_sqr() + q_r.frobenius_norm_sqr()),
            violation,
            iterations: 0,
        }
    };

    let mut y = vec![0.0; rows.len()];
    let mut z = y.clone();
    let mut t = 1.0f64;
    let mut k = 0;
    while k < max_iter {
        k += 1;
        let (q_t, q_r) = primal(&z);
        let g = gradient(&q_t, &q_r);
        let mut y_next: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi + gi / lip).collect();
        project(&mut y_next);
        let step: f64 = g.iter().zip(y_next.iter().zip(&y)).map(|(gi, (a, b))| gi * (a - b)).sum();
        if step < 0.0 {
            // momentum pointed downhill: restart
            t = 1.0;
            z.clone_from(&y_next);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            z = y_next.iter().zip(&y).map(|(a, b)| a + beta * (a - b)).collect();
            t = t_next;
        }
        y = y_next;
        if k % 50 == 0 {
            let a = assess(&y);
            if a.violation <= tol && (a.objective - a.lower_bound).abs() <= tol * a.objective.abs().max(1.0) {
                return DualOracle { iterations: k, ..a };
            }
        }
    }
    DualOracle {
        iterations: k,
        ..assess(&y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchBest {
    pub total: f64,
    pub q_t: Vec<Complex64>,
    pub q_r: Vec<Complex64>,
}

/// Exhaustive search over two elements: `amps` transmit-energy levels on
/// `[0, 1]` and `phases` phase levels per side per element, each profile priced
/// with the closed-form powers. Element 0 keeps zero phase on both sides since
/// every gain is invariant to a common phase of `q_t` (or `q_r`) and the phase
/// grid is closed under that shift.
pub fn exhaustive_two_element(
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    phases: usize,
    amps: usize,
) -> Option<SearchBest> {
    assert_eq!(ch.num_elements(), 2, "exhaustive search is for two elements");
    let levels: Vec<f64> = (0..amps).map(|k| k as f64 / (amps - 1) as f64).collect();
    let rot: Vec<Complex64> = (0..phases)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / phases as f64))
        .collect();
    let (h1, h2, h3) = (&ch.h1, &ch.h2, &ch.h3);
    let si = ch.h_bb.norm_sqr();
    let mut best: Option<SearchBest> = None;
    for &b0 in &levels {
        let (t0, r0) = (b0.sqrt(), (1.0 - b0).sqrt());
        for &b1 in &levels {
            let (t1, r1) = (b1.sqrt(), (1.0 - b1).sqrt());
            for pt in &rot {
                let qt1 = pt * t1;
                let s2 = h2[0].conj() * t0 + h2[1].conj() * qt1;
                let s3 = h3[0].conj() * t0 + h3[1].conj() * qt1;
                for pr in &rot {
                    let qr1 = pr * r1;
                    let s1 = h1[0].conj() * r0 + h1[1].conj() * qr1;
                    let g = LinkGains {
                        g1: s1.norm_sqr(),
                        g2: s2.norm_sqr(),
                        g3: s3.norm_sqr(),
                        si,
                    };
                    let Ok(p) = solve_power_from_gains(&g, req, noise) else {
                        continue;
                    };
                    if best.as_ref().is_none_or(|b| p.total() < b.total) {
                        best = Some(SearchBest {
                            total: p.total(),
                            q_t: vec![Complex64::new(t0, 0.0), qt1],
                            q_r: vec![Complex64::new(r0, 0.0), qr1],
                        });
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link() -> Link {
        Link {
            g1: 2e-10,
            g2: 3e-12,
            g3: 1e-13,
            si: 1e-10,
            sigma_u: 1e-8,
            sigma_d: 1e-8,
        }
    }

    #[test]
    fn grid_point_is_feasible_and_near_the_wedge_apex() {
        let l = link();
        let best = grid_power(&l, 1.0, 2.0, 400).unwrap();
        let (ru, rd) = l.rates(best.p_u, best.p_d);
        assert!(ru >= 1.0 - 1e-12 && rd >= 2.0 - 1e-12);
        // apex of the wedge by Cramer's rule on the two active constraints
        let (tu, td) = (1.0, 3.0);
        let det = l.g1 * l.g2 - tu * td * l.si * l.g3;
        let p_u = tu * (l.sigma_u * l.g2 + l.si * td * l.sigma_d) / det;
        let p_d = td * (l.sigma_d * l.g1 + l.g3 * tu * l.sigma_u) / det;
        assert!(best.total >= p_u + p_d);
        assert!(best.total <= p_u + p_d + 4.0 * (best.cell_u + best.cell_d));
    }

    #[test]
    fn box_follows_an_interference_dominated_uplink() {
        // p_u is set by the SI term, ~400x its interference-free value
        let l = Link {
            g1: 8.0e-11,
            g2: 1.7e-13,
            g3: 8.5e-15,
            si: 6.6e-11,
            ..link()
        };
        let best = grid_power(&l, 0.88, 1.48, 400).unwrap();
        let (ru, rd) = l.rates(best.p_u, best.p_d);
        assert!(ru >= 0.88 && rd >= 1.48);
        assert!(best.doublings > 0);
    }

    #[test]
    fn empty_wedge_has_no_grid_point() {
        let l = Link { si: 1.0, ..link() };
        assert!(l.coupling(1.0, 2.0) > 1.0);
        assert!(grid_power(&l, 1.0, 2.0, 50).is_none());
    }

    #[test]
    fn dual_oracle_solves_a_projection() {
        // min <C,Q> + rho/2 ||Q||^2 over PSD with no rows is [-C]_+ / rho
        let c = HermitianMatrix::from_diagonal(&[1.0, -2.0, 0.5]);
        let prob = QsdpProblem::new(c.clone(), c.scaled(-1.0), 2.0);
        let out = qsdp_dual_oracle(&prob, 1e-12, 1000);
        let expect = -(4.0 + 1.0 + 0.25) / 4.0;
        assert!((out.objective - expect).abs() < 1e-12, "{out:?}");
    }
}
