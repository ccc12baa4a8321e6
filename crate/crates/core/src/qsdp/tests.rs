use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numerics::test_support::{random_cvec, random_hermitian, random_psd};
use crate::numerics::{hermitian_eig, min_eigenvalue};
use crate::scalar::{cx, Cx};

fn scalar(v: f64) -> HermitianMatrix<f64> {
    HermitianMatrix::from_diagonal(&[v])
}

/// Coupled two-variable instance with two trace inequalities that hold at a
/// random rank-one profile.
fn random_instance(rng: &mut impl Rng, m: usize, rho: f64) -> QsdpProblem<f64> {
    let mut prob = QsdpProblem::new(random_hermitian(rng, m), random_hermitian(rng, m), rho);
    prob.diagonal = DiagonalRule::Coupled;
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..0.9)).collect();
    let phase = |rng: &mut dyn rand::RngCore| {
        let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        Cx::from_polar(1.0, th)
    };
    let qt: Vec<Cx<f64>> = b.iter().map(|&x| phase(rng) * x.sqrt()).collect();
    let qr: Vec<Cx<f64>> = b.iter().map(|&x| phase(rng) * (1.0 - x).sqrt()).collect();
    let (x_t, x_r) = (HermitianMatrix::outer(&qt), HermitianMatrix::outer(&qr));
    for (target, x) in [(Variable::Transmit, &x_t), (Variable::Reflect, &x_r)] {
        let a = HermitianMatrix::outer(&random_cvec(rng, m));
        let bound = a.inner(x) * rng.random_range(0.5..1.0);
        prob.ineq_constraints.push(TraceConstraint {
            target,
            matrix: a,
            bound,
        });
    }
    prob
}

#[test]
fn scalar_closed_form() {
    for &(a, b, c, rho) in &[(2.0, 1.0, 0.5, 1.0), (1.0, 0.3, -2.0, 1.0), (0.5, 0.1, 0.2, 0.01)] {
        let mut prob = QsdpProblem::new(scalar(c), scalar(0.0), rho);
        prob.ineq_constraints.push(TraceConstraint {
            target: Variable::Transmit,
            matrix: scalar(a),
            bound: b,
        });
        let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
        let expect = f64::max(b / a, (-c / rho).max(0.0));
        assert_eq!(sol.status, QsdpStatus::Optimal);
        assert!((sol.q_t_mat.get(0, 0).re - expect).abs() < 1e-5, "{a} {b} {c} {rho}");
        assert!(check_kkt(&prob, &sol).unwrap() <= 1e-6);
    }
}

#[test]
fn hand_built_scalar_optimum_has_zero_residual() {
    // min 0.5 q + 0.5 q^2 s.t. 2q >= 1: q = 0.5, stationarity 0.5 + 0.5 = 2y
    let mut prob = QsdpProblem::new(scalar(0.5), scalar(0.0), 1.0);
    prob.ineq_constraints.push(TraceConstraint {
        target: Variable::Transmit,
        matrix: scalar(2.0),
        bound: 1.0,
    });
    let r = check_kkt_at(&prob, &scalar(0.5), &scalar(0.0), &[0.5]).unwrap();
    assert!(r <= 1e-9, "{r}");
    // wrong multiplier breaks stationarity
    assert!(check_kkt_at(&prob, &scalar(0.5), &scalar(0.0), &[0.2]).unwrap() > 0.1);
}

#[test]
fn trace_constrained_minimum_is_smallest_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in [2, 4, 6] {
        let c = random_hermitian(&mut rng, m);
        let mut prob = QsdpProblem::new(c.clone(), HermitianMatrix::zeros(m), 0.0);
        prob.eq_constraints.push(TraceConstraint {
            target: Variable::Transmit,
            matrix: HermitianMatrix::identity(m),
            bound: 1.0,
        });
        let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
        assert_eq!(sol.status, QsdpStatus::Optimal);
        let eig = hermitian_eig(&c);
        let lmin = *eig.eigenvalues().last().unwrap();
        assert!((sol.objective - lmin).abs() < 1e-5, "{} vs {lmin}", sol.objective);
        let u = eig.vector(m - 1);
        let expect = HermitianMatrix::outer(u);
        assert!(sol.q_t_mat.max_abs_diff(&expect) < 1e-3);
    }
}

#[test]
fn random_instances_meet_the_kkt_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let rho = rng.random_range(0.5..2.0);
        let prob = random_instance(&mut rng, 6, rho);
        let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
        assert_eq!(sol.status, QsdpStatus::Optimal);
        let kkt = check_kkt(&prob, &sol).unwrap();
        assert!(kkt <= 1e-6, "{kkt}");
        assert!(min_eigenvalue(&sol.q_t_mat) >= -1e-7);
        for m in 0..6 {
            let d = sol.q_t_mat.get(m, m).re + sol.q_r_mat.get(m, m).re;
            assert!((d - 1.0).abs() <= 1e-6);
        }
        for c in &prob.ineq_constraints {
            let q = match c.target {
                Variable::Transmit => &sol.q_t_mat,
                Variable::Reflect => &sol.q_r_mat,
            };
            assert!(c.matrix.inner(q) - c.bound >= -1e-6 * c.matrix.frobenius_norm());
        }
    }
}

#[test]
fn perturbed_solution_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let prob = random_instance(&mut rng, 4, 1.0);
    let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
    let mut bumped = sol.q_t_mat.clone();
    bumped.add_to_diagonal(2, 0.1);
    let r = check_kkt_at(&prob, &bumped, &sol.q_r_mat, &sol.multipliers).unwrap();
    assert!(r >= 0.05, "{r}");
}

#[test]
fn multistart_agrees_under_strong_convexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let prob = random_instance(&mut rng, 6, 1.0);
    let mut objs = Vec::new();
    for _ in 0..5 {
        let z_t = random_psd(&mut rng, 6, 6);
        let z_r = random_psd(&mut rng, 6, 3);
        let opts = QsdpOptions {
            warm_start: Some(WarmStart::from_primal(z_t, z_r, rng.random_range(0.1..10.0))),
            ..QsdpOptions::default()
        };
        let sol = solve_qsdp(&prob, &opts).unwrap();
        assert_eq!(sol.status, QsdpStatus::Optimal);
        objs.push(sol.objective);
    }
    let spread = objs.iter().cloned().fold(f64::MIN, f64::max) - objs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 2e-6, "{objs:?}");
}

#[test]
fn merit_is_monotone_within_each_penalty_epoch() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let prob = random_instance(&mut rng, 5, 0.8);
    let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
    assert!(sol.merit_history.len() > 10);
    for w in sol.merit_history.windows(2) {
        if w[0].epoch == w[1].epoch {
            assert!(w[1].value <= w[0].value * (1.0 + 1e-6) + 1e-28, "{:?}", w);
        }
    }
}

#[test]
fn homogeneous_scaling_at_zero_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let m = 4;
    let base = |alpha: f64, rng: &mut ChaCha8Rng| {
        let mut r = rng.clone();
        let c_t = random_psd(&mut r, m, m);
        let c_r = random_psd(&mut r, m, m);
        let a = HermitianMatrix::outer(&random_cvec(&mut r, m));
        let mut p = QsdpProblem::new(c_t.scaled(alpha), c_r.scaled(alpha), 0.0);
        for target in [Variable::Transmit, Variable::Reflect] {
            p.eq_constraints.push(TraceConstraint {
                target,
                matrix: HermitianMatrix::identity(m),
                bound: alpha,
            });
        }
        p.ineq_constraints.push(TraceConstraint {
            target: Variable::Transmit,
            matrix: a.clone(),
            bound: alpha * 0.6 * a.trace() / m as f64,
        });
        p
    };
    let p1 = base(1.0, &mut rng);
    let p3 = base(3.0, &mut rng);
    let s1 = solve_qsdp(&p1, &QsdpOptions::default()).unwrap();
    let s3 = solve_qsdp(&p3, &QsdpOptions::default()).unwrap();
    assert_eq!(s1.status, QsdpStatus::Optimal);
    assert_eq!(s3.status, QsdpStatus::Optimal);
    assert!((s3.objective - 9.0 * s1.objective).abs() < 1e-4 * s3.objective.abs().max(1.0));
}

#[test]
fn contradictory_diagonal_is_infeasible() {
    let m = 3;
    let mut prob = QsdpProblem::new(HermitianMatrix::identity(m), HermitianMatrix::identity(m), 1e-3);
    prob.diagonal = DiagonalRule::PerElement(vec![ElementRule::TransmitOnly; m]);
    // [Q_t]_00 = 1 fixed, but ask for [Q_t]_00 >= 2
    let mut e = HermitianMatrix::zeros(m);
    e.add_to_diagonal(0, 1.0);
    prob.ineq_constraints.push(TraceConstraint {
        target: Variable::Transmit,
        matrix: e,
        bound: 2.0,
    });
    let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
    assert_eq!(sol.status, QsdpStatus::Infeasible);
    assert!(sol.iterations < 20_000);
}

#[test]
fn single_sided_rules_fix_the_diagonals() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let m = 4;
    let mut prob = QsdpProblem::new(random_hermitian(&mut rng, m), random_hermitian(&mut rng, m), 1e-2);
    let rules = vec![
        ElementRule::TransmitOnly,
        ElementRule::TransmitOnly,
        ElementRule::ReflectOnly,
        ElementRule::ReflectOnly,
    ];
    prob.diagonal = DiagonalRule::PerElement(rules.clone());
    let sol = solve_qsdp(&prob, &QsdpOptions::default()).unwrap();
    assert_eq!(sol.status, QsdpStatus::Optimal);
    assert_eq!(sol.multipliers.len(), 4);
    for (i, r) in rules.iter().enumerate() {
        let (t, rr) = (sol.q_t_mat.get(i, i).re, sol.q_r_mat.get(i, i).re);
        let (et, er) = if *r == ElementRule::TransmitOnly { (1.0, 0.0) } else { (0.0, 1.0) };
        assert!((t - et).abs() < 1e-6 && (rr - er).abs() < 1e-6);
        let (zero_side, j) = if *r == ElementRule::TransmitOnly { (&sol.q_r_mat, i) } else { (&sol.q_t_mat, i) };
        for k in 0..m {
            assert_eq!(zero_side.get(j, k).norm(), 0.0);
        }
    }
}

#[test]
fn json_dump_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let prob = random_instance(&mut rng, 3, 0.5);
    let dir = std::env::temp_dir().join(format!("qsdp-dump-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.json");
    dump_json(&prob, &path).unwrap();
    let back: QsdpProblem<f64> = load_json(&path).unwrap();
    assert_eq!(back, prob);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"dim\": 3"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn single_precision_solve() {
    let mut prob = QsdpProblem::new(
        HermitianMatrix::<f32>::from_fn(2, |i, j| if i == j { cx(1.0 + i as f32, 0.0) } else { cx(0.2, 0.1 * (i as f32 - j as f32)) })
            .unwrap(),
        HermitianMatrix::zeros(2),
        0.0,
    );
    prob.eq_constraints.push(TraceConstraint {
        target: Variable::Transmit,
        matrix: HermitianMatrix::identity(2),
        bound: 1.0,
    });
    let opts = QsdpOptions {
        tolerance: 1e-4,
        ..QsdpOptions::default()
    };
    let sol = solve_qsdp(&prob, &opts).unwrap();
    let lmin = min_eigenvalue(&prob.linear_cost_t);
    assert!((sol.objective - lmin).abs() < 1e-3);
}
