//! Instance generators and per-instance checks, parameterized over the code
//! under test so mutation fixtures can be run through the same checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starfd::channel::{generate_channels, ChannelParams, ChannelSet, Geometry};
use starfd::numerics::HermitianMatrix;
use starfd::power::solve_power;
use starfd::qsdp::{DiagonalRule, QsdpProblem, TraceConstraint, Variable};
use starfd::system::{NoiseParams, PowerPair, RateRequirements, StarProfile};

use crate::oracle::{gain, grid_power, Link};

pub const DESK_NOISE_MW: f64 = 1e-8;

pub fn desk_noise() -> NoiseParams<f64> {
    NoiseParams::new(DESK_NOISE_MW, DESK_NOISE_MW).expect("positive noise")
}

pub fn desk_channels(m: usize, seed: u64) -> starfd::Result<ChannelSet<f64>> {
    let params = ChannelParams {
        num_elements: m,
        ..ChannelParams::default()
    };
    generate_channels(&Geometry::default(), &params, seed)
}

fn random_profile(rng: &mut ChaCha8Rng, m: usize) -> StarProfile<f64> {
    let mut q_t = Vec::with_capacity(m);
    let mut q_r = Vec::with_capacity(m);
    for _ in 0..m {
        let beta: f64 = rng.random();
        q_t.push(Complex64::from_polar(beta.sqrt(), rng.random_range(0.0..std::f64::consts::TAU)));
        q_r.push(Complex64::from_polar((1.0 - beta).sqrt(), rng.random_range(0.0..std::f64::consts::TAU)));
    }
    StarProfile::normalized(q_t, q_r).expect("nonempty profile")
}

#[derive(Clone, Debug)]
pub struct PowerInstance {
    pub ch: ChannelSet<f64>,
    pub prof: StarProfile<f64>,
    pub req: RateRequirements<f64>,
    pub noise: NoiseParams<f64>,
}

impl PowerInstance {
    pub fn link(&self) -> Link {
        Link::new(&self.ch, self.prof.q_t(), self.prof.q_r(), &self.noise)
    }
}

/// Random M = 4 channel draws with random profiles and thresholds, kept when
/// the oracle's wedge test says the thresholds are comfortably feasible
/// (slope product below 0.5, so a 0.25 bps/Hz increase stays feasible).
pub fn power_instances(count: usize, seed: u64) -> Vec<PowerInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = desk_noise();
    (0..count as u64)
        .map(|i| {
            let ch = desk_channels(4, seed.wrapping_mul(1000) + i).expect("desk channels");
            loop {
                let prof = random_profile(&mut rng, 4);
                let req = RateRequirements::new(rng.random_range(0.5..2.0), rng.random_range(0.5..4.0)).unwrap();
                let inst = PowerInstance {
                    ch: ch.clone(),
                    prof,
                    req,
                    noise,
                };
                if inst.link().coupling(req.r_u_th, req.r_d_th) < 0.5 {
                    break inst;
                }
            }
        })
        .collect()
}

pub type PowerSolver<'a> = &'a (dyn Fn(&PowerInstance) -> starfd::Result<PowerPair<f64>> + Sync);

pub fn closed_form(inst: &PowerInstance) -> starfd::Result<PowerPair<f64>> {
    solve_power(&inst.prof, &inst.ch, &inst.req, &inst.noise)
}

pub const GRID_SIZE: usize = 400;

/// Rates at the solver's powers must hit the thresholds and no grid point may
/// undercut its total by more than one cell. Returns how many cells the grid
/// optimum sits above the solver.
pub fn check_power_instance(inst: &PowerInstance, solver: PowerSolver) -> Result<f64, String> {
    let p = solver(inst).map_err(|e| format!("solver error: {e}"))?;
    let link = inst.link();
    let (r_u, r_d) = link.rates(p.p_u, p.p_d);
    if (r_u - inst.req.r_u_th).abs() > 1e-9 || (r_d - inst.req.r_d_th).abs() > 1e-9 {
        return Err(format!(
            "rates ({r_u:.12}, {r_d:.12}) miss thresholds ({}, {})",
            inst.req.r_u_th, inst.req.r_d_th
        ));
    }
    let grid = grid_power(&link, inst.req.r_u_th, inst.req.r_d_th, GRID_SIZE)
        .ok_or_else(|| "grid oracle found no feasible point".to_string())?;
    let cell = grid.cell_u + grid.cell_d;
    if p.total() > grid.total + cell {
        return Err(format!("solver total {:e} exceeds grid best {:e} by more than a cell", p.total(), grid.total));
    }
    Ok((grid.total - p.total()) / cell)
}

pub type InitFn<'a> =
    &'a (dyn Fn(&ChannelSet<f64>, u64) -> starfd::Result<(Vec<Complex64>, Vec<Complex64>)> + Sync);

pub fn oitm(ch: &ChannelSet<f64>, seed: u64) -> starfd::Result<(Vec<Complex64>, Vec<Complex64>)> {
    let p = starfd::beamforming::oitm_init(ch, seed)?;
    Ok((p.q_t().to_vec(), p.q_r().to_vec()))
}

/// Invariants of an initial profile: per-element energy conservation,
/// a transmit vector orthogonal to the interference composite, and strictly
/// positive closed-form powers.
pub fn check_initial_profile(
    ch: &ChannelSet<f64>,
    seed: u64,
    init: InitFn,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
) -> Result<(), String> {
    let (q_t, q_r) = init(ch, seed).map_err(|e| format!("init error: {e}"))?;
    for (m, (t, r)) in q_t.iter().zip(&q_r).enumerate() {
        let e = t.norm_sqr() + r.norm_sqr();
        if (e - 1.0).abs() > 1e-9 {
            return Err(format!("element {m} carries energy {e}"));
        }
    }
    let h3_norm = ch.h3.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let leak = gain(&ch.h3, &q_t).sqrt();
    if leak > 1e-9 * h3_norm {
        return Err(format!("|h3^H q_t| = {leak:e} vs ||h3|| = {h3_norm:e}"));
    }
    let prof = StarProfile::new(q_t, q_r).map_err(|e| e.to_string())?;
    let p = solve_power(&prof, ch, req, noise).map_err(|e| format!("closed form: {e}"))?;
    if !(p.p_u > 0.0 && p.p_d > 0.0 && p.total().is_finite()) {
        return Err(format!("powers ({:e}, {:e}) not strictly positive", p.p_u, p.p_d));
    }
    Ok(())
}

/// Random coupled-diagonal QSDP shaped like the beamforming subproblem: PSD
/// costs, two rank-one rate rows and one indefinite interference row. Bounds
/// are fractions of the values at a strictly feasible witness.
pub fn qsdp_instance(m: usize, seed: u64) -> QsdpProblem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cvec = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..m)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let psd = |rng: &mut ChaCha8Rng| {
        let mut a = HermitianMatrix::zeros(m);
        for _ in 0..2 {
            a.add_outer(0.5, &cvec(rng));
        }
        a
    };
    let c_t = psd(&mut rng);
    let c_r = psd(&mut rng);
    let rho = rng.random_range(0.05..1.0);
    let mut prob = QsdpProblem::new(c_t, c_r, rho);
    prob.diagonal = DiagonalRule::Coupled;

    let aligned = |h: &[Complex64]| -> HermitianMatrix<f64> {
        let v: Vec<Complex64> = h.iter().map(|z| z / z.norm()).collect();
        let mut w = HermitianMatrix::outer(&v).scaled(0.45);
        w.axpy(0.05, &HermitianMatrix::identity(m));
        w
    };
    let h2 = cvec(&mut rng);
    let h3 = cvec(&mut rng);
    let h1 = cvec(&mut rng);
    let w_t = aligned(&h2);
    let w_r = aligned(&h1);
    let interference = HermitianMatrix::lin_comb(1.0, &HermitianMatrix::outer(&h2), -0.3, &HermitianMatrix::outer(&h3));
    let rows = [
        (Variable::Transmit, HermitianMatrix::outer(&h2), &w_t),
        (Variable::Reflect, HermitianMatrix::outer(&h1), &w_r),
        (Variable::Transmit, interference, &w_t),
    ];
    for (target, matrix, witness) in rows {
        let at_witness = matrix.inner(witness);
        if at_witness > 0.0 {
            let bound = rng.random_range(0.2..0.8) * at_witness;
            prob.ineq_constraints.push(TraceConstraint { target, matrix, bound });
        }
    }
    prob
}

/// Random PSD start with unit diagonal sum per element (before the rank-one bump).
pub fn random_start(m: usize, seed: u64) -> (HermitianMatrix<f64>, HermitianMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
    let v: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut q_t = HermitianMatrix::from_diagonal(&d);
    q_t.add_outer(0.1, &v);
    let q_r = HermitianMatrix::from_diagonal(&d.iter().map(|x| 1.0 - x).collect::<Vec<_>>());
    (q_t, q_r)
}
