use std::time::{Duration, Instant};

use starfd::ao::{run_ao, AoOptions};
use starfd::experiment::{figure_config, mw_to_dbm, RunPoint, Scheme};
use starfd::qsdp::{check_kkt, solve_qsdp, QsdpOptions, QsdpStatus, WarmStart};
use starfd::system::RateRequirements;

use crate::cache::{RunCache, RunOutcome};
use crate::checks::{
    check_initial_profile, check_power_instance, closed_form, desk_channels, desk_noise, oitm, power_instances,
    qsdp_instance, random_start, InitFn, PowerInstance, PowerSolver,
};
use crate::oracle::{exhaustive_two_element, qsdp_dual_oracle};

pub const SEEDS: u64 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let budget = match self.budget {
            Some(b) => format!("budget {} s", b.as_secs()),
            None => "no separate budget".into(),
        };
        format!(
            "criterion {:>2} {}  {}: {} [{:.1} s, {}]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            budget
        )
    }
}

/// `(id, title, runtime budget in seconds)`.
pub const CRITERIA: [(u32, &str, Option<u64>); 10] = [
    (1, "closed-form power vs grid oracle", Some(10)),
    (2, "power monotone in thresholds", Some(5)),
    (3, "QSDP vs dual projected-gradient oracle", Some(60)),
    (4, "SCA rank-one success", Some(180)),
    (5, "OITM orthogonality and positive powers", Some(5)),
    (6, "AO traces monotone and converged", None),
    (7, "two-element AO vs exhaustive search", Some(120)),
    (8, "power falls with M; STAR-FD <= CON-FD", Some(600)),
    (9, "FD beats HD at high DL rate", Some(600)),
    (10, "SI sweep: HD fixed, FD non-increasing", Some(600)),
];

type Outcome = (bool, String);

/// Runs criteria against one shared run cache.
#[derive(Default)]
pub struct Suite {
    cache: RunCache,
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(&self, id: u32) -> Option<CriterionReport> {
        let &(_, title, budget) = CRITERIA.iter().find(|c| c.0 == id)?;
        let start = Instant::now();
        let (ok, detail) = match id {
            1 => power_oracle(&power_instances(50, 1), &closed_form),
            2 => monotone_thresholds(),
            3 => qsdp_oracle(),
            4 => rank_one(&self.cache),
            5 => initial_profiles(&oitm, 100),
            6 => ao_traces(&self.cache),
            7 => small_instances(),
            8 => element_trend(&self.cache),
            9 => rate_trend(&self.cache),
            10 => si_trend(&self.cache),
            _ => unreachable!(),
        };
        let elapsed = start.elapsed();
        let budget = budget.map(Duration::from_secs);
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let detail = if in_time { detail } else { format!("{detail}; over runtime budget") };
        Some(CriterionReport {
            id,
            title,
            passed: ok && in_time,
            detail,
            elapsed,
            budget,
        })
    }

    /// All criteria in order, handing each report to `each` as it completes.
    pub fn run_all(&self, mut each: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
        CRITERIA
            .iter()
            .filter_map(|c| self.run(c.0))
            .inspect(|r| each(r))
            .collect()
    }
}

fn first_failures(fails: &[String]) -> String {
    let shown: Vec<&str> = fails.iter().take(3).map(String::as_str).collect();
    shown.join("; ")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn power_oracle(instances: &[PowerInstance], solver: PowerSolver) -> Outcome {
    let mut fails = Vec::new();
    let mut cells: Vec<f64> = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        match check_power_instance(inst, solver) {
            Ok(c) => cells.push(c),
            Err(e) => fails.push(format!("instance {i}: {e}")),
        }
    }
    if fails.is_empty() {
        let hi = cells.iter().cloned().fold(0.0, f64::max);
        let lo = cells.iter().cloned().fold(f64::INFINITY, f64::min);
        (
            true,
            format!(
                "{}/{} instances at thresholds within 1e-9, grid optimum {lo:.2}..{hi:.2} cells above",
                cells.len(),
                instances.len()
            ),
        )
    } else {
        (false, format!("{} of {} failed: {}", fails.len(), instances.len(), first_failures(&fails)))
    }
}

fn monotone_thresholds() -> Outcome {
    let instances = power_instances(50, 2);
    let mut fails = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        let total = |r_u: f64, r_d: f64| {
            let req = RateRequirements::new(r_u, r_d).unwrap();
            closed_form(&PowerInstance { req, ..inst.clone() }).map(|p| p.total())
        };
        let (r_u, r_d) = (inst.req.r_u_th, inst.req.r_d_th);
        let Ok(base) = total(r_u, r_d) else {
            fails.push(format!("instance {i}: base infeasible"));
            continue;
        };
        for delta in [1e-3, 0.25] {
            for (which, t) in [("UL", total(r_u + delta, r_d)), ("DL", total(r_u, r_d + delta))] {
                match t {
                    Ok(t) if t > base => {}
                    Ok(t) => fails.push(format!("instance {i}: {which} +{delta} gave {t:e} <= {base:e}")),
                    Err(e) => fails.push(format!("instance {i}: {which} +{delta}: {e}")),
                }
            }
        }
    }
    if fails.is_empty() {
        (true, format!("{} instances, both thresholds, steps 1e-3 and 0.25 bps/Hz", instances.len()))
    } else {
        (false, format!("{} violations: {}", fails.len(), first_failures(&fails)))
    }
}

fn qsdp_oracle() -> Outcome {
    let mut fails = Vec::new();
    let (mut worst_rel, mut worst_kkt, mut worst_spread) = (0.0f64, 0.0f64, 0.0f64);
    let count = 20;
    for i in 0..count {
        let prob = qsdp_instance(6, 300 + i);
        let opts = QsdpOptions::default();
        let sol = match solve_qsdp(&prob, &opts) {
            Ok(s) if s.status == QsdpStatus::Optimal => s,
            Ok(s) => {
                fails.push(format!("instance {i}: status {}", s.status));
                continue;
            }
            Err(e) => {
                fails.push(format!("instance {i}: {e}"));
                continue;
            }
        };
        let kkt = check_kkt(&prob, &sol).unwrap_or(f64::INFINITY);
        worst_kkt = worst_kkt.max(kkt);
        if kkt > 1e-6 {
            fails.push(format!("instance {i}: KKT residual {kkt:e}"));
        }
        let oracle = qsdp_dual_oracle(&prob, 1e-10, 400_000);
        if oracle.violation > 1e-8 {
            fails.push(format!("instance {i}: oracle stalled at violation {:e}", oracle.violation));
            continue;
        }
        let rel = (sol.objective - oracle.objective).abs() / oracle.objective.abs();
        worst_rel = worst_rel.max(rel);
        if rel > 1e-4 {
            fails.push(format!(
                "instance {i}: objective {:e} vs oracle {:e}",
                sol.objective, oracle.objective
            ));
        }
        let mut objs = vec![sol.objective];
        for s in 0..3 {
            let (z_t, z_r) = random_start(6, 900 + 10 * i + s);
            let warm = QsdpOptions {
                warm_start: Some(WarmStart::from_primal(z_t, z_r, 1.0)),
                ..QsdpOptions::default()
            };
            match solve_qsdp(&prob, &warm) {
                Ok(s) => objs.push(s.objective),
                Err(e) => fails.push(format!("instance {i}: restart failed: {e}")),
            }
        }
        let hi = objs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = objs.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = (hi - lo) / mean(&objs).abs();
        worst_spread = worst_spread.max(spread);
        if spread > 2e-6 {
            fails.push(format!("instance {i}: multistart spread {spread:e}"));
        }
    }
    let summary = format!(
        "{count} instances, worst relative gap {worst_rel:.1e}, KKT {worst_kkt:.1e}, multistart spread {worst_spread:.1e}"
    );
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

fn figure_jobs(id: u32, schemes: &[Scheme]) -> Vec<(Scheme, RunPoint, u64)> {
    let cfg = figure_config(id, SEEDS).expect("built-in figure");
    let mut jobs = Vec::new();
    for p in cfg.points().expect("built-in points") {
        for &s in schemes {
            for seed in 0..SEEDS {
                jobs.push((s, p.clone(), seed));
            }
        }
    }
    jobs
}

fn failed_runs(jobs: &[(Scheme, RunPoint, u64)], outs: &[RunOutcome]) -> Vec<String> {
    jobs.iter()
        .zip(outs)
        .filter_map(|((s, p, seed), o)| {
            o.error
                .as_ref()
                .map(|e| format!("{s} seed {seed} at {:?}: {e}", p.sweep_value))
        })
        .collect()
}

fn rank_one(cache: &RunCache) -> Outcome {
    let jobs = figure_jobs(2, &[Scheme::StarFd]);
    let outs = cache.fetch(&jobs);
    let mut fails = failed_runs(&jobs, &outs);
    let (mut worst_res, mut worst_gap) = (0.0f64, 0.0f64);
    for ((_, _, seed), o) in jobs.iter().zip(&outs) {
        let Some((gu, gd)) = o.rate_gap else { continue };
        worst_res = worst_res.max(o.last_residual);
        worst_gap = worst_gap.max(-gu).max(-gd);
        if o.last_residual >= 1e-6 {
            fails.push(format!("seed {seed}: rank-one residual {:e}", o.last_residual));
        }
        if gu < -1e-5 || gd < -1e-5 {
            fails.push(format!("seed {seed}: rate shortfall ({gu:e}, {gd:e})"));
        }
    }
    let summary = format!(
        "{} runs, worst residual {worst_res:.1e}, worst rate shortfall {:.1e} bps/Hz",
        jobs.len(),
        worst_gap.max(0.0)
    );
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

pub fn initial_profiles(init: InitFn, seeds: u64) -> Outcome {
    let req = RateRequirements::new(1.0, 4.0).unwrap();
    let noise = desk_noise();
    let mut fails = Vec::new();
    for seed in 0..seeds {
        let ch = desk_channels(8, seed).expect("desk channels");
        if let Err(e) = check_initial_profile(&ch, seed, init, &req, &noise) {
            fails.push(format!("seed {seed}: {e}"));
        }
    }
    if fails.is_empty() {
        (true, format!("{seeds} seeds at M = 8"))
    } else {
        (false, format!("{} of {seeds} seeds failed: {}", fails.len(), first_failures(&fails)))
    }
}

fn ao_traces(cache: &RunCache) -> Outcome {
    let jobs = figure_jobs(2, &[Scheme::StarFd, Scheme::ConFd]);
    let outs = cache.fetch(&jobs);
    let mut fails = failed_runs(&jobs, &outs);
    let mut most = 0;
    for ((s, _, seed), o) in jobs.iter().zip(&outs) {
        let Some(total) = o.total else { continue };
        most = most.max(o.iterations);
        if let Some(n) = o.trace.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-9)) {
            fails.push(format!("{s} seed {seed}: total rose at iteration {}", n + 2));
        }
        if o.trace.last().is_some_and(|&l| total > l * (1.0 + 1e-9)) {
            fails.push(format!("{s} seed {seed}: returned total above trace"));
        }
        if !o.converged || o.iterations > 30 {
            fails.push(format!("{s} seed {seed}: not converged after {} iterations", o.iterations));
        }
    }
    let summary = format!("{} desk runs (star-fd, con-fd), at most {most} outer iterations", jobs.len());
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

/// Rates used for the two-element comparison.
pub const SMALL_REQ: (f64, f64) = (1.0, 2.0);

fn small_instances() -> Outcome {
    let req = RateRequirements::new(SMALL_REQ.0, SMALL_REQ.1).unwrap();
    let noise = desk_noise();
    let opts = AoOptions::default();
    let mut fails = Vec::new();
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let ch = desk_channels(2, 700 + seed).expect("desk channels");
        let ao = match run_ao(&ch, &req, &noise, &opts, seed) {
            Ok((p, _, _)) => p.total(),
            Err(e) => {
                fails.push(format!("seed {seed}: AO failed: {e}"));
                continue;
            }
        };
        let Some(best) = exhaustive_two_element(&ch, &req, &noise, 64, 32) else {
            fails.push(format!("seed {seed}: search found no feasible profile"));
            continue;
        };
        let ratio = ao / best.total;
        ratios.push(ratio);
        if ratio > 1.05 {
            fails.push(format!("seed {seed}: AO {:.3} dBm vs search {:.3} dBm", mw_to_dbm(ao), mw_to_dbm(best.total)));
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let summary = format!("{} instances, AO / search power ratio {lo:.4}..{hi:.4}", ratios.len());
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

/// Mean total (mW) per sweep point for one scheme, in sweep order.
fn means_by_point(jobs: &[(Scheme, RunPoint, u64)], outs: &[RunOutcome], scheme: Scheme) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, Vec<f64>)> = Vec::new();
    for ((s, p, _), o) in jobs.iter().zip(outs) {
        if *s != scheme {
            continue;
        }
        let v = p.sweep_value.expect("sweep point");
        match points.iter_mut().find(|(x, _)| *x == v) {
            Some((_, xs)) => xs.extend(o.total),
            None => points.push((v, o.total.into_iter().collect())),
        }
    }
    points.into_iter().map(|(v, xs)| (v, mean(&xs))).collect()
}

fn dbm_list(means: &[(f64, f64)]) -> String {
    let parts: Vec<String> = means.iter().map(|(_, m)| format!("{:.2}", mw_to_dbm(*m))).collect();
    parts.join(" ")
}

fn element_trend(cache: &RunCache) -> Outcome {
    let jobs = figure_jobs(3, &Scheme::ALL);
    let outs = cache.fetch(&jobs);
    let mut fails = failed_runs(&jobs, &outs);
    let mut parts = Vec::new();
    for s in Scheme::ALL {
        let means = means_by_point(&jobs, &outs, s);
        if means.windows(2).any(|w| w[1].1 >= w[0].1) {
            fails.push(format!("{s} mean not strictly decreasing in M"));
        }
        parts.push(format!("{s} [{}] dBm", dbm_list(&means)));
    }
    let mut nested = 0;
    let mut violations = Vec::new();
    for ((s, p, seed), o) in jobs.iter().zip(&outs) {
        if *s != Scheme::StarFd {
            continue;
        }
        let con = jobs
            .iter()
            .zip(&outs)
            .find(|((s2, p2, seed2), _)| *s2 == Scheme::ConFd && p2.sweep_value == p.sweep_value && seed2 == seed)
            .and_then(|(_, o2)| o2.total);
        if let (Some(star), Some(con)) = (o.total, con) {
            if star <= con * (1.0 + 1e-6) {
                nested += 1;
            } else {
                violations.push(format!("M = {} seed {seed}: star {star:e} > con {con:e}", p.sweep_value.unwrap()));
            }
        }
    }
    if !violations.is_empty() {
        fails.push(format!("{} per-seed nesting violations: {}", violations.len(), first_failures(&violations)));
    }
    let summary = format!("M = 8,12,16,20: {}; star <= con on {nested} pairs", parts.join(", "));
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

fn rate_trend(cache: &RunCache) -> Outcome {
    let jobs = figure_jobs(4, &Scheme::ALL);
    let outs = cache.fetch(&jobs);
    let mut fails = failed_runs(&jobs, &outs);
    let fd = means_by_point(&jobs, &outs, Scheme::StarFd);
    let hd = means_by_point(&jobs, &outs, Scheme::StarHd);
    let at = |m: &[(f64, f64)], r: f64| m.iter().find(|(v, _)| *v == r).map(|x| x.1).unwrap_or(f64::NAN);
    let (fd6, hd6) = (at(&fd, 6.0), at(&hd, 6.0));
    if !(fd6 <= hd6) {
        fails.push(format!("R_D = 6: star-fd {:.2} dBm above star-hd {:.2} dBm", mw_to_dbm(fd6), mw_to_dbm(hd6)));
    }
    let (fd1, hd1) = (at(&fd, 1.0), at(&hd, 1.0));
    let low = if fd1 <= hd1 { "FD below HD" } else { "HD below FD" };
    let crossover = fd
        .iter()
        .zip(&hd)
        .find(|((_, f), (_, h))| f <= h)
        .map_or("never".to_string(), |((v, _), _)| format!("R_D = {v}"));
    let summary = format!(
        "R_D = 6: fd {:.2} vs hd {:.2} dBm; R_D = 1: fd {:.2} vs hd {:.2} dBm ({low}); FD first at or below HD from {crossover}",
        mw_to_dbm(fd6),
        mw_to_dbm(hd6),
        mw_to_dbm(fd1),
        mw_to_dbm(hd1)
    );
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}

fn si_trend(cache: &RunCache) -> Outcome {
    let jobs = figure_jobs(5, &Scheme::ALL);
    let outs = cache.fetch(&jobs);
    let mut fails = failed_runs(&jobs, &outs);
    for seed in 0..SEEDS {
        let hd: Vec<(Option<u64>, Option<(u64, u64)>)> = jobs
            .iter()
            .zip(&outs)
            .filter(|((s, _, sd), _)| *s == Scheme::StarHd && *sd == seed)
            .map(|(_, o)| {
                (
                    o.total.map(f64::to_bits),
                    o.hd_slots.map(|(a, b)| (a.to_bits(), b.to_bits())),
                )
            })
            .collect();
        if hd.windows(2).any(|w| w[0] != w[1]) {
            fails.push(format!("star-hd seed {seed} changes with SI"));
        }
    }
    let mut parts = Vec::new();
    for s in [Scheme::StarFd, Scheme::ConFd] {
        let mut means = means_by_point(&jobs, &outs, s);
        // from weakest to strongest attenuation
        means.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let Some(w) = means.windows(2).find(|w| w[1].1 > w[0].1 * (1.0 + 1e-6)) {
            fails.push(format!("{s} mean rises from SI {} to {} dB", w[0].0, w[1].0));
        }
        parts.push(format!("{s} [{}] dBm", dbm_list(&means)));
    }
    let summary = format!("SI -80..-130 dB: {}; star-hd compared bitwise across SI", parts.join(", "));
    if fails.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; {}", first_failures(&fails)))
    }
}
