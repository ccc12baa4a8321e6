//! Desk-scale runs shared between criteria. The figure batches overlap (the
//! M = 16, R_D = 4, SI -100 dB point appears in all of them), so every run is
//! computed once per suite.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use starfd::ao::{run_ao, AoOptions, AoTrace};
use starfd::benchmarks::{run_con_fd, run_star_hd};
use starfd::channel::generate_channels;
use starfd::experiment::{RunPoint, Scheme};
use starfd::system::{PowerPair, StarProfile};

use crate::oracle::Link;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RunKey {
    pub scheme: Scheme,
    pub m: usize,
    pub r_d_bits: u64,
    pub si_bits: u64,
    pub seed: u64,
}

impl RunKey {
    pub fn new(scheme: Scheme, point: &RunPoint, seed: u64) -> Self {
        Self {
            scheme,
            m: point.channel.num_elements,
            r_d_bits: point.req.r_d_th.to_bits(),
            si_bits: point.channel.si_pathloss_db.to_bits(),
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    /// Total transmit power in mW; time-averaged for the half-duplex scheme.
    pub total: Option<f64>,
    pub hd_slots: Option<(f64, f64)>,
    /// Per-iteration totals in mW.
    pub trace: Vec<f64>,
    pub last_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Oracle-evaluated rate minus threshold for each link at the returned
    /// profile and powers.
    pub rate_gap: Option<(f64, f64)>,
    pub error: Option<String>,
}

type FdResult = starfd::Result<(PowerPair<f64>, StarProfile<f64>, AoTrace)>;

fn run(scheme: Scheme, point: &RunPoint, seed: u64, opts: &AoOptions) -> RunOutcome {
    let ch = match generate_channels(&point.geometry, &point.channel, seed) {
        Ok(ch) => ch,
        Err(e) => {
            return RunOutcome {
                error: Some(e.to_string()),
                ..Default::default()
            }
        }
    };
    let fd = |res: FdResult| match res {
        Ok((p, prof, tr)) => {
            let q_t: Vec<Complex64> = prof.q_t().to_vec();
            let q_r: Vec<Complex64> = prof.q_r().to_vec();
            let (r_u, r_d) = Link::new(&ch, &q_t, &q_r, &point.noise).rates(p.p_u, p.p_d);
            RunOutcome {
                total: Some(p.total()),
                hd_slots: None,
                trace: tr.totals(),
                last_residual: tr.records.last().map_or(0.0, |r| r.sca_residual),
                converged: tr.converged,
                iterations: tr.iterations,
                rate_gap: Some((r_u - point.req.r_u_th, r_d - point.req.r_d_th)),
                error: None,
            }
        }
        Err(e) => RunOutcome {
            error: Some(e.to_string()),
            ..Default::default()
        },
    };
    match scheme {
        Scheme::StarFd => fd(run_ao(&ch, &point.req, &point.noise, opts, seed)),
        Scheme::ConFd => fd(run_con_fd(&ch, &point.req, &point.noise, opts, seed)),
        Scheme::StarHd => match run_star_hd(&ch, &point.req, &point.noise) {
            Ok((slot, total)) => RunOutcome {
                total: Some(total),
                hd_slots: Some((slot.p_u, slot.p_d)),
                trace: vec![total],
                converged: true,
                iterations: 1,
                ..Default::default()
            },
            Err(e) => RunOutcome {
                error: Some(e.to_string()),
                ..Default::default()
            },
        },
    }
}

#[derive(Default)]
pub struct RunCache {
    runs: Mutex<HashMap<RunKey, RunOutcome>>,
    opts: AoOptions,
}

impl RunCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Outcomes for `jobs` in order, running whatever is not cached yet.
    pub fn fetch(&self, jobs: &[(Scheme, RunPoint, u64)]) -> Vec<RunOutcome> {
        let missing: Vec<&(Scheme, RunPoint, u64)> = {
            let runs = self.runs.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            jobs.iter()
                .filter(|(s, p, seed)| {
                    let k = RunKey::new(*s, p, *seed);
                    !runs.contains_key(&k) && seen.insert(k)
                })
                .collect()
        };
        let fresh: Vec<(RunKey, RunOutcome)> = missing
            .par_iter()
            .map(|(s, p, seed)| (RunKey::new(*s, p, *seed), run(*s, p, *seed, &self.opts)))
            .collect();
        let mut runs = self.runs.lock().unwrap();
        runs.extend(fresh);
        jobs.iter()
            .map(|(s, p, seed)| runs[&RunKey::new(*s, p, *seed)].clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.runs.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
