//! Alternating optimization: closed-form powers, then passive beamforming at
//! those powers, until the total power stops decreasing.

use serde::Serialize;

use crate::beamforming::{
    oitm_candidate, relaxation_step, sca_solve_from, ScaOptions, ScaState, SurfaceLayout, OITM_MAX_ATTEMPTS,
    PROX_BACKTRACKS,
};
use crate::channel::ChannelSet;
use crate::error::{Error, Result, Stage};
use crate::power::solve_power;
use crate::system::{downlink_rate, uplink_rate, NoiseParams, PowerPair, RateRequirements, StarProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct AoOptions {
    /// Relative decrease of the total power below which the loop stops.
    pub eps2: f64,
    pub max_n: usize,
    pub sca: ScaOptions,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            eps2: 1e-4,
            max_n: 30,
            sca: ScaOptions::default(),
        }
    }
}

impl AoOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps2 > 0.0) || self.max_n == 0 {
            return Err(Error::InvalidParameter("AO options need eps2 > 0 and N >= 1".into()));
        }
        self.sca.validate()
    }
}

/// One outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AoRecord {
    pub n: usize,
    pub p_u: f64,
    pub p_d: f64,
    pub total_power: f64,
    /// Summed rank-one residual at the end of this iteration's SCA loop.
    pub sca_residual: f64,
    pub sca_iterations: usize,
    /// Rates achieved by this iteration's powers with the profile they were
    /// solved for.
    pub r_u: f64,
    pub r_d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AoTrace {
    pub records: Vec<AoRecord>,
    pub converged: bool,
    pub iterations: usize,
    /// Stopped because a beamforming update failed or would have raised the power;
    /// the previous profile was kept.
    pub boundary: bool,
    /// Index of the OITM draw that started the run.
    pub init_attempt: usize,
}

impl AoTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total_power).collect()
    }
}

/// Alternating optimization on a STAR surface from an OITM start.
///
/// The returned powers are re-solved at the returned profile, so their total is
/// at most the last recorded one.
pub fn run_ao(
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    opts: &AoOptions,
    seed: u64,
) -> Result<(PowerPair<f64>, StarProfile<f64>, AoTrace)> {
    run_ao_layout(SurfaceLayout::Star, ch, req, noise, opts, seed)
}

pub(crate) fn run_ao_layout(
    layout: SurfaceLayout,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    opts: &AoOptions,
    seed: u64,
) -> Result<(PowerPair<f64>, StarProfile<f64>, AoTrace)> {
    opts.validate()?;
    let sca_opts = ScaOptions {
        layout,
        ..opts.sca.clone()
    };
    let (mut prof, init_attempt) = initialize(layout, ch, req, noise, seed)?;

    let mut trace = AoTrace {
        records: Vec::new(),
        converged: false,
        iterations: 0,
        boundary: false,
        init_attempt,
    };
    let mut last_residual = 0.0;
    let mut prev_total: Option<f64> = None;
    for n in 1..=opts.max_n {
        trace.iterations = n;
        let p = solve_power(&prof, ch, req, noise).map_err(|e| e.at(Stage::PowerAllocation))?;
        let total = p.total();
        let (r_u, r_d) = (uplink_rate(&p, &prof, ch, noise)?, downlink_rate(&p, &prof, ch, noise)?);
        let record = |residual: f64, k: usize| -> Result<AoRecord> {
            Ok(AoRecord {
                n,
                p_u: p.p_u,
                p_d: p.p_d,
                total_power: total,
                sca_residual: residual,
                sca_iterations: k,
                r_u,
                r_d,
            })
        };
        if total == 0.0 {
            trace.records.push(record(last_residual, 0)?);
            trace.converged = true;
            break;
        }

        match beamform(&p, ch, req, noise, &prof, &sca_opts) {
            Err(e) if n == 1 => return Err(e.at(Stage::Beamforming)),
            Err(_) => {
                trace.records.push(record(last_residual, 0)?);
                trace.boundary = true;
                trace.converged = true;
                break;
            }
            Ok(None) => {
                trace.records.push(record(last_residual, 0)?);
                trace.boundary = true;
                trace.converged = true;
                break;
            }
            Ok(Some((cand, state))) => {
                prof = cand;
                last_residual = state.residual();
                trace.records.push(record(last_residual, state.k)?);
            }
        }

        if let Some(prev) = prev_total {
            if (prev - total) / prev <= opts.eps2 {
                trace.converged = true;
                break;
            }
        }
        prev_total = Some(total);
    }
    let p = solve_power(&prof, ch, req, noise).map_err(|e| e.at(Stage::PowerAllocation))?;
    Ok((p, prof, trace))
}

/// First OITM draw whose closed-form powers exist.
fn initialize(
    layout: SurfaceLayout,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    seed: u64,
) -> Result<(StarProfile<f64>, usize)> {
    for attempt in 0..OITM_MAX_ATTEMPTS {
        let cand = oitm_candidate(layout, ch, seed, attempt).map_err(|e| e.at(Stage::Initialization))?;
        if let Some(prof) = cand {
            if solve_power(&prof, ch, req, noise).is_ok() {
                return Ok((prof, attempt));
            }
        }
    }
    Err(Error::InitializationFailed {
        attempts: OITM_MAX_ATTEMPTS,
    }
    .at(Stage::Initialization))
}

/// Linearized-power step, then the SCA loop at the closed-form powers of the
/// relaxed iterates. Returns the first candidate whose closed-form power does not exceed `p`'s total, or
/// `None` when every proximal weight fails to.
fn beamform(
    p: &PowerPair<f64>,
    ch: &ChannelSet<f64>,
    req: &RateRequirements<f64>,
    noise: &NoiseParams<f64>,
    prof: &StarProfile<f64>,
    opts: &ScaOptions,
) -> Result<Option<(StarProfile<f64>, ScaState)>> {
    let mut o = opts.clone();
    for _ in 0..=PROX_BACKTRACKS {
        let (start, p_relaxed) = relaxation_step(ch, req, noise, prof, &o)?;
        let (cand, state) = sca_solve_from(&p_relaxed, ch, req, noise, start, &o, None)?;
        if solve_power(&cand, ch, req, noise).is_ok_and(|pc| pc.total() <= p.total()) {
            return Ok(Some((cand, state)));
        }
        o.relax_prox *= 10.0;
    }
    Ok(None)
}
