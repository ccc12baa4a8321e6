//! Experiment batches: configuration, parallel execution over sweep points and
//! seeds, and CSV output. Powers are linear mW until they are written.

mod config;
mod figures;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::ao::{run_ao, AoOptions, AoTrace};
use crate::benchmarks::{run_con_fd, run_star_hd};
use crate::channel::{generate_channels, ChannelSet};
use crate::error::{Error, Result};
use crate::system::{downlink_rate, uplink_rate, NoiseParams, PowerPair, StarProfile};

pub use config::{
    ChannelConfig, ExperimentConfig, RunPoint, Scheme, SchemeSet, Seeds, SolverConfig, Sweep, SweepParam,
};
pub use figures::{figure_config, FIGURE_IDS};

pub fn mw_to_dbm(p: f64) -> f64 {
    10.0 * p.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Ok,
    /// Stopped because no beamforming update kept the power from rising.
    Boundary,
    /// Hit the outer iteration cap.
    MaxIterations,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> String {
        match self {
            RunStatus::Ok => "ok".into(),
            RunStatus::Boundary => "boundary".into(),
            RunStatus::MaxIterations => "max-iterations".into(),
            RunStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, RunStatus::Failed(_))
    }
}

/// One converged (or failed) run. For `star-hd`, `p_u`/`p_d` are the
/// time-averaged contributions (half of each slot power) and the slot powers
/// themselves are in `hd_slot_*`.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub sweep_param: Option<SweepParam>,
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub p_u: Option<f64>,
    pub p_d: Option<f64>,
    pub total: Option<f64>,
    pub hd_slot_pu: Option<f64>,
    pub hd_slot_pd: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub r_u_achieved: Option<f64>,
    pub r_d_achieved: Option<f64>,
    pub status: RunStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub scheme: Scheme,
    pub sweep_param: Option<SweepParam>,
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub n: usize,
    pub total: f64,
    pub sca_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentResult {
    pub summary: Vec<SummaryRow>,
    pub trace: Vec<TraceRow>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.summary.iter().filter(|r| r.status.is_failure()).count()
    }
}

/// Runs every (sweep point, scheme, seed) combination; rows come out in that
/// nesting order regardless of how the batch was scheduled.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let points = cfg.points()?;
    let schemes = cfg.schemes();
    let seeds = cfg.seeds.to_vec();
    let opts = cfg.solver.ao_options();
    let param = cfg.sweep.as_ref().map(|s| s.param);
    let mut jobs: Vec<(&RunPoint, Scheme, u64)> = Vec::new();
    for p in &points {
        for &s in &schemes {
            jobs.extend(seeds.iter().map(|&seed| (p, s, seed)));
        }
    }
    let results: Vec<(SummaryRow, Vec<TraceRow>)> = jobs
        .par_iter()
        .map(|&(point, scheme, seed)| run_one(scheme, param, point, seed, &opts))
        .collect();
    let mut out = ExperimentResult::default();
    for (row, trace) in results {
        out.summary.push(row);
        out.trace.extend(trace);
    }
    Ok(out)
}

/// One scheme on one channel draw.
pub fn run_one(
    scheme: Scheme,
    sweep_param: Option<SweepParam>,
    point: &RunPoint,
    seed: u64,
    opts: &AoOptions,
) -> (SummaryRow, Vec<TraceRow>) {
    let mut row = SummaryRow {
        scheme,
        sweep_param,
        sweep_value: point.sweep_value,
        seed,
        p_u: None,
        p_d: None,
        total: None,
        hd_slot_pu: None,
        hd_slot_pd: None,
        iterations: 0,
        converged: false,
        r_u_achieved: None,
        r_d_achieved: None,
        status: RunStatus::Ok,
    };
    let trace_row = |n: usize, total: f64, sca_residual: f64| TraceRow {
        scheme,
        sweep_param,
        sweep_value: point.sweep_value,
        seed,
        n,
        total,
        sca_residual,
    };
    let ch = match generate_channels(&point.geometry, &point.channel, seed) {
        Ok(ch) => ch,
        Err(e) => {
            row.status = RunStatus::Failed(e.to_string());
            return (row, Vec::new());
        }
    };
    let fd = |res: Result<(PowerPair<f64>, StarProfile<f64>, AoTrace)>, mut row: SummaryRow| {
        match res.and_then(|(p, prof, tr)| fd_rates(&p, &prof, &ch, &point.noise).map(|r| (p, tr, r))) {
            Ok((p, tr, (r_u, r_d))) => {
                row.p_u = Some(p.p_u);
                row.p_d = Some(p.p_d);
                row.total = Some(p.total());
                row.iterations = tr.iterations;
                row.converged = tr.converged;
                row.r_u_achieved = Some(r_u);
                row.r_d_achieved = Some(r_d);
                row.status = if tr.boundary {
                    RunStatus::Boundary
                } else if tr.converged {
                    RunStatus::Ok
                } else {
                    RunStatus::MaxIterations
                };
                let trace = tr.records.iter().map(|r| trace_row(r.n, r.total_power, r.sca_residual)).collect();
                (row, trace)
            }
            Err(e) => {
                row.status = RunStatus::Failed(e.to_string());
                (row, Vec::new())
            }
        }
    };
    match scheme {
        Scheme::StarFd => fd(run_ao(&ch, &point.req, &point.noise, opts, seed), row),
        Scheme::ConFd => fd(run_con_fd(&ch, &point.req, &point.noise, opts, seed), row),
        Scheme::StarHd => match run_star_hd(&ch, &point.req, &point.noise) {
            Ok((slot, total)) => {
                let (r_u, r_d) = hd_rates(&slot, &ch, &point.noise);
                row.p_u = Some(0.5 * slot.p_u);
                row.p_d = Some(0.5 * slot.p_d);
                row.total = Some(total);
                row.hd_slot_pu = Some(slot.p_u);
                row.hd_slot_pd = Some(slot.p_d);
                row.iterations = 1;
                row.converged = true;
                row.r_u_achieved = Some(r_u);
                row.r_d_achieved = Some(r_d);
                (row, vec![trace_row(1, total, 0.0)])
            }
            Err(e) => {
                row.status = RunStatus::Failed(e.to_string());
                (row, Vec::new())
            }
        },
    }
}

fn fd_rates(
    p: &PowerPair<f64>,
    prof: &StarProfile<f64>,
    ch: &ChannelSet<f64>,
    noise: &NoiseParams<f64>,
) -> Result<(f64, f64)> {
    Ok((uplink_rate(p, prof, ch, noise)?, downlink_rate(p, prof, ch, noise)?))
}

/// Time-averaged rates of the two half slots with phase-aligned surfaces.
fn hd_rates(slot: &PowerPair<f64>, ch: &ChannelSet<f64>, noise: &NoiseParams<f64>) -> (f64, f64) {
    let aligned = |h: &[crate::scalar::Cx<f64>]| h.iter().map(|z| z.norm()).sum::<f64>().powi(2);
    (
        0.5 * (1.0 + slot.p_u * aligned(&ch.h1) / noise.sigma_u_sq).log2(),
        0.5 * (1.0 + slot.p_d * aligned(&ch.h2) / noise.sigma_d_sq).log2(),
    )
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_dbm(x: Option<f64>) -> String {
    x.map(|v| format_float(mw_to_dbm(v))).unwrap_or_default()
}

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn sweep_cells(param: Option<SweepParam>, value: Option<f64>) -> [String; 2] {
    [
        param.map(|p| p.name().to_string()).unwrap_or_else(|| "none".into()),
        value.map(|v| v.to_string()).unwrap_or_default(),
    ]
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "scheme",
    "sweep_param",
    "sweep_value",
    "seed",
    "p_u_dbm",
    "p_d_dbm",
    "total_dbm",
    "hd_slot_pu_dbm",
    "hd_slot_pd_dbm",
    "iterations",
    "converged",
    "r_u_achieved",
    "r_d_achieved",
    "status",
];

pub const TRACE_HEADER: [&str; 7] = ["scheme", "sweep_param", "sweep_value", "seed", "n", "total_dbm", "sca_residual"];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        let [sp, sv] = sweep_cells(r.sweep_param, r.sweep_value);
        w.write_record([
            r.scheme.name().to_string(),
            sp,
            sv,
            r.seed.to_string(),
            opt_dbm(r.p_u),
            opt_dbm(r.p_d),
            opt_dbm(r.total),
            opt_dbm(r.hd_slot_pu),
            opt_dbm(r.hd_slot_pd),
            r.iterations.to_string(),
            r.converged.to_string(),
            opt_float(r.r_u_achieved),
            opt_float(r.r_d_achieved),
            r.status.label(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in rows {
        let [sp, sv] = sweep_cells(r.sweep_param, r.sweep_value);
        w.write_record([
            r.scheme.name().to_string(),
            sp,
            sv,
            r.seed.to_string(),
            r.n.to_string(),
            format_float(mw_to_dbm(r.total)),
            format_float(r.sca_residual),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `summary.csv`, `trace.csv` and the resolved `config.json` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_summary_csv(&result.summary, std::fs::File::create(dir.join("summary.csv"))?)?;
    write_trace_csv(&result.trace, std::fs::File::create(dir.join("trace.csv"))?)?;
    std::fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests;
