use crate::error::{Error, Result};

use super::{ChannelConfig, ExperimentConfig, Scheme, SchemeSet, Seeds, SolverConfig, Sweep, SweepParam};

pub const FIGURE_IDS: [u32; 4] = [2, 3, 4, 5];

/// Built-in desk-scale batch for figure `id`: M = 16 instead of 40, all three
/// schemes, R_U = 1 bps/Hz, -80 dBm noise, default geometry and channel model.
///
/// - 2: convergence traces at R_D = 4, SI -100 dB
/// - 3: M in {8, 12, 16, 20} at R_D = 4, SI -100 dB
/// - 4: R_D in {1, ..., 6} at SI -100 dB
/// - 5: SI path loss in {-130, ..., -80} dB at R_D = 4
pub fn figure_config(id: u32, seeds: u64) -> Result<ExperimentConfig> {
    let sweep = match id {
        2 => None,
        3 => Some(Sweep {
            param: SweepParam::NumElements,
            values: vec![8.0, 12.0, 16.0, 20.0],
        }),
        4 => Some(Sweep {
            param: SweepParam::RdTh,
            values: (1..=6).map(f64::from).collect(),
        }),
        5 => Some(Sweep {
            param: SweepParam::SiPathlossDb,
            values: vec![-130.0, -120.0, -110.0, -100.0, -90.0, -80.0],
        }),
        _ => return Err(Error::Config(format!("unknown figure id {id}; expected one of {FIGURE_IDS:?}"))),
    };
    Ok(ExperimentConfig {
        scheme: SchemeSet::Many(Scheme::ALL.to_vec()),
        num_elements: 16,
        geometry: Default::default(),
        channel: ChannelConfig {
            si_pathloss_db: -100.0,
            ..ChannelConfig::default()
        },
        r_u_th: 1.0,
        r_d_th: 4.0,
        noise_u_dbm: -80.0,
        noise_d_dbm: -80.0,
        solver: SolverConfig::default(),
        seeds: Seeds::Count(seeds),
        sweep,
    })
}
