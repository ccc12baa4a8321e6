use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ao::AoOptions;
use crate::beamforming::ScaOptions;
use crate::channel::{ChannelParams, Geometry};
use crate::error::{Error, Result};
use crate::system::{NoiseParams, RateRequirements};

use super::dbm_to_mw;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "star-fd")]
    StarFd,
    #[serde(rename = "star-hd")]
    StarHd,
    #[serde(rename = "con-fd")]
    ConFd,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::StarFd, Scheme::StarHd, Scheme::ConFd];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::StarFd => "star-fd",
            Scheme::StarHd => "star-hd",
            Scheme::ConFd => "con-fd",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One scheme or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSet {
    One(Scheme),
    Many(Vec<Scheme>),
}

impl SchemeSet {
    pub fn to_vec(&self) -> Vec<Scheme> {
        match self {
            SchemeSet::One(s) => vec![*s],
            SchemeSet::Many(v) => v.clone(),
        }
    }
}

/// Seed count `n` (meaning `0..n`) or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "M")]
    NumElements,
    #[serde(rename = "r_d_th")]
    RdTh,
    #[serde(rename = "si_pathloss_db")]
    SiPathlossDb,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::NumElements => "M",
            SweepParam::RdTh => "r_d_th",
            SweepParam::SiPathlossDb => "si_pathloss_db",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Channel model parameters without the element count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub pl0_db: f64,
    pub d0: f64,
    pub exponent: f64,
    pub rician_k_db: f64,
    pub rician_k_si_db: f64,
    pub si_pathloss_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let p = ChannelParams::default();
        Self {
            pl0_db: p.pl0_db,
            d0: p.d0,
            exponent: p.exponent,
            rician_k_db: p.rician_k_db,
            rician_k_si_db: p.rician_k_si_db,
            si_pathloss_db: p.si_pathloss_db,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub rho: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub max_k: usize,
    pub max_n: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let ao = AoOptions::default();
        Self {
            rho: ao.sca.rho,
            eps1: ao.sca.eps1,
            eps2: ao.eps2,
            max_k: ao.sca.max_k,
            max_n: ao.max_n,
        }
    }
}

impl SolverConfig {
    pub fn ao_options(&self) -> AoOptions {
        AoOptions {
            eps2: self.eps2,
            max_n: self.max_n,
            sca: ScaOptions {
                eps1: self.eps1,
                max_k: self.max_k,
                rho: self.rho,
                ..ScaOptions::default()
            },
        }
    }
}

fn default_noise_dbm() -> f64 {
    -80.0
}

/// A batch of runs: every scheme at every sweep point for every seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeSet,
    #[serde(rename = "M")]
    pub num_elements: usize,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub channel: ChannelConfig,
    pub r_u_th: f64,
    pub r_d_th: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_u_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_d_dbm: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub seeds: Seeds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

/// Everything one run needs, with the sweep value applied.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPoint {
    pub sweep_value: Option<f64>,
    pub geometry: Geometry,
    pub channel: ChannelParams,
    pub req: RateRequirements<f64>,
    pub noise: NoiseParams<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        self.scheme.to_vec()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schemes().is_empty() {
            return bad("no scheme given".into());
        }
        if self.seeds.to_vec().is_empty() {
            return bad("no seeds given".into());
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad(format!("sweep over {} has no values", s.param.name()));
            }
        }
        self.solver
            .ao_options()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        for p in self.points()? {
            p.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
            p.channel.validate().map_err(|e| Error::Config(e.to_string()))?;
            if self.schemes().contains(&Scheme::ConFd) && p.channel.num_elements % 2 != 0 {
                return bad(format!("con-fd needs an even M, got {}", p.channel.num_elements));
            }
        }
        Ok(())
    }

    /// Sweep points in configured order (a single point without a sweep).
    pub fn points(&self) -> Result<Vec<RunPoint>> {
        let conf = |e: Error| Error::Config(e.to_string());
        let base = ChannelParams {
            pl0_db: self.channel.pl0_db,
            d0: self.channel.d0,
            exponent: self.channel.exponent,
            rician_k_db: self.channel.rician_k_db,
            rician_k_si_db: self.channel.rician_k_si_db,
            si_pathloss_db: self.channel.si_pathloss_db,
            num_elements: self.num_elements,
        };
        let noise = NoiseParams::new(dbm_to_mw(self.noise_u_dbm), dbm_to_mw(self.noise_d_dbm)).map_err(conf)?;
        let point = |value: Option<f64>, channel: ChannelParams, r_d: f64| -> Result<RunPoint> {
            Ok(RunPoint {
                sweep_value: value,
                geometry: self.geometry,
                channel,
                req: RateRequirements::new(self.r_u_th, r_d).map_err(conf)?,
                noise,
            })
        };
        let Some(sweep) = &self.sweep else {
            return Ok(vec![point(None, base, self.r_d_th)?]);
        };
        sweep
            .values
            .iter()
            .map(|&v| match sweep.param {
                SweepParam::NumElements => {
                    if !(v >= 1.0 && v.fract() == 0.0) {
                        return Err(Error::Config(format!("M must be a positive integer, got {v}")));
                    }
                    point(
                        Some(v),
                        ChannelParams {
                            num_elements: v as usize,
                            ..base
                        },
                        self.r_d_th,
                    )
                }
                SweepParam::RdTh => point(Some(v), base, v),
                SweepParam::SiPathlossDb => point(
                    Some(v),
                    ChannelParams {
                        si_pathloss_db: v,
                        ..base
                    },
                    self.r_d_th,
                ),
            })
            .collect()
    }
}
