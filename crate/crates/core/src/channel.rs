//! Channel generation: log-distance path loss, Rician fading with a
//! uniform-linear-array line-of-sight component, and the composite vectors the
//! optimizers work with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::{unit_phase, Cx, Real};

/// Sub-seed offsets per channel. Each channel draws from its own stream so that
/// changing the element count leaves the other channels' randomness in place.
pub mod seed_offsets {
    pub const UL_TO_RIS: u64 = 1 << 32;
    pub const RIS_TO_BS: u64 = 2 << 32;
    pub const BS_TO_RIS: u64 = 3 << 32;
    pub const RIS_TO_DL: u64 = 4 << 32;
    pub const SELF_INTERFERENCE: u64 = 5 << 32;
}

/// Node positions in meters; the RIS elements lie along the y-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub bs: [f64; 2],
    pub ris: [f64; 2],
    pub ul_user: [f64; 2],
    pub dl_user: [f64; 2],
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            bs: [5.0, 45.0],
            ris: [0.0, 50.0],
            ul_user: [0.0, 35.0],
            dl_user: [0.0, 100.0],
        }
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let pts = [
            ("bs", self.bs),
            ("ris", self.ris),
            ("ul_user", self.ul_user),
            ("dl_user", self.dl_user),
        ];
        for (i, (na, a)) in pts.iter().enumerate() {
            if !(a[0].is_finite() && a[1].is_finite()) {
                return Err(Error::InvalidParameter(format!("{na} position is not finite")));
            }
            for (nb, b) in &pts[i + 1..] {
                if distance(*a, *b) <= 0.0 {
                    return Err(Error::InvalidParameter(format!("{na} and {nb} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn ris_to_ul(&self) -> f64 {
        distance(self.ris, self.ul_user)
    }

    pub fn ris_to_dl(&self) -> f64 {
        distance(self.ris, self.dl_user)
    }

    pub fn ris_to_bs(&self) -> f64 {
        distance(self.ris, self.bs)
    }

    /// Angle off the array broadside (the x-axis) towards `p`, seen from the RIS.
    pub fn departure_angle(&self, p: [f64; 2]) -> f64 {
        (p[1] - self.ris[1]).atan2(p[0] - self.ris[0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub pl0_db: f64,
    pub d0: f64,
    pub exponent: f64,
    pub rician_k_db: f64,
    pub rician_k_si_db: f64,
    pub si_pathloss_db: f64,
    pub num_elements: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            pl0_db: -30.0,
            d0: 1.0,
            exponent: 2.2,
            rician_k_db: 3.0,
            rician_k_si_db: 5.0,
            si_pathloss_db: -100.0,
            num_elements: 16,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0) {
            return Err(Error::InvalidParameter("d0 must be positive".into()));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::InvalidParameter("path-loss exponent must be positive".into()));
        }
        if self.num_elements == 0 {
            return Err(Error::InvalidParameter("num_elements must be at least 1".into()));
        }
        if !(self.si_pathloss_db <= 0.0) {
            return Err(Error::InvalidParameter("si_pathloss_db must be <= 0".into()));
        }
        Ok(())
    }
}

/// All link channels plus the composites `h1, h2, h3` and their outer products.
///
/// `h_ib` and `h_id` are stored unconjugated; the composites apply the conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet<T: Real> {
    pub h_ui: Vec<Cx<T>>,
    pub h_ib: Vec<Cx<T>>,
    pub h_bi: Vec<Cx<T>>,
    pub h_id: Vec<Cx<T>>,
    pub h_bb: Cx<T>,
    /// UL user -> RIS (reflect) -> BS.
    pub h1: Vec<Cx<T>>,
    /// BS -> RIS (transmit) -> DL user.
    pub h2: Vec<Cx<T>>,
    /// UL user -> RIS (transmit) -> DL user, the cross-link interference.
    pub h3: Vec<Cx<T>>,
    pub big_h1: HermitianMatrix<T>,
    pub big_h2: HermitianMatrix<T>,
    pub big_h3: HermitianMatrix<T>,
}

impl<T: Real> ChannelSet<T> {
    /// Assembles a set from the raw link channels and derives the composites.
    pub fn from_links(
        h_ui: Vec<Cx<T>>,
        h_ib: Vec<Cx<T>>,
        h_bi: Vec<Cx<T>>,
        h_id: Vec<Cx<T>>,
        h_bb: Cx<T>,
    ) -> Result<Self> {
        let m = h_ui.len();
        for v in [&h_ib, &h_bi, &h_id] {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    actual: v.len(),
                });
            }
        }
        if m == 0 {
            return Err(Error::InvalidParameter("channels must have at least one element".into()));
        }
        let compose = |a: &[Cx<T>], b: &[Cx<T>]| -> Vec<Cx<T>> {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).collect()
        };
        let h1 = compose(&h_ib, &h_ui);
        let h2 = compose(&h_id, &h_bi);
        let h3 = compose(&h_id, &h_ui);
        Ok(Self {
            big_h1: HermitianMatrix::outer(&h1),
            big_h2: HermitianMatrix::outer(&h2),
            big_h3: HermitianMatrix::outer(&h3),
            h_ui,
            h_ib,
            h_bi,
            h_id,
            h_bb,
            h1,
            h2,
            h3,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.h_ui.len()
    }

    /// Residual self-interference power gain `|h_bb|^2`.
    pub fn si_gain(&self) -> T {
        self.h_bb.norm_sqr()
    }

    /// Same links with the self-interference channel replaced.
    pub fn with_si(&self, h_bb: Cx<T>) -> Self {
        Self {
            h_bb,
            ..self.clone()
        }
    }
}

/// Linear power gain `10^(PL0/10) * (d/d0)^(-exponent)`.
pub fn path_loss_linear(d: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {d}")));
    }
    Ok(db_to_linear(params.pl0_db) * (d / params.d0).powf(-params.exponent))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Half-wavelength ULA response: entry `m` is `exp(j*pi*m*sin(angle))`.
pub fn steering_vector(m: usize, angle: f64) -> Vec<Cx<f64>> {
    let s = angle.sin();
    (0..m)
        .map(|k| unit_phase(std::f64::consts::PI * k as f64 * s))
        .collect()
}

fn complex_gaussian(rng: &mut impl Rng) -> Cx<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * w`, `w` i.i.d. CN(0, 1).
pub fn rician_vector(k_db: f64, los: &[Cx<f64>], rng: &mut impl Rng) -> Vec<Cx<f64>> {
    let k = db_to_linear(k_db);
    let a_los = (k / (k + 1.0)).sqrt();
    let a_nlos = (1.0 / (k + 1.0)).sqrt();
    los.iter()
        .map(|l| l * a_los + complex_gaussian(rng) * a_nlos)
        .collect()
}

fn stream(seed: u64, offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset))
}

/// Draws every channel for one realization; deterministic in `seed`.
pub fn generate_channels(geom: &Geometry, params: &ChannelParams, seed: u64) -> Result<ChannelSet<f64>> {
    geom.validate()?;
    params.validate()?;
    let m = params.num_elements;
    let link = |d: f64, angle: f64, offset: u64| -> Result<Vec<Cx<f64>>> {
        let amp = path_loss_linear(d, params)?.sqrt();
        let los = steering_vector(m, angle);
        let mut rng = stream(seed, offset);
        Ok(rician_vector(params.rician_k_db, &los, &mut rng)
            .into_iter()
            .map(|h| h * amp)
            .collect())
    };
    let ul_angle = geom.departure_angle(geom.ul_user);
    let dl_angle = geom.departure_angle(geom.dl_user);
    let bs_angle = geom.departure_angle(geom.bs);

    let h_ui = link(geom.ris_to_ul(), ul_angle, seed_offsets::UL_TO_RIS)?;
    let h_ib = link(geom.ris_to_bs(), bs_angle, seed_offsets::RIS_TO_BS)?;
    let h_bi = link(geom.ris_to_bs(), bs_angle, seed_offsets::BS_TO_RIS)?;
    let h_id = link(geom.ris_to_dl(), dl_angle, seed_offsets::RIS_TO_DL)?;

    let mut rng = stream(seed, seed_offsets::SELF_INTERFERENCE);
    let si = rician_vector(params.rician_k_si_db, &[Cx::new(1.0, 0.0)], &mut rng)[0];
    let h_bb = si * db_to_linear(params.si_pathloss_db).sqrt();

    ChannelSet::from_links(h_ui, h_ib, h_bi, h_id, h_bb)
}
