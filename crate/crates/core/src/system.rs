//! STAR-RIS coefficients and the uplink/downlink achievable-rate model.
//!
//! Link gains use the trace-consistent convention `|h^H q|^2 = Tr(q q^H h h^H)`
//! throughout, so the rate evaluator, the closed-form power solver and the
//! semidefinite subproblem all agree on the same numbers.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::{dot_h, Cx, Real};

/// Tolerance on `|q_t[m]|^2 + |q_r[m]|^2 = 1`.
pub const ENERGY_TOL: f64 = 1e-6;

/// Per-element transmission and reflection coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct StarProfile<T: Real> {
    q_t: Vec<Cx<T>>,
    q_r: Vec<Cx<T>>,
}

impl<T: Real> StarProfile<T> {
    /// Checks energy conservation per element.
    pub fn new(q_t: Vec<Cx<T>>, q_r: Vec<Cx<T>>) -> Result<Self> {
        if q_t.len() != q_r.len() {
            return Err(Error::DimensionMismatch {
                expected: q_t.len(),
                actual: q_r.len(),
            });
        }
        if q_t.is_empty() {
            return Err(Error::InvalidParameter("profile needs at least one element".into()));
        }
        let tol = T::lit(ENERGY_TOL);
        for (m, (t, r)) in q_t.iter().zip(&q_r).enumerate() {
            let e = t.norm_sqr() + r.norm_sqr();
            if !((e - T::one()).abs() <= tol) {
                return Err(Error::InvalidParameter(format!(
                    "element {m} violates energy conservation: |q_t|^2 + |q_r|^2 = {e}"
                )));
            }
        }
        Ok(Self { q_t, q_r })
    }

    /// Rescales each element pair onto `|q_t|^2 + |q_r|^2 = 1`.
    ///
    /// Elements with no energy at all are split evenly with zero phase.
    pub fn normalized(mut q_t: Vec<Cx<T>>, mut q_r: Vec<Cx<T>>) -> Result<Self> {
        if q_t.len() != q_r.len() {
            return Err(Error::DimensionMismatch {
                expected: q_t.len(),
                actual: q_r.len(),
            });
        }
        for (t, r) in q_t.iter_mut().zip(q_r.iter_mut()) {
            let e = (t.norm_sqr() + r.norm_sqr()).sqrt();
            if e > T::zero() {
                *t /= e;
                *r /= e;
            } else {
                let h = T::lit(0.5).sqrt();
                *t = Cx::new(h, T::zero());
                *r = Cx::new(h, T::zero());
            }
        }
        Self::new(q_t, q_r)
    }

    pub fn len(&self) -> usize {
        self.q_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_t.is_empty()
    }

    pub fn q_t(&self) -> &[Cx<T>] {
        &self.q_t
    }

    pub fn q_r(&self) -> &[Cx<T>] {
        &self.q_r
    }

    /// Transmission amplitudes squared, `beta_t`.
    pub fn beta_t(&self) -> Vec<T> {
        self.q_t.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn beta_r(&self) -> Vec<T> {
        self.q_r.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `(q_t q_t^H, q_r q_r^H)`.
    pub fn outer_products(&self) -> (HermitianMatrix<T>, HermitianMatrix<T>) {
        (HermitianMatrix::outer(&self.q_t), HermitianMatrix::outer(&self.q_r))
    }

    /// Multiplies both vectors by independent global phases.
    pub fn rotated(&self, theta_t: T, theta_r: T) -> Self {
        let pt = crate::scalar::unit_phase(theta_t);
        let pr = crate::scalar::unit_phase(theta_r);
        Self {
            q_t: self.q_t.iter().map(|z| z * pt).collect(),
            q_r: self.q_r.iter().map(|z| z * pr).collect(),
        }
    }
}

/// Minimum rates in bps/Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRequirements<T: Real> {
    pub r_u_th: T,
    pub r_d_th: T,
}

impl<T: Real> RateRequirements<T> {
    pub fn new(r_u_th: T, r_d_th: T) -> Result<Self> {
        if !(r_u_th >= T::zero() && r_d_th >= T::zero()) {
            return Err(Error::InvalidParameter("rate thresholds must be nonnegative".into()));
        }
        Ok(Self { r_u_th, r_d_th })
    }

    /// `(2^r_u - 1, 2^r_d - 1)`.
    pub fn sinr_targets(&self) -> (T, T) {
        (
            rate_threshold_linear(self.r_u_th),
            rate_threshold_linear(self.r_d_th),
        )
    }
}

/// Receiver noise powers in linear milliwatts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams<T: Real> {
    pub sigma_u_sq: T,
    pub sigma_d_sq: T,
}

impl<T: Real> NoiseParams<T> {
    pub fn new(sigma_u_sq: T, sigma_d_sq: T) -> Result<Self> {
        if !(sigma_u_sq > T::zero() && sigma_d_sq > T::zero()) {
            return Err(Error::InvalidParameter("noise powers must be positive".into()));
        }
        Ok(Self {
            sigma_u_sq,
            sigma_d_sq,
        })
    }
}

/// UL/DL transmit powers in linear milliwatts.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PowerPair<T: Real> {
    pub p_u: T,
    pub p_d: T,
}

impl<T: Real> PowerPair<T> {
    pub fn new(p_u: T, p_d: T) -> Result<Self> {
        let ok = |p: T| p >= T::zero() && p.is_finite();
        if !(ok(p_u) && ok(p_d)) {
            return Err(Error::InvalidParameter(format!(
                "powers must be finite and nonnegative (p_u = {p_u}, p_d = {p_d})"
            )));
        }
        Ok(Self { p_u, p_d })
    }

    pub fn total(&self) -> T {
        self.p_u + self.p_d
    }
}

/// `|h^H q|^2`.
pub fn link_gain<T: Real>(h: &[Cx<T>], q: &[Cx<T>]) -> Result<T> {
    if h.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            actual: q.len(),
        });
    }
    Ok(dot_h(h, q).norm_sqr())
}

/// The three gains `(G1, G2, G3)` entering the rate and power formulas.
pub fn link_gains<T: Real>(prof: &StarProfile<T>, ch: &ChannelSet<T>) -> Result<(T, T, T)> {
    Ok((
        link_gain(&ch.h1, prof.q_r())?,
        link_gain(&ch.h2, prof.q_t())?,
        link_gain(&ch.h3, prof.q_t())?,
    ))
}

/// Uplink rate at the BS: `log2(1 + p_u G1 / (p_d |h_bb|^2 + sigma_u^2))`.
pub fn uplink_rate<T: Real>(
    p: &PowerPair<T>,
    prof: &StarProfile<T>,
    ch: &ChannelSet<T>,
    noise: &NoiseParams<T>,
) -> Result<T> {
    let g1 = link_gain(&ch.h1, prof.q_r())?;
    let sinr = p.p_u * g1 / (p.p_d * ch.si_gain() + noise.sigma_u_sq);
    Ok(sinr.ln_1p() / T::LN_2())
}

/// Downlink rate with the UL user's signal leaking through the transmission side.
pub fn downlink_rate<T: Real>(
    p: &PowerPair<T>,
    prof: &StarProfile<T>,
    ch: &ChannelSet<T>,
    noise: &NoiseParams<T>,
) -> Result<T> {
    let g2 = link_gain(&ch.h2, prof.q_t())?;
    let g3 = link_gain(&ch.h3, prof.q_t())?;
    let sinr = p.p_d * g2 / (p.p_u * g3 + noise.sigma_d_sq);
    Ok(sinr.ln_1p() / T::LN_2())
}

/// SINR target `2^r - 1` for a rate `r` in bps/Hz.
pub fn rate_threshold_linear<T: Real>(r_th: T) -> T {
    (r_th * T::LN_2()).exp_m1()
}
