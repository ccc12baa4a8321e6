//! Closed-form optimal power allocation for fixed STAR-RIS coefficients.
//!
//! At the optimum both rate constraints are active. Solving the two active
//! constraints gives the DL power first, then the UL power:
//!
//! ```text
//! p_d = R_d (R_u s_u G3 + G1 s_d) / (G2 G1 - R_d R_u |h_bb|^2 G3)
//! p_u = R_u (p_d |h_bb|^2 + s_u) / G1
//! ```
//!
//! with `R = 2^r - 1` the SINR targets and `G1 = |h1^H q_r|^2`,
//! `G2 = |h2^H q_t|^2`, `G3 = |h3^H q_t|^2`.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::system::{link_gains, NoiseParams, PowerPair, RateRequirements, StarProfile};
use crate::scalar::Real;

/// The gains the closed form depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGains<T: Real> {
    pub g1: T,
    pub g2: T,
    pub g3: T,
    pub si: T,
}

impl<T: Real> LinkGains<T> {
    pub fn of(prof: &StarProfile<T>, ch: &ChannelSet<T>) -> Result<Self> {
        let (g1, g2, g3) = link_gains(prof, ch)?;
        Ok(Self {
            g1,
            g2,
            g3,
            si: ch.si_gain(),
        })
    }
}

/// Minimum-total-power allocation meeting both rate thresholds with equality.
pub fn solve_power<T: Real>(
    prof: &StarProfile<T>,
    ch: &ChannelSet<T>,
    req: &RateRequirements<T>,
    noise: &NoiseParams<T>,
) -> Result<PowerPair<T>> {
    solve_power_from_gains(&LinkGains::of(prof, ch)?, req, noise)
}

pub fn solve_power_from_gains<T: Real>(
    g: &LinkGains<T>,
    req: &RateRequirements<T>,
    noise: &NoiseParams<T>,
) -> Result<PowerPair<T>> {
    let (ru, rd) = req.sinr_targets();
    let zero = T::zero();
    if ru == zero && rd == zero {
        return Ok(PowerPair::default());
    }
    if rd == zero {
        if g.g1 <= zero {
            return Err(Error::InfeasibleLink("uplink"));
        }
        return PowerPair::new(ru * noise.sigma_u_sq / g.g1, zero);
    }
    if g.g2 <= zero {
        return Err(Error::InfeasibleLink("downlink"));
    }
    if ru == zero {
        return PowerPair::new(zero, rd * noise.sigma_d_sq / g.g2);
    }
    if g.g1 <= zero {
        return Err(Error::InfeasibleLink("uplink"));
    }
    let denom = g.g2 * g.g1 - rd * ru * g.si * g.g3;
    if !(denom > zero) {
        return Err(Error::InfeasibleInterference {
            denominator: denom.as_f64(),
        });
    }
    let p_d = rd * (ru * noise.sigma_u_sq * g.g3 + g.g1 * noise.sigma_d_sq) / denom;
    let p_u = ru * (p_d * g.si + noise.sigma_u_sq) / g.g1;
    PowerPair::new(p_u, p_d)
}

/// Partial derivatives of the closed-form total power with respect to
/// `(G1, G2, G3)` at a feasible point with both thresholds positive.
pub fn total_power_gradient<T: Real>(
    g: &LinkGains<T>,
    req: &RateRequirements<T>,
    noise: &NoiseParams<T>,
) -> Result<[T; 3]> {
    let (ru, rd) = req.sinr_targets();
    let p = solve_power_from_gains(g, req, noise)?;
    let zero = T::zero();
    if rd == zero {
        return Ok([-p.p_u / g.g1, zero, zero]);
    }
    if ru == zero {
        return Ok([zero, -p.p_d / g.g2, zero]);
    }
    let (su, sd) = (noise.sigma_u_sq, noise.sigma_d_sq);
    let num = rd * (ru * su * g.g3 + g.g1 * sd);
    let den = g.g2 * g.g1 - rd * ru * g.si * g.g3;
    let den2 = den * den;
    let dpd = [
        (rd * sd * den - num * g.g2) / den2,
        -num * g.g1 / den2,
        (rd * ru * su * den + num * rd * ru * g.si) / den2,
    ];
    let k = ru * g.si / g.g1;
    let dpu = [
        k * dpd[0] - p.p_u / g.g1,
        k * dpd[1],
        k * dpd[2],
    ];
    Ok([dpu[0] + dpd[0], dpu[1] + dpd[1], dpu[2] + dpd[2]])
}

/// Outcome of [`check_power_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub diagnostic: String,
}

/// Whether [`solve_power`] yields finite powers, strictly positive for every
/// positive threshold (zero thresholds legitimately give zero power).
pub fn check_power_feasible<T: Real>(
    prof: &StarProfile<T>,
    ch: &ChannelSet<T>,
    req: &RateRequirements<T>,
    noise: &NoiseParams<T>,
) -> Feasibility {
    match solve_power(prof, ch, req, noise) {
        Ok(p) => {
            let positive = |th: T, v: T| th == T::zero() || v > T::zero();
            if positive(req.r_u_th, p.p_u) && positive(req.r_d_th, p.p_d) {
                Feasibility {
                    feasible: true,
                    diagnostic: format!("p_u = {:e} mW, p_d = {:e} mW", p.p_u.as_f64(), p.p_d.as_f64()),
                }
            } else {
                Feasibility {
                    feasible: false,
                    diagnostic: "closed form returned a zero power for a positive threshold".into(),
                }
            }
        }
        Err(e) => Feasibility {
            feasible: false,
            diagnostic: e.to_string(),
        },
    }
}
