//! Deliberately broken variants of solver pieces. The suite must reject each
//! of them; they exist only to show the checks have teeth.

use num_complex::Complex64;
use starfd::channel::ChannelSet;
use starfd::power::LinkGains;
use starfd::system::PowerPair;

use crate::checks::PowerInstance;
use crate::oracle::sinr_target;

/// Closed form with the interference term of the downlink denominator added
/// instead of subtracted.
pub fn flipped_denominator(inst: &PowerInstance) -> starfd::Result<PowerPair<f64>> {
    let g = LinkGains::of(&inst.prof, &inst.ch)?;
    let (ru, rd) = (sinr_target(inst.req.r_u_th), sinr_target(inst.req.r_d_th));
    let (su, sd) = (inst.noise.sigma_u_sq, inst.noise.sigma_d_sq);
    let denom = g.g2 * g.g1 + rd * ru * g.si * g.g3;
    let p_d = rd * (ru * su * g.g3 + g.g1 * sd) / denom;
    let p_u = ru * (p_d * g.si + su) / g.g1;
    PowerPair::new(p_u, p_d)
}

/// OITM whose reflection amplitudes are scaled down by 10%, so elements lose energy.
pub fn leaky_oitm(ch: &ChannelSet<f64>, seed: u64) -> starfd::Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (q_t, q_r) = crate::checks::oitm(ch, seed)?;
    Ok((q_t, q_r.into_iter().map(|z| z * 0.9).collect()))
}
