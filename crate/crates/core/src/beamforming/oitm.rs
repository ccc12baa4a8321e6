use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::numerics::HermitianMatrix;
use crate::scalar::{dot_h, norm_sqr, unit_phase, Cx};
use crate::system::{link_gains, StarProfile};

use super::{unit, SurfaceLayout};

/// Draws after the first one; each uses its own sub-seed.
pub const OITM_MAX_ATTEMPTS: usize = 9;

/// Sub-seed of attempt `k`, continuing the channel offsets (`6 << 32` onwards).
fn subseed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((6 + attempt as u64) << 32)
}

/// `I - h h^H / ||h||^2`.
pub fn orthogonal_projector(h: &[Cx<f64>]) -> Result<HermitianMatrix<f64>> {
    let n2 = norm_sqr(h);
    if !(n2 > 0.0) {
        return Err(Error::ZeroInterferenceChannel);
    }
    let mut p = HermitianMatrix::identity(h.len());
    p.add_outer(-1.0 / n2, h);
    Ok(p)
}

fn project_out(h: &[Cx<f64>], x: &[Cx<f64>]) -> Vec<Cx<f64>> {
    let n2 = norm_sqr(h);
    if n2 == 0.0 {
        return x.to_vec();
    }
    let c = dot_h(h, x) / n2;
    x.iter().zip(h).map(|(xi, hi)| xi - hi * c).collect()
}

fn random_phases(rng: &mut impl Rng, n: usize) -> Vec<Cx<f64>> {
    (0..n)
        .map(|_| unit_phase(rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

/// Unit-modulus `q` with `h^H q = 0`, or `None` when one entry of `h`
/// outweighs all others (or a draw budget runs out).
///
/// The two largest entries `a >= b` close the polygon `sum conj(h_i) q_i = 0`,
/// which needs the remaining terms to sum to a magnitude in `[a - b, a + b]`.
/// Their phases are blended from fully aligned (magnitude = their sum) towards a
/// random draw, bisecting on the blend until the magnitude drops into range.
fn close_polygon(h: &[Cx<f64>], rng: &mut impl Rng) -> Option<Vec<Cx<f64>>> {
    if h.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&i, &j| h[j].norm().total_cmp(&h[i].norm()));
    let (ia, ib) = (order[0], order[1]);
    let (a, b) = (h[ia].norm(), h[ib].norm());
    let rest = &order[2..];
    if !(b > 0.0) || a > b + rest.iter().map(|&i| h[i].norm()).sum::<f64>() * (1.0 + 1e-12) {
        return None;
    }
    let phase_of = |i: usize, tau: f64, phi: &[f64]| unit(h[i]) * unit_phase(tau * phi[i]);
    let resultant = |tau: f64, phi: &[f64]| -> Cx<f64> { rest.iter().map(|&i| h[i].conj() * phase_of(i, tau, phi)).sum() };
    for _ in 0..CLOSURE_DRAWS {
        let phi: Vec<f64> = (0..h.len()).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
        let flip = rng.random::<bool>();
        let tau = if resultant(0.0, &phi).norm() <= a + b {
            0.0
        } else if resultant(1.0, &phi).norm() > a + b {
            continue;
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if resultant(mid, &phi).norm() > a + b {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let mut q: Vec<Cx<f64>> = (0..h.len()).map(|i| phase_of(i, tau, &phi)).collect();
        let t = -resultant(tau, &phi);
        let tn = t.norm();
        let u = if tn > 0.0 {
            let cos = ((a * a + tn * tn - b * b) / (2.0 * a * tn)).clamp(-1.0, 1.0);
            let g = if flip { -cos.acos() } else { cos.acos() };
            t / tn * unit_phase(g) * a
        } else {
            q[ia] * a
        };
        q[ia] = unit(u / h[ia].conj());
        q[ib] = unit((t - u) / h[ib].conj());
        return Some(q);
    }
    None
}

const CLOSURE_DRAWS: usize = 16;

/// One OITM draw; `None` when the projected vector vanishes.
///
/// `Star`: `y = (I - h3 h3^H/||h3||^2) x` for random unit-modulus `x`,
/// `q_t = y / max_m |y_m|`, `|q_r,m| = sqrt(1 - |q_t,m|^2)` with random phases.
/// `Conventional`: unit-modulus transmit-half phases orthogonal to that half of
/// `h3` (see [`close_polygon`]), falling back to the phases of the projection when
/// no such closure exists for the draw; random phases on the reflect half.
pub fn oitm_candidate(
    layout: SurfaceLayout,
    ch: &ChannelSet<f64>,
    seed: u64,
    attempt: usize,
) -> Result<Option<StarProfile<f64>>> {
    let m = ch.num_elements();
    layout.validate(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, attempt));
    match layout {
        SurfaceLayout::Star => {
            if !(norm_sqr(&ch.h3) > 0.0) {
                return Err(Error::ZeroInterferenceChannel);
            }
            let x = random_phases(&mut rng, m);
            let y = project_out(&ch.h3, &x);
            let peak = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(peak > 1e-12 * (m as f64).sqrt()) {
                return Ok(None);
            }
            let q_t: Vec<Cx<f64>> = y.iter().map(|z| z / peak).collect();
            let phases = random_phases(&mut rng, m);
            let q_r = q_t
                .iter()
                .zip(phases)
                .map(|(t, ph)| ph * (1.0 - t.norm_sqr()).max(0.0).sqrt())
                .collect();
            Ok(Some(StarProfile::new(q_t, q_r)?))
        }
        SurfaceLayout::Conventional => {
            let half = m / 2;
            let h = &ch.h3[..half];
            let mut q_t = match close_polygon(h, &mut rng) {
                Some(q) => q,
                None => {
                    let x = random_phases(&mut rng, half);
                    project_out(h, &x).into_iter().map(unit).collect()
                }
            };
            q_t.resize(m, Cx::new(0.0, 0.0));
            let mut q_r = vec![Cx::new(0.0, 0.0); half];
            q_r.extend(random_phases(&mut rng, m - half));
            Ok(Some(StarProfile::new(q_t, q_r)?))
        }
    }
}

/// OITM start for a STAR surface.
pub fn oitm_init(ch: &ChannelSet<f64>, seed: u64) -> Result<StarProfile<f64>> {
    oitm_init_for(SurfaceLayout::Star, ch, seed)
}

/// First draw whose uplink and downlink gains are both positive.
pub fn oitm_init_for(layout: SurfaceLayout, ch: &ChannelSet<f64>, seed: u64) -> Result<StarProfile<f64>> {
    for attempt in 0..OITM_MAX_ATTEMPTS {
        if let Some(prof) = oitm_candidate(layout, ch, seed, attempt)? {
            let (g1, g2, _) = link_gains(&prof, ch)?;
            if g1 > 0.0 && g2 > 0.0 {
                return Ok(prof);
            }
        }
    }
    Err(Error::InitializationFailed {
        attempts: OITM_MAX_ATTEMPTS,
    })
}
