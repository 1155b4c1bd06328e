//! Marginal RCSP with ML decoding via Shannon's sphere-packing bound for
//! codewords on the surface of a sphere, using the large-`n` asymptotic form
//! of the cone-packing error probability.
//!
//! A code of blocklength `n` under an expected power constraint is modeled
//! as `M` codewords on a sphere of radius `sqrt((n + 1) P)` in `n + 1`
//! dimensions. Where the asymptotic expression is invalid (at or above
//! capacity, or numerically meaningless) the BD value is used instead.

use alloc::vec::Vec;

use libm::{cos, exp, log, sin, sqrt};

use super::{marginal_bd, DecodingMode, ErrorProfile, IncrementSchedule, Jointness};
use crate::channels::ChannelSpec;
use crate::error::Result;
use crate::special::ln_incomplete_beta;

const LN2: f64 = core::f64::consts::LN_2;
const PI: f64 = core::f64::consts::PI;

/// Cone half-angle whose cap holds a `2^{-k}` fraction of the sphere in
/// `dim` dimensions: `I_{sin^2 theta}((dim - 1)/2, 1/2) / 2 = 2^{-k}`.
fn cap_angle(dim: f64, k: u32) -> f64 {
    let target = (1.0 - k as f64) * LN2;
    let a = 0.5 * (dim - 1.0);
    let (mut lo, mut hi) = (0.0f64, 0.5 * PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = sin(mid);
        if ln_incomplete_beta(a, 0.5, s * s) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Asymptotic sphere-packing ML error probability at blocklength `n`,
/// or `None` where the approximation does not apply.
pub fn shannon_ml_error(n: u32, k: u32, eta: f64) -> Option<f64> {
    if k == 0 {
        return Some(0.0);
    }
    let dim = n as f64 + 1.0;
    let theta = cap_angle(dim, k);
    let amp = sqrt(eta);
    let (st, ct) = (sin(theta), cos(theta));
    let g = 0.5 * (amp * ct + sqrt(amp * amp * ct * ct + 4.0));
    let slope = amp * g * st * st - ct;
    let exponent = 0.5 * (amp * amp - amp * g * ct) - log(g * st);
    let q = exp(-dim * exponent) / (sqrt(dim * PI) * sqrt(1.0 + g * g) * st * slope);
    (q.is_finite() && q > 0.0 && q < 1.0).then_some(q)
}

/// Per-attempt ML marginal profile, falling back to BD where needed.
pub fn marginal_profile_ml(schedule: &IncrementSchedule, ch: &ChannelSpec) -> Result<ErrorProfile> {
    let eta = ch.awgn_eta()?;
    let marginal = schedule
        .blocklengths()
        .into_iter()
        .map(|n| match shannon_ml_error(n, schedule.k(), eta) {
            Some(q) => Ok(q),
            None => marginal_bd(n, schedule.k(), ch),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorProfile {
        schedule: schedule.clone(),
        joint: marginal.clone(),
        marginal,
        decoding_mode: DecodingMode::MaximumLikelihood,
        jointness: Jointness::Marginal,
        error_estimate: 0.0,
    })
}
