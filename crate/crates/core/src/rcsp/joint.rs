//! Joint BD error probabilities `P[E_{n_j}]` on the AWGN channel.
//!
//! The sub-density of the accumulated noise energy, restricted to the event
//! that every attempt so far failed, is propagated attempt by attempt:
//! `f_1` is the chi-square density of the first block above `r_1^2`, and
//! `f_j` is `f_{j-1}` convolved with the chi-square density of block `j`,
//! again restricted above `r_j^2`. Each `f_j` lives on a uniform grid that
//! starts exactly at `r_j^2`; between grid points it is taken linear and
//! integrated against exact moments of the chi-square kernel. `P[E_j]` is
//! the integral of `f_j`. Two step sizes are combined by Richardson
//! extrapolation, which also yields the error estimate.

use alloc::vec::Vec;

use libm::{ceil, fabs, fmax, fmin, sqrt};

use super::{
    bd_radii, marginal_profile_bd, DecodingMode, ErrorProfile, IncrementSchedule, Jointness,
};
use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::special::{chi_square_pdf, chi_square_upper_quantile, gamma_pq, CompensatedSum};

/// Grid points per standard deviation of the final accumulated energy.
pub const DEFAULT_RESOLUTION: f64 = 100.0;
pub const DEFAULT_JOINT_TOLERANCE: f64 = 1e-6;

const NEGLIGIBLE_WEIGHT: f64 = 1e-30;
const KERNEL_TAIL: f64 = 1e-40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointOptions {
    pub resolution: f64,
    /// Absolute accuracy target on every `P[E_j]`.
    pub tolerance: f64,
    /// How many times the grid step may be halved to reach `tolerance`.
    pub max_refinements: u32,
    /// Energy mass neglected above the grid at each attempt.
    pub truncation: f64,
}

impl Default for JointOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            tolerance: DEFAULT_JOINT_TOLERANCE,
            max_refinements: 4,
            truncation: 1e-13,
        }
    }
}

/// Exact joint RCSP profile with bounded-distance decoding.
pub fn joint_profile_bd(
    schedule: &IncrementSchedule,
    ch: &ChannelSpec,
    opts: &JointOptions,
) -> Result<ErrorProfile> {
    if !(opts.resolution > 0.0) {
        return Err(Error::InvalidArgument("grid resolution must be positive"));
    }
    let mut profile = marginal_profile_bd(schedule, ch)?;
    profile.jointness = Jointness::JointExact;
    profile.decoding_mode = DecodingMode::BoundedDistance;
    if schedule.m() == 1 {
        return Ok(profile);
    }
    let radii = bd_radii(schedule, ch)?;
    let n = schedule.blocklengths();
    let upper: Vec<f64> = n
        .iter()
        .map(|&nj| chi_square_upper_quantile(nj, opts.truncation))
        .collect();
    let sigma = sqrt(2.0 * schedule.total() as f64);
    let mut h = sigma / opts.resolution;
    // the dof + 2 moment has the heavier tail
    let reach: Vec<f64> = schedule
        .increments()
        .iter()
        .map(|&i| chi_square_upper_quantile(i + 2, KERNEL_TAIL))
        .collect();
    let mut coarse = propagate(schedule.increments(), &radii, &upper, &reach, 2.0 * h);
    let mut refinements = 0;
    loop {
        let fine = propagate(schedule.increments(), &radii, &upper, &reach, h);
        let estimate = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| fabs(f - c) / 3.0)
            .fold(0.0, fmax);
        if estimate <= opts.tolerance {
            let mut joint: Vec<f64> = fine
                .iter()
                .zip(&coarse)
                .map(|(f, c)| f + (f - c) / 3.0)
                .collect();
            joint[0] = profile.marginal[0];
            for j in 1..joint.len() {
                joint[j] = fmin(fmax(joint[j], 0.0), fmin(joint[j - 1], profile.marginal[j]));
            }
            profile.joint = joint;
            profile.error_estimate = estimate;
            return Ok(profile);
        }
        if refinements == opts.max_refinements {
            return Err(Error::AccuracyUnattainable { estimate });
        }
        refinements += 1;
        coarse = fine;
        h *= 0.5;
    }
}

/// One pass of the density propagation at step `h`; returns `P[E_j]`.
fn propagate(inc: &[u32], radii: &[f64], upper: &[f64], kernel_reach: &[f64], h: f64) -> Vec<f64> {
    let m = inc.len();
    let mut out = Vec::with_capacity(m);
    let points = |j: usize| -> usize {
        if upper[j] <= radii[j] {
            1
        } else {
            ceil((upper[j] - radii[j]) / h) as usize + 1
        }
    };
    let len = points(0);
    let mut f: Vec<f64> = (0..len)
        .map(|i| chi_square_pdf(inc[0], radii[0] + i as f64 * h))
        .collect();
    out.push(gamma_pq(0.5 * inc[0] as f64, 0.5 * radii[0]).1);

    for j in 1..m {
        if f.len() < 2 {
            out.extend(core::iter::repeat_n(0.0, m - j));
            break;
        }
        let len = points(j);
        let c = radii[j] - radii[j - 1];
        let prev = f.len();
        // Kernel moments at d = c + q h for q in [q_lo - 1, q_hi]
        let q_lo = -(prev as i64 - 2);
        let q_hi = len as i64 - 1;
        let kernel = KernelMoments::new(inc[j], c, h, q_lo - 1, q_hi, kernel_reach[j]);
        let (w0, w1) = kernel.weights();
        // Skip kernel cells whose mass cannot matter; every term is nonnegative.
        let live = |q: usize| w0[q] > NEGLIGIBLE_WEIGHT;
        let (Some(qa), Some(qb)) = (
            (0..w0.len()).find(|&q| live(q)),
            (0..w0.len()).rfind(|&q| live(q)),
        ) else {
            out.extend(core::iter::repeat_n(0.0, m - j));
            break;
        };
        let delta: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
        // reversed so that kernel and density indices advance together
        let r0: Vec<f64> = w0[qa..=qb].iter().rev().copied().collect();
        let r1: Vec<f64> = w1[qa..=qb].iter().rev().copied().collect();
        let mut next = alloc::vec![0.0f64; len];
        for (l, slot) in next.iter_mut().enumerate() {
            // q = l - i - q_lo must lie in [qa, qb]
            let base = l as i64 - q_lo;
            let i_lo = (base - qb as i64).max(0);
            let i_hi = (base - qa as i64).min(prev as i64 - 2);
            if i_hi < i_lo {
                continue;
            }
            let (i_lo, i_hi) = (i_lo as usize, i_hi as usize);
            let t_lo = i_lo + qb - base as usize;
            let span = i_hi - i_lo + 1;
            let acc: f64 = f[i_lo..=i_hi]
                .iter()
                .zip(&delta[i_lo..=i_hi])
                .zip(&r0[t_lo..t_lo + span])
                .zip(&r1[t_lo..t_lo + span])
                .map(|(((fi, di), a), b)| fi * a + di * b)
                .sum();
            *slot = fmax(acc, 0.0);
        }
        out.push(trapezoid(&next, h));
        f = next;
    }
    out
}

fn trapezoid(f: &[f64], h: f64) -> f64 {
    if f.len() < 2 {
        return 0.0;
    }
    let inner: CompensatedSum = f.iter().copied().collect();
    h * (inner.value() - 0.5 * (f[0] + f[f.len() - 1]))
}

/// `K0(x) = F_I(x)` and `K1(x) = int_0^x y p_I(y) dy = I F_{I+2}(x)`, with
/// both lower and upper tails kept to avoid cancellation.
struct KernelMoments {
    c: f64,
    h: f64,
    q_start: i64,
    dof: f64,
    lower0: Vec<f64>,
    upper0: Vec<f64>,
    lower1: Vec<f64>,
    upper1: Vec<f64>,
}

impl KernelMoments {
    /// Tails beyond `reach` are treated as zero.
    fn new(dof: u32, c: f64, h: f64, q_start: i64, q_end: i64, reach: f64) -> Self {
        let a = 0.5 * dof as f64;
        let count = (q_end - q_start + 1) as usize;
        let mut s = Self {
            c,
            h,
            q_start,
            dof: dof as f64,
            lower0: Vec::with_capacity(count),
            upper0: Vec::with_capacity(count),
            lower1: Vec::with_capacity(count),
            upper1: Vec::with_capacity(count),
        };
        for q in q_start..=q_end {
            let d = c + q as f64 * h;
            let ((p0, u0), (p1, u1)) = if d <= 0.0 {
                ((0.0, 1.0), (0.0, 1.0))
            } else if d >= reach {
                ((1.0, 0.0), (1.0, 0.0))
            } else {
                (gamma_pq(a, 0.5 * d), gamma_pq(a + 1.0, 0.5 * d))
            };
            s.lower0.push(p0);
            s.upper0.push(u0);
            s.lower1.push(p1);
            s.upper1.push(u1);
        }
        s
    }

    /// `(w0[q], w1[q])` indexed from `q_start + 1`.
    fn weights(&self) -> (Vec<f64>, Vec<f64>) {
        let count = self.lower0.len() - 1;
        let mut w0 = Vec::with_capacity(count);
        let mut w1 = Vec::with_capacity(count);
        for idx in 1..=count {
            let d = self.c + (self.q_start + idx as i64) as f64 * self.h;
            if d <= 0.0 {
                w0.push(0.0);
                w1.push(0.0);
                continue;
            }
            let diff = |lo: &[f64], up: &[f64]| {
                if lo[idx - 1] > 0.5 {
                    up[idx - 1] - up[idx]
                } else {
                    lo[idx] - lo[idx - 1]
                }
            };
            let m0 = diff(&self.lower0, &self.upper0);
            let m1 = self.dof * diff(&self.lower1, &self.upper1);
            // int_{d-h}^{d} (d - x) p(x) dx / h, never negative
            let lin = fmax((d * m0 - m1) / self.h, 0.0);
            w0.push(m0);
            w1.push(lin);
        }
        (w0, w1)
    }
}
