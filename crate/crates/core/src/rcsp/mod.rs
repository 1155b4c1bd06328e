//! Rate-compatible sphere-packing (RCSP) approximations.
//!
//! Each code of a rate-compatible family is assumed to pack perfectly, which
//! fixes a decoding radius per attempt. Error probabilities are then noise
//! tails (chi-square for AWGN, binomial for the BSC), either per attempt
//! (marginal) or as the probability that every attempt so far failed
//! (joint).

use alloc::vec::Vec;

use libm::{exp, exp2, log, log1p};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::special::{chi_square_cdf, chi_square_tail, ln_binomial, CompensatedSum};

mod joint;
mod ml;

pub use joint::{joint_profile_bd, JointOptions, DEFAULT_JOINT_TOLERANCE, DEFAULT_RESOLUTION};
pub use ml::{marginal_profile_ml, shannon_ml_error};

/// Lengths of the incremental transmissions for one message of `k` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IncrementSchedule {
    k: u32,
    increments: Vec<u32>,
}

impl IncrementSchedule {
    pub fn new(k: u32, increments: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSchedule("k must be at least 1"));
        }
        if increments.is_empty() {
            return Err(Error::InvalidSchedule(
                "at least one transmission is required",
            ));
        }
        if increments.contains(&0) {
            return Err(Error::InvalidSchedule("increments must be positive"));
        }
        increments
            .iter()
            .try_fold(0u32, |acc, &i| acc.checked_add(i))
            .ok_or(Error::InvalidSchedule("total blocklength overflows"))?;
        Ok(Self { k, increments })
    }

    /// `n1` followed by `m - 1` increments of `step`.
    pub fn uniform(k: u32, n1: u32, step: u32, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidSchedule("m must be at least 1"));
        }
        let mut inc = alloc::vec![n1];
        inc.extend(core::iter::repeat_n(step, m as usize - 1));
        Self::new(k, inc)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[u32] {
        &self.increments
    }

    /// Cumulative blocklengths `n_1..n_m`.
    pub fn blocklengths(&self) -> Vec<u32> {
        self.increments
            .iter()
            .scan(0u32, |acc, &i| {
                *acc += i;
                Some(*acc)
            })
            .collect()
    }

    /// `N = n_m`.
    pub fn total(&self) -> u32 {
        self.increments.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodingMode {
    BoundedDistance,
    MaximumLikelihood,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Jointness {
    Marginal,
    JointExact,
    JointChernoffUb,
    JointChernoffLb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatencyMode {
    Repeated,
    NonRepeating,
}

/// Per-attempt error probabilities of a schedule: the decoding error
/// trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorProfile {
    pub schedule: IncrementSchedule,
    /// `P[zeta_{n_j}]`: attempt `j` fails.
    pub marginal: Vec<f64>,
    /// `P[E_{n_j}]`: attempts `1..=j` all fail.
    pub joint: Vec<f64>,
    pub decoding_mode: DecodingMode,
    pub jointness: Jointness,
    /// Estimated absolute numerical error of `joint`, when computed.
    pub error_estimate: f64,
}

impl ErrorProfile {
    fn marginal_only(schedule: IncrementSchedule, marginal: Vec<f64>, mode: DecodingMode) -> Self {
        Self {
            schedule,
            joint: marginal.clone(),
            marginal,
            decoding_mode: mode,
            jointness: Jointness::Marginal,
            error_estimate: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Rcsp {
        decoding: DecodingMode,
        jointness: Jointness,
        latency: LatencyMode,
    },
    Arq,
    Chase {
        l_max: u32,
    },
    RandomCoding,
    Simulation,
}

/// Expected latency and throughput of one configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerformancePoint {
    pub ell: f64,
    pub rate: f64,
    /// Residual error probability for non-repeating operation.
    pub outage: Option<f64>,
    pub provenance: Provenance,
}

/// Squared BD radius at rate `k/n`: `r^2 = n (1 + eta) 2^{-2k/n}`.
#[inline]
pub fn awgn_radius_sq(n: u32, k: u32, eta: f64) -> f64 {
    let n = n as f64;
    n * (1.0 + eta) * exp2(-2.0 * k as f64 / n)
}

/// Squared BD radii `r_j^2` for every attempt of an AWGN schedule.
pub fn bd_radii(schedule: &IncrementSchedule, ch: &ChannelSpec) -> Result<Vec<f64>> {
    let eta = ch.awgn_eta()?;
    Ok(schedule
        .blocklengths()
        .into_iter()
        .map(|n| awgn_radius_sq(n, schedule.k, eta))
        .collect())
}

/// Hamming-bound radius of a quasi-perfect `(n, 2^k)` packing: full
/// spheres of radius `r - 1` plus part of the shell at distance `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HammingRadius {
    pub r: u32,
    /// Spheres of radius `r` tile the space exactly (no partial shell).
    pub degenerate: bool,
    /// Fraction of the distance-`r` shell owned by each decoding region,
    /// `(2^{n-k} - sum_{t<r} C(n,t)) / C(n,r)`; 1 when degenerate.
    pub shell_fraction: f64,
}

/// `a / b` for big integers of any size, `b > 0`.
fn big_ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(1000);
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}

/// Integer `r` with `M sum_{t<r} C(n,t) < 2^n < M sum_{t<=r} C(n,t)`,
/// evaluated exactly; exact equality takes the smaller radius.
pub fn bsc_hamming_radius(n: u32, k: u32) -> Result<HammingRadius> {
    if k > n {
        return Err(Error::NoPacking);
    }
    let target = BigUint::one() << (n - k) as usize;
    let mut binom = BigUint::one();
    let mut prefix = BigUint::zero();
    for r in 0..=n {
        let below = prefix.clone();
        prefix += &binom;
        if prefix >= target {
            let shell_fraction = big_ratio(&(&target - &below), &binom);
            return Ok(HammingRadius {
                r,
                degenerate: prefix == target,
                shell_fraction,
            });
        }
        binom = binom * (n - r) / (r + 1);
    }
    unreachable!("the full binomial sum equals 2^n")
}

/// Binomial upper tail `P[Bin(n, p) > r]`.
pub fn binomial_tail(n: u32, r: u32, p: f64) -> f64 {
    if r >= n {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    let (lp, lq) = (log(p), log1p(-p));
    let sum: CompensatedSum = (r + 1..=n)
        .map(|t| exp(ln_binomial(n, t) + t as f64 * lp + (n - t) as f64 * lq))
        .collect();
    sum.value().clamp(0.0, 1.0)
}

/// Binomial probability `P[Bin(n, p) = t]`.
pub fn binomial_pmf(n: u32, t: u32, p: f64) -> f64 {
    if t > n {
        return 0.0;
    }
    if p == 0.0 {
        return if t == 0 { 1.0 } else { 0.0 };
    }
    exp(ln_binomial(n, t) + t as f64 * log(p) + (n - t) as f64 * log1p(-p))
}

/// Marginal BD error probability of a single attempt at blocklength `n`.
/// On the BSC the decoder owns every pattern of weight below `r` and a
/// `shell_fraction` share of weight `r`.
pub fn marginal_bd(n: u32, k: u32, ch: &ChannelSpec) -> Result<f64> {
    match *ch {
        ChannelSpec::Awgn { eta } => Ok(chi_square_tail(n, awgn_radius_sq(n, k, eta))),
        ChannelSpec::Bsc { p } => match bsc_hamming_radius(n, k) {
            Ok(hr) => {
                let shell = (1.0 - hr.shell_fraction) * binomial_pmf(n, hr.r, p);
                Ok((binomial_tail(n, hr.r, p) + shell).clamp(0.0, 1.0))
            }
            Err(Error::NoPacking) => Ok(1.0),
            Err(e) => Err(e),
        },
    }
}

/// Marginal RCSP profile with bounded-distance decoding.
pub fn marginal_profile_bd(schedule: &IncrementSchedule, ch: &ChannelSpec) -> Result<ErrorProfile> {
    let marginal = schedule
        .blocklengths()
        .into_iter()
        .map(|n| marginal_bd(n, schedule.k, ch))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorProfile::marginal_only(
        schedule.clone(),
        marginal,
        DecodingMode::BoundedDistance,
    ))
}

/// Expected latency from an error profile. Uses `profile.joint`, so a
/// marginal profile yields the marginal (upper-bound) approximation.
pub fn expected_latency(profile: &ErrorProfile, mode: LatencyMode) -> Result<PerformancePoint> {
    let inc = profile.schedule.increments();
    let p = &profile.joint;
    let mut acc = CompensatedSum::new();
    acc.add(inc[0] as f64);
    for j in 1..inc.len() {
        acc.add(inc[j] as f64 * p[j - 1]);
    }
    let last = p[p.len() - 1];
    let (ell, outage) = match mode {
        LatencyMode::Repeated => {
            if last >= 1.0 {
                return Err(Error::CertainFailure(last));
            }
            (acc.value() / (1.0 - last), None)
        }
        LatencyMode::NonRepeating => (acc.value(), Some(last)),
    };
    Ok(PerformancePoint {
        ell,
        rate: profile.schedule.k as f64 / ell,
        outage,
        provenance: Provenance::Rcsp {
            decoding: profile.decoding_mode,
            jointness: profile.jointness,
            latency: mode,
        },
    })
}

/// ARQ with a single transmission of length `n1`, repeated until success:
/// `R_t = (k / n1) F_{chi^2_{n1}}(r_1^2)`.
pub fn arq_throughput(k: u32, n1: u32, ch: &ChannelSpec) -> Result<PerformancePoint> {
    let eta = ch.awgn_eta()?;
    if n1 == 0 {
        return Err(Error::InvalidArgument("n1 must be positive"));
    }
    let success = chi_square_cdf(n1, awgn_radius_sq(n1, k, eta));
    Ok(PerformancePoint {
        ell: n1 as f64 / success,
        rate: k as f64 / n1 as f64 * success,
        outage: None,
        provenance: Provenance::Arq,
    })
}

/// Throughput upper bound for ARQ with Chase combining of up to `l_max`
/// copies. Attempt `L` is treated as an independent BD decode at SNR
/// `L eta` with the radius re-derived at that SNR, ignoring side
/// information from earlier failures; attempts past `l_max` reuse the
/// `l_max` probability.
pub fn chase_throughput(k: u32, n1: u32, ch: &ChannelSpec, l_max: u32) -> Result<PerformancePoint> {
    let eta = ch.awgn_eta()?;
    if l_max == 0 || n1 == 0 {
        return Err(Error::InvalidArgument("n1 and L_max must be positive"));
    }
    let fail: Vec<f64> = (1..=l_max).map(|l| chase_failure(k, n1, eta, l)).collect();
    let p_last = fail[fail.len() - 1];
    if p_last >= 1.0 {
        return Err(Error::CertainFailure(p_last));
    }
    // E[T] = sum_t prod_{l<=t} p_l with a geometric tail past l_max
    let mut expect = CompensatedSum::new();
    expect.add(1.0);
    let mut prod = 1.0;
    for &p in &fail[..fail.len() - 1] {
        prod *= p;
        expect.add(prod);
    }
    prod *= p_last;
    expect.add(prod / (1.0 - p_last));
    let ell = n1 as f64 * expect.value();
    Ok(PerformancePoint {
        ell,
        rate: k as f64 / ell,
        outage: None,
        provenance: Provenance::Chase { l_max },
    })
}

/// BD failure probability of the `L`-th combined copy.
pub fn chase_failure(k: u32, n1: u32, eta: f64, copies: u32) -> f64 {
    chi_square_tail(n1, awgn_radius_sq(n1, k, copies as f64 * eta))
}
