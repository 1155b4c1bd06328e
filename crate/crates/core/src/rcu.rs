//! Random-coding union bounds for the BSC and the variable-length feedback
//! (VLFT) latency sums built on them, plus a Monte-Carlo dependence-testing
//! bound for the AWGN channel.

use alloc::vec::Vec;

use libm::{ceil, exp, fmax, fmin, log, log1p, log2, sqrt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::special::{binary_entropy, ln_binomial, CompensatedSum};

const LN2: f64 = core::f64::consts::LN_2;
/// Largest blocklength accepted by [`bsc_rcu`].
pub const MAX_BLOCKLENGTH: u32 = 100_000;

/// RCU bound on the error probability of a random code of `2^k` codewords
/// at blocklength `n` over a BSC with crossover `p` (using `M` in place of
/// `M - 1`). `n = 0` gives 1.
pub fn bsc_rcu(n: u32, k: u32, p: f64) -> Result<f64> {
    if n > MAX_BLOCKLENGTH {
        return Err(Error::BlocklengthTooLarge(n));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let kl = k as f64 * LN2 - nf * LN2;
    if p == 0.0 {
        return Ok(fmin(1.0, exp(kl)));
    }
    let (lp, lq) = (log(p), log1p(-p));
    let mut acc = CompensatedSum::new();
    // ln sum_{j<=t} C(n, j), updated with log-add-exp
    let mut ln_prefix = f64::NEG_INFINITY;
    for t in 0..=n {
        let lc = ln_binomial(n, t);
        ln_prefix = crate::special::log_add_exp(ln_prefix, lc);
        let ln_pmf = lc + t as f64 * lp + (n - t) as f64 * lq;
        let ln_union = fmin(0.0, kl + ln_prefix);
        acc.add(exp(ln_pmf + ln_union));
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// Sequence `xi_0..xi_N` of BSC RCU values for a fixed message size.
#[derive(Clone, Debug)]
pub struct RcuSeries {
    pub k: u32,
    pub channel: ChannelSpec,
    pub xi: Vec<f64>,
    /// Bound on `sum_{n > N} xi_n`; infinite until computed.
    pub truncation_tail_bound: f64,
}

impl RcuSeries {
    pub fn new(k: u32, channel: ChannelSpec) -> Result<Self> {
        channel.bsc_p()?;
        Ok(Self {
            k,
            channel,
            xi: alloc::vec![1.0],
            truncation_tail_bound: f64::INFINITY,
        })
    }

    /// Extends the series through `xi_n`.
    pub fn extend_to(&mut self, n: u32) -> Result<()> {
        let p = self.channel.bsc_p()?;
        while (self.xi.len() as u32) <= n {
            let next = self.xi.len() as u32;
            let v = bsc_rcu(next, self.k, p)?;
            // More observations never hurt; remove rounding wiggle.
            let last = *self.xi.last().unwrap();
            self.xi.push(fmin(v, last));
        }
        Ok(())
    }

    pub fn get(&mut self, n: u32) -> Result<f64> {
        self.extend_to(n)?;
        Ok(self.xi[n as usize])
    }

    pub fn last_index(&self) -> u32 {
        self.xi.len() as u32 - 1
    }
}

/// Rigorous bound on `sum_{n > n0} xi_n` from
/// `xi_n <= exp(-n D(a||p)) + 2^{k - n(1 - h(a))}`, minimized over `a`.
pub fn rcu_tail_bound(n0: u32, k: u32, p: f64) -> f64 {
    let start = n0 as f64 + 1.0;
    let mut best = f64::INFINITY;
    const STEPS: usize = 400;
    for i in 1..STEPS {
        let a = p + (0.5 - p) * i as f64 / STEPS as f64;
        let d = if p == 0.0 {
            f64::INFINITY
        } else {
            a * log(a / p) + (1.0 - a) * log((1.0 - a) / (1.0 - p))
        };
        let first = if d.is_infinite() {
            0.0
        } else {
            exp(-start * d) / -libm::expm1(-d)
        };
        let e = 1.0 - binary_entropy(a);
        if e <= 0.0 {
            continue;
        }
        let second = exp(LN2 * (k as f64 - start * e)) / -libm::expm1(-e * LN2);
        best = fmin(best, first + second);
    }
    best
}

/// Achievable latency/throughput pair for a VLFT code.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlftPoint {
    pub ell: f64,
    pub rate: f64,
    pub epsilon: f64,
    pub config: VlftConfig,
}

/// Constraint set: `n_max = None` means unbounded blocklength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlftConfig {
    pub n_max: Option<u32>,
    pub increment: u32,
    pub n1: u32,
    pub attempts: Option<u32>,
}

fn point(k: u32, ell: f64, epsilon: f64, config: VlftConfig) -> VlftPoint {
    VlftPoint {
        ell,
        rate: k as f64 / ell,
        epsilon,
        config,
    }
}

/// Extends an RCU series until a bound on `sum_{n > N} xi_n` is below
/// `tail_tol`. Fails if `xi_n` is still at least 1/2 at `n = 64k`.
pub fn converged_series(k: u32, ch: &ChannelSpec, tail_tol: f64) -> Result<RcuSeries> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument("tail_tol must be positive"));
    }
    let p = ch.bsc_p()?;
    let mut series = RcuSeries::new(k, *ch)?;
    let guard = 64 * k.max(1);
    let mut n = 0u32;
    loop {
        n += 1;
        let xi = series.get(n)?;
        if n >= guard && xi >= 0.5 {
            return Err(Error::Divergence(n));
        }
        if xi < 0.5 {
            let tail = rcu_tail_bound(n, k, p);
            if tail < tail_tol {
                series.truncation_tail_bound = tail;
                return Ok(series);
            }
        }
    }
}

/// `ell <= sum_{n>=0} xi_n`, truncated once a bound on the remaining tail
/// drops below `tail_tol`.
pub fn vlft_infinite(k: u32, ch: &ChannelSpec, tail_tol: f64) -> Result<VlftPoint> {
    let series = converged_series(k, ch, tail_tol)?;
    let ell: CompensatedSum = series.xi.iter().copied().collect();
    let cfg = VlftConfig {
        n_max: None,
        increment: 1,
        n1: 1,
        attempts: None,
    };
    Ok(point(k, ell.value(), 0.0, cfg))
}

/// Truncated VLFT: `ell <= sum_{n<N} xi_n`, `epsilon <= xi_N`.
pub fn vlft_truncated(k: u32, n_max: u32, ch: &ChannelSpec) -> Result<VlftPoint> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be at least 1"));
    }
    let mut series = RcuSeries::new(k, *ch)?;
    series.extend_to(n_max)?;
    let ell: CompensatedSum = series.xi[..n_max as usize].iter().copied().collect();
    let cfg = VlftConfig {
        n_max: Some(n_max),
        increment: 1,
        n1: 1,
        attempts: Some(n_max),
    };
    Ok(point(k, ell.value(), series.xi[n_max as usize], cfg))
}

/// Repeated VLFT decoding only at `n_j = n1 + (j-1) I`, `n_m = N`:
/// `ell <= (n1 + sum_{j>=2} I xi_{n_{j-1}}) / (1 - xi_N)`.
pub fn vlft_repeated(
    k: u32,
    n_max: u32,
    increment: u32,
    n1: u32,
    ch: &ChannelSpec,
) -> Result<VlftPoint> {
    if n1 == 0 || increment == 0 {
        return Err(Error::InvalidArgument("n1 and I must be at least 1"));
    }
    if n_max < n1 || !(n_max - n1).is_multiple_of(increment) {
        return Err(Error::InvalidSchedule("N is not on the decoding grid"));
    }
    let mut series = RcuSeries::new(k, *ch)?;
    series.extend_to(n_max)?;
    let attempts = (n_max - n1) / increment + 1;
    let mut num = CompensatedSum::new();
    num.add(n1 as f64);
    for j in 1..attempts {
        let prev = n1 + (j - 1) * increment;
        num.add(increment as f64 * series.xi[prev as usize]);
    }
    let xi_n = series.xi[n_max as usize];
    if xi_n >= 1.0 {
        return Err(Error::CertainFailure(xi_n));
    }
    let cfg = VlftConfig {
        n_max: Some(n_max),
        increment,
        n1,
        attempts: Some(attempts),
    };
    Ok(point(k, num.value() / (1.0 - xi_n), 0.0, cfg))
}

/// Converse: `R_t <= (ell C + log2(ell + 1) + log2 e) / ell`.
pub fn vlft_converse(ell: f64, ch: &ChannelSpec) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::InvalidArgument("latency must be positive"));
    }
    Ok((ell * ch.capacity() + log2(ell + 1.0) + core::f64::consts::LOG2_E) / ell)
}

/// `N = k/C + a log2(k/C) + b`, rounded up.
pub fn blocklength_rule(k: u32, capacity: f64, a: f64, b: f64) -> u32 {
    let base = k as f64 / capacity;
    ceil(base + a * log2(fmax(base, 1.0)) + b) as u32
}

/// `N = k / (C - delta)`, rounded up.
pub fn blocklength_backoff(k: u32, capacity: f64, delta: f64) -> u32 {
    ceil(k as f64 / (capacity - delta)) as u32
}

/// `I = ceil(log2 log2 M) = ceil(log2 k)`, at least 1.
pub fn loglog_increment(k: u32) -> u32 {
    if k <= 2 {
        1
    } else {
        ceil(log2(k as f64)) as u32
    }
}

/// Smallest `n1 >= 1` with `N` on the grid `n1 + jI`.
pub fn grid_start(n_max: u32, increment: u32) -> u32 {
    n_max - increment * ((n_max - 1) / increment)
}

/// Estimate and standard error of one Monte-Carlo bound value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Dependence-testing bound for Gaussian random coding on the AWGN channel,
/// `xi_n <= E[exp(-[i(X^n; Y^n) - ln(M - 1)]^+)]`, estimated for every
/// `n = 1..=n_max` from `samples` paths of the cumulative information
/// density. Entry `n - 1` holds blocklength `n`.
pub fn dt_bound_awgn(
    n_max: u32,
    k: u32,
    ch: &ChannelSpec,
    samples: u32,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let eta = ch.awgn_eta()?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples"));
    }
    if k == 0 {
        return Ok(alloc::vec![McEstimate { mean: 0.0, std_err: 0.0 }; n_max as usize]);
    }
    let ln_m1 = k as f64 * LN2 + log1p(-exp(-(k as f64) * LN2));
    let half_ln = 0.5 * log1p(eta);
    let sx = sqrt(eta);
    let mut sum = alloc::vec![0.0f64; n_max as usize];
    let mut sum_sq = alloc::vec![0.0f64; n_max as usize];
    for s in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let mut density = 0.0;
        for n in 0..n_max as usize {
            let x = sx * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = x + z;
            density += half_ln - 0.5 * z * z + y * y / (2.0 * (1.0 + eta));
            let v = exp(-fmax(density - ln_m1, 0.0));
            sum[n] += v;
            sum_sq[n] += v * v;
        }
    }
    let s = samples as f64;
    Ok(sum
        .iter()
        .zip(&sum_sq)
        .map(|(&a, &b)| {
            let mean = a / s;
            let var = fmax(b / s - mean * mean, 0.0) * s / (s - 1.0);
            McEstimate {
                mean,
                std_err: sqrt(var / s),
            }
        })
        .collect())
}
