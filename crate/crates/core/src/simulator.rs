//! Monte-Carlo simulation of repeated IR-NTC with genie confirmation.
//!
//! A trial draws a random message, encodes it once, and sends increments
//! from the rate-matching buffer. After every increment the receiver decodes
//! from everything received in the current round; the transmitter stops as
//! soon as the decision equals the true message. A round that exhausts all
//! `m` attempts is discarded and the same codeword is sent again with fresh
//! noise.
//!
//! Trial `t` draws all of its randomness from ChaCha8 seeded with the run
//! seed on stream `t`, so tallies do not depend on how trials are split
//! across workers.

use alloc::vec::Vec;

use libm::{fmax, fmin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{ChannelSpec, Noise};
use crate::error::{Error, Result};
use crate::rcsp::{bd_radii, bsc_hamming_radius, IncrementSchedule};
use crate::trellis::{BranchCosts, Decoder, DecoderKind, RateMatcher, TrellisCode};

#[derive(Clone, Debug, PartialEq)]
pub enum SimDecoder {
    Code {
        code: TrellisCode,
        kind: DecoderKind,
    },
    /// Idealized BD decoding: attempt `j` succeeds iff the accumulated noise
    /// stays inside the RCSP radius.
    IdealBd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub decoder: SimDecoder,
    pub schedule: IncrementSchedule,
    pub trials: u64,
    pub seed: u64,
    pub interleaver_seed: u64,
    /// A trial still undecoded after this many rounds is aborted.
    pub max_rounds: u32,
}

pub const DEFAULT_TRIALS_BSC: u64 = 100_000;
pub const DEFAULT_TRIALS_AWGN: u64 = 20_000;

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required"));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be positive"));
        }
        let k = self.schedule.k();
        if let SimDecoder::Code { code, .. } = &self.decoder {
            if self.schedule.total() > 3 * k {
                return Err(Error::InvalidSchedule("N must not exceed 3k"));
            }
            if self.schedule.increments()[0] < k {
                return Err(Error::InvalidSchedule("the first attempt needs n1 >= k"));
            }
            if k < code.nu {
                return Err(Error::InvalidSchedule("k must be at least the code memory"));
            }
        }
        Ok(())
    }
}

/// Additive counts from a set of trials; merge tallies from disjoint trial
/// ranges with [`SimTally::merge`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTally {
    pub completed: u64,
    pub aborted: u64,
    /// Channel uses summed over completed trials.
    pub channel_uses: u64,
    pub latency_sq: f64,
    pub rounds: u64,
    /// `failures[j]`: rounds in which attempts `1..=j+1` all failed.
    pub failures: Vec<u64>,
    /// `rounds_histogram[r]`: completed trials that needed `r + 1` rounds.
    pub rounds_histogram: Vec<u64>,
}

impl SimTally {
    fn new(m: usize) -> Self {
        Self {
            failures: alloc::vec![0; m],
            ..Default::default()
        }
    }

    pub fn merge(&mut self, other: &SimTally) {
        self.completed += other.completed;
        self.aborted += other.aborted;
        self.channel_uses += other.channel_uses;
        self.latency_sq += other.latency_sq;
        self.rounds += other.rounds;
        if self.failures.len() < other.failures.len() {
            self.failures.resize(other.failures.len(), 0);
        }
        for (a, b) in self.failures.iter_mut().zip(&other.failures) {
            *a += b;
        }
        if self.rounds_histogram.len() < other.rounds_histogram.len() {
            self.rounds_histogram
                .resize(other.rounds_histogram.len(), 0);
        }
        for (a, b) in self
            .rounds_histogram
            .iter_mut()
            .zip(&other.rounds_histogram)
        {
            *a += b;
        }
    }

    pub fn finish(&self, schedule: &IncrementSchedule) -> SimResult {
        let c = self.completed as f64;
        let ell = self.channel_uses as f64 / c;
        let var = fmax(self.latency_sq / c - ell * ell, 0.0) * c / fmax(c - 1.0, 1.0);
        SimResult {
            ell,
            ell_std_err: sqrt(var / c),
            rate: schedule.k() as f64 / ell,
            attempt_error: self
                .failures
                .iter()
                .map(|&f| f as f64 / self.rounds as f64)
                .collect(),
            tally: self.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub ell: f64,
    pub ell_std_err: f64,
    pub rate: f64,
    /// Empirical `P[E_{n_j}]` over all rounds.
    pub attempt_error: Vec<f64>,
    pub tally: SimTally,
}

/// One row of an empirical decoding error trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub attempt: usize,
    pub n: u32,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // the bounds are exactly 0 or 1 at the extremes; avoid rounding residue
    let lo = if successes == 0 {
        0.0
    } else {
        fmax(center - half, 0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        fmin(center + half, 1.0)
    };
    (lo, hi)
}

struct Worker<'a> {
    cfg: &'a SimConfig,
    blocklengths: Vec<u32>,
    kind: WorkerKind,
}

// built once per worker
#[allow(clippy::large_enum_variant)]
enum WorkerKind {
    Code {
        code: TrellisCode,
        matcher: RateMatcher,
        decoder: Decoder,
    },
    IdealAwgn {
        radii: Vec<f64>,
    },
    /// Radius and owned share of its shell; `None`: no packing exists.
    IdealBsc {
        radii: Vec<Option<(u32, f64)>>,
    },
}

impl<'a> Worker<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.schedule.k();
        let blocklengths = cfg.schedule.blocklengths();
        let kind = match (&cfg.decoder, cfg.channel) {
            (SimDecoder::Code { code, kind }, _) => WorkerKind::Code {
                code: code.clone(),
                matcher: RateMatcher::new(k as usize, cfg.interleaver_seed),
                decoder: Decoder::new(code.clone(), *kind),
            },
            (SimDecoder::IdealBd, ChannelSpec::Awgn { .. }) => WorkerKind::IdealAwgn {
                radii: bd_radii(&cfg.schedule, &cfg.channel)?,
            },
            (SimDecoder::IdealBd, ChannelSpec::Bsc { .. }) => WorkerKind::IdealBsc {
                radii: blocklengths
                    .iter()
                    .map(|&n| match bsc_hamming_radius(n, k) {
                        Ok(r) => Ok(Some((r.r, r.shell_fraction))),
                        Err(Error::NoPacking) => Ok(None),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()?,
            },
        };
        Ok(Self {
            cfg,
            blocklengths,
            kind,
        })
    }

    fn trial(&mut self, index: u64, tally: &mut SimTally) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        let k = self.cfg.schedule.k() as usize;
        let n_max = self.cfg.schedule.total() as usize;
        let m = self.blocklengths.len();
        let message: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let coded = match &self.kind {
            WorkerKind::Code { code, matcher, .. } => {
                let c = code.encode(&message).expect("validated message length");
                matcher
                    .rate_match(&c, n_max)
                    .expect("validated blocklength")
            }
            _ => Vec::new(),
        };
        let mut uses = 0u64;
        for round in 0..self.cfg.max_rounds {
            tally.rounds += 1;
            let noise = self.cfg.channel.sample_noise(n_max, &mut rng);
            for j in 0..m {
                let n = self.blocklengths[j] as usize;
                if self.attempt(j, n, &message, &coded, &noise, &mut rng) {
                    uses += n as u64;
                    tally.completed += 1;
                    tally.channel_uses += uses;
                    tally.latency_sq += (uses as f64) * (uses as f64);
                    let r = round as usize;
                    if tally.rounds_histogram.len() <= r {
                        tally.rounds_histogram.resize(r + 1, 0);
                    }
                    tally.rounds_histogram[r] += 1;
                    return;
                }
                tally.failures[j] += 1;
            }
            uses += n_max as u64;
        }
        tally.aborted += 1;
    }

    fn attempt(
        &mut self,
        j: usize,
        n: usize,
        message: &[u8],
        coded: &[u8],
        noise: &Noise,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        match (&mut self.kind, noise) {
            (WorkerKind::IdealAwgn { radii }, Noise::Gaussian(z)) => {
                z[..n].iter().map(|x| x * x).sum::<f64>() <= radii[j]
            }
            (WorkerKind::IdealBsc { radii }, Noise::Flips(f)) => {
                let flips = f[..n].iter().filter(|&&b| b).count() as u32;
                // patterns on the boundary shell decode with probability equal to the owned share
                radii[j].is_some_and(|(r, frac)| {
                    flips < r || (flips == r && rng.random::<f64>() < frac)
                })
            }
            (
                WorkerKind::Code {
                    matcher, decoder, ..
                },
                noise,
            ) => {
                let k = message.len();
                let pos = matcher.positions(n).expect("validated blocklength");
                let bc = match (noise, self.cfg.channel) {
                    (Noise::Flips(f), _) => {
                        let y: Vec<u8> = coded[..n]
                            .iter()
                            .zip(f)
                            .map(|(&c, &e)| c ^ e as u8)
                            .collect();
                        BranchCosts::hard(k, pos, &y)
                    }
                    (Noise::Gaussian(z), ChannelSpec::Awgn { eta }) => {
                        let amp = sqrt(eta);
                        let y: Vec<f64> = coded[..n]
                            .iter()
                            .zip(z)
                            .map(|(&c, &w)| if c == 0 { amp + w } else { -amp + w })
                            .collect();
                        BranchCosts::soft(k, pos, &y, eta)
                    }
                    _ => unreachable!("noise kind follows the channel"),
                }
                .expect("matching lengths");
                let decoded = decoder.decode(&bc).expect("validated message length");
                decoded.message == message
            }
            _ => unreachable!("noise kind follows the channel"),
        }
    }
}

/// Runs trials `range` and returns their tally.
pub fn run_range(cfg: &SimConfig, range: core::ops::Range<u64>) -> Result<SimTally> {
    let mut worker = Worker::new(cfg)?;
    let mut tally = SimTally::new(cfg.schedule.m());
    for t in range {
        worker.trial(t, &mut tally);
    }
    Ok(tally)
}

/// Runs every trial of `cfg` on the calling thread.
pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    let tally = run_range(cfg, 0..cfg.trials)?;
    if tally.completed == 0 {
        return Err(Error::RoundsExceeded(cfg.max_rounds));
    }
    Ok(tally.finish(&cfg.schedule))
}

/// Empirical `P[E_{n_j}]` with 95% Wilson intervals.
pub fn empirical_trajectory(
    result: &SimResult,
    schedule: &IncrementSchedule,
) -> Vec<TrajectoryPoint> {
    schedule
        .blocklengths()
        .into_iter()
        .enumerate()
        .map(|(j, n)| {
            let (lo, hi) = wilson_interval(
                result.tally.failures[j],
                result.tally.rounds,
                1.959_963_984_540_054,
            );
            TrajectoryPoint {
                attempt: j + 1,
                n,
                p_hat: result.attempt_error[j],
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect()
}
