//! Subcommand definitions and their table-producing runners.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ir_ntc_core::chernoff::chernoff_profile;
use ir_ntc_core::optimizer::{
    blocklength_cap, error_trajectory, optimize_arq, optimize_nonuniform, optimize_outage_sweep,
    optimize_uniform, sweep_snr, OptimizationResult, SearchSpec,
};
use ir_ntc_core::rcsp::{
    expected_latency, joint_profile_bd, marginal_profile_bd, marginal_profile_ml, JointOptions,
};
use ir_ntc_core::rcu::{
    blocklength_backoff, blocklength_rule, grid_start, loglog_increment, vlft_converse,
    vlft_infinite, vlft_repeated, vlft_truncated,
};
use ir_ntc_core::simulator::{
    empirical_trajectory, SimConfig, SimDecoder, DEFAULT_TRIALS_AWGN, DEFAULT_TRIALS_BSC,
};
use ir_ntc_core::trellis::{DecoderKind, TrellisCode};
use ir_ntc_core::{ChannelSpec, ErrorProfile, IncrementSchedule, Jointness, LatencyMode};
use rayon::prelude::*;

use crate::analysis::{dt_schedule, rcu_arq};
use crate::config::ChannelArg;
use crate::parallel;
use crate::table::{cell, list, opt, Table};

pub const DEFAULT_K_GRID: &str = "8,12,16,20,24,32,40,48,64,80,96,128";

#[derive(Parser, Debug, Clone)]
#[command(
    name = "ir-ntc",
    version,
    about = "Incremental-redundancy feedback lab: bounds, RCSP analysis, schedule optimization and simulation"
)]
pub struct Cli {
    /// JSON object of flag values for the subcommand; flags given on the
    /// command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Random-coding VLFT achievability bounds and the converse.
    Bounds(BoundsArgs),
    /// RCSP error trajectory and latency of a schedule.
    Rcsp(RcspArgs),
    /// Schedule optimization (ARQ, uniform, non-uniform, outage, SNR sweep).
    Optimize(OptimizeArgs),
    /// Monte-Carlo simulation of repeated IR-NTC.
    Simulate(SimulateArgs),
    /// Named preset writing a directory of CSV files and a manifest.
    Recipe(RecipeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    /// Unbounded blocklength, decoding after every symbol.
    Infinite,
    /// Blocklength cut at N with residual error xi_N.
    Truncated,
    /// Restart after N; decoding every I symbols from n1.
    Repeated,
    /// Upper bound on throughput at the latencies in --ell.
    Converse,
    /// Single transmission of length N repeated until success.
    Arq,
    /// AWGN DT-style random-coding bound, repeated operation.
    Dt,
}

/// Decoding increment: an integer or `loglog` for ceil(log2 k).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepArg {
    Fixed(u32),
    LogLog,
}

impl FromStr for StepArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("loglog") {
            return Ok(Self::LogLog);
        }
        let v: u32 = s.parse().with_context(|| format!("bad increment {s:?}"))?;
        if v == 0 {
            bail!("increment must be positive");
        }
        Ok(Self::Fixed(v))
    }
}

impl StepArg {
    fn resolve(self, k: u32) -> u32 {
        match self {
            Self::Fixed(v) => v,
            Self::LogLog => loglog_increment(k),
        }
    }
}

#[derive(Args, Debug, Clone)]
#[command(args_override_self = true)]
pub struct BoundsArgs {
    /// Channel, bsc:<p> or awgn:<snr_db>.
    #[arg(long, default_value = "bsc:0.0789")]
    pub channel: ChannelArg,
    #[arg(long, value_enum, default_value_t = BoundKind::Infinite)]
    pub kind: BoundKind,
    /// Message sizes in bits.
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_K_GRID)]
    pub k: Vec<u32>,
    /// Fixed maximum blocklength.
    #[arg(long = "N", value_name = "N")]
    pub n_max: Option<u32>,
    /// N = ceil(k / (C - delta C)), delta given as a fraction of capacity.
    #[arg(long, value_name = "DELTA")]
    pub backoff: Option<f64>,
    /// N = ceil(k/C + a log2(k/C) + b).
    #[arg(long, value_delimiter = ',', value_name = "A,B")]
    pub log_rule: Option<Vec<f64>>,
    /// Decoding increment (integer or `loglog`).
    #[arg(long = "I", value_name = "I", default_value = "1")]
    pub step: StepArg,
    /// First decoding point; defaults to the smallest n1 that puts N on the grid.
    #[arg(long)]
    pub n1: Option<u32>,
    /// Explicit schedule for --kind dt (single k).
    #[arg(long, value_delimiter = ',')]
    pub increments: Option<Vec<u32>>,
    /// Latencies for --kind converse.
    #[arg(long, value_delimiter = ',')]
    pub ell: Option<Vec<f64>>,
    /// Tail tolerance of the infinite RCU sum.
    #[arg(long, default_value_t = 1e-9)]
    pub tail_tol: f64,
    /// Monte-Carlo paths for --kind dt.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
enum NRule {
    Fixed(u32),
    Backoff(f64),
    Log(f64, f64),
    Cap,
}

impl BoundsArgs {
    fn rule(&self, default: NRule) -> Result<NRule> {
        let given = [
            self.n_max.is_some(),
            self.backoff.is_some(),
            self.log_rule.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() > 1 {
            bail!("give at most one of --N, --backoff, --log-rule");
        }
        Ok(match (&self.n_max, &self.backoff, &self.log_rule) {
            (Some(n), ..) => NRule::Fixed(*n),
            (_, Some(d), _) => NRule::Backoff(*d),
            (.., Some(ab)) => match ab.as_slice() {
                [a, b] => NRule::Log(*a, *b),
                _ => bail!("--log-rule takes exactly two values"),
            },
            _ => default,
        })
    }
}

fn blocklength(rule: NRule, k: u32, c: f64) -> Result<u32> {
    let n = match rule {
        NRule::Fixed(n) => n,
        NRule::Backoff(d) => {
            if !(0.0..1.0).contains(&d) {
                bail!("--backoff must lie in [0, 1)");
            }
            blocklength_backoff(k, c, d * c)
        }
        NRule::Log(a, b) => blocklength_rule(k, c, a, b),
        NRule::Cap => blocklength_cap(k, c),
    };
    if n == 0 {
        bail!("blocklength rule gives N = 0 for k = {k}");
    }
    Ok(n)
}

pub const BOUNDS_HEADERS: [&str; 8] = ["k", "N", "I", "n1", "ell", "rate", "epsilon", "bound_kind"];

pub fn run_bounds(a: &BoundsArgs) -> Result<Table> {
    let ch = a.channel.0;
    let c = ch.capacity();
    let mut t = Table::new(&BOUNDS_HEADERS);
    let kind = a
        .kind
        .to_possible_value()
        .expect("named variant")
        .get_name()
        .to_string();
    if a.kind == BoundKind::Converse {
        let ells = a
            .ell
            .clone()
            .unwrap_or_else(|| (1..=30).map(|i| 10.0 * i as f64).collect());
        for ell in ells {
            let r = vlft_converse(ell, &ch)?;
            t.push(vec![
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                cell(ell),
                cell(r),
                cell(0),
                kind.clone(),
            ]);
        }
        return Ok(t);
    }
    if a.increments.is_some() && (a.kind != BoundKind::Dt || a.k.len() != 1) {
        bail!("--increments needs --kind dt and a single k");
    }
    let rows =
        a.k.par_iter()
            .map(|&k| -> Result<Vec<String>> {
                let row = |n: Option<u32>, i: u32, n1: u32, ell: f64, rate: f64, eps: f64| {
                    vec![
                        cell(k),
                        opt(n),
                        cell(i),
                        cell(n1),
                        cell(ell),
                        cell(rate),
                        cell(eps),
                        kind.clone(),
                    ]
                };
                Ok(match a.kind {
                    BoundKind::Infinite => {
                        let p = vlft_infinite(k, &ch, a.tail_tol)?;
                        row(None, 1, 1, p.ell, p.rate, p.epsilon)
                    }
                    BoundKind::Truncated => {
                        let n = blocklength(a.rule(NRule::Backoff(0.4))?, k, c)?;
                        let p = vlft_truncated(k, n, &ch)?;
                        row(Some(n), 1, 1, p.ell, p.rate, p.epsilon)
                    }
                    BoundKind::Repeated => {
                        let n = blocklength(a.rule(NRule::Log(10.0, 30.0))?, k, c)?;
                        let i = a.step.resolve(k);
                        let n1 = a.n1.unwrap_or_else(|| grid_start(n, i));
                        let p = vlft_repeated(k, n, i, n1, &ch)?;
                        row(Some(n), i, n1, p.ell, p.rate, p.epsilon)
                    }
                    BoundKind::Arq => match a.rule(NRule::Cap)? {
                        NRule::Cap => {
                            let (n, p) = rcu_arq(k, &ch)?;
                            row(Some(n), n, n, p.ell, p.rate, 0.0)
                        }
                        rule => {
                            let n = blocklength(rule, k, c)?;
                            let p = vlft_repeated(k, n, n, n, &ch)?;
                            row(Some(n), n, n, p.ell, p.rate, 0.0)
                        }
                    },
                    BoundKind::Dt => {
                        let schedule = match &a.increments {
                            Some(inc) => IncrementSchedule::new(k, inc.clone())?,
                            None => {
                                let n = blocklength(a.rule(NRule::Cap)?, k, c)?;
                                let i = a.step.resolve(k);
                                let n1 = a.n1.unwrap_or_else(|| grid_start(n, i));
                                if n < n1 || !(n - n1).is_multiple_of(i) {
                                    bail!("N = {n} is not on the decoding grid n1 + jI");
                                }
                                IncrementSchedule::uniform(k, n1, i, (n - n1) / i + 1)?
                            }
                        };
                        let (p, _) = dt_schedule(&schedule, &ch, a.samples, a.seed)?;
                        let inc = schedule.increments();
                        let i = if inc.len() > 1 && inc[1..].iter().all(|&x| x == inc[1]) {
                            inc[1]
                        } else {
                            0
                        };
                        let mut r = row(Some(schedule.total()), i, inc[0], p.ell, p.rate, 0.0);
                        if i == 0 {
                            r[2] = String::new();
                        }
                        r
                    }
                    BoundKind::Converse => unreachable!("handled above"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// A schedule given either explicitly or as `n1`, `I`, `m`.
#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    /// Increments I_1,...,I_m (I_1 = n1).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n1", "step"])]
    pub increments: Option<Vec<u32>>,
    /// First blocklength; defaults to k.
    #[arg(long)]
    pub n1: Option<u32>,
    /// Uniform increment after n1.
    #[arg(long = "I", value_name = "I")]
    pub step: Option<u32>,
    /// Number of attempts for the uniform form.
    #[arg(long)]
    pub m: Option<u32>,
    /// Uniform form with m = FACTOR * k attempts.
    #[arg(long, value_name = "FACTOR", conflicts_with = "m")]
    pub m_per_k: Option<u32>,
}

impl ScheduleArgs {
    pub fn schedule(&self, k: u32) -> Result<IncrementSchedule> {
        if let Some(inc) = &self.increments {
            if self.m.is_some_and(|m| m as usize != inc.len()) {
                bail!("--m disagrees with the number of increments");
            }
            return Ok(IncrementSchedule::new(k, inc.clone())?);
        }
        let m = match (self.m, self.m_per_k) {
            (Some(m), _) => m,
            (None, Some(f)) => f * k,
            (None, None) => {
                bail!("give --increments, or --m / --m-per-k with optional --n1 and --I")
            }
        };
        let step = self.step.unwrap_or(1);
        Ok(IncrementSchedule::uniform(
            k,
            self.n1.unwrap_or(k),
            step,
            m,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Bounded-distance decoding.
    Bd,
    /// Maximum-likelihood cone-packing approximation (AWGN, marginal only).
    Ml,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum JointnessArg {
    Marginal,
    Joint,
    #[value(name = "chernoff_ub")]
    ChernoffUb,
    #[value(name = "chernoff_lb")]
    ChernoffLb,
}

impl From<JointnessArg> for Jointness {
    fn from(j: JointnessArg) -> Self {
        match j {
            JointnessArg::Marginal => Jointness::Marginal,
            JointnessArg::Joint => Jointness::JointExact,
            JointnessArg::ChernoffUb => Jointness::JointChernoffUb,
            JointnessArg::ChernoffLb => Jointness::JointChernoffLb,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepeatArg {
    Repeated,
    Nonrepeating,
}

impl From<RepeatArg> for LatencyMode {
    fn from(r: RepeatArg) -> Self {
        match r {
            RepeatArg::Repeated => LatencyMode::Repeated,
            RepeatArg::Nonrepeating => LatencyMode::NonRepeating,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RcspEmit {
    /// One row per attempt.
    Attempts,
    /// One row per k.
    Summary,
}

#[derive(Args, Debug, Clone)]
#[command(args_override_self = true)]
pub struct RcspArgs {
    /// Channel, bsc:<p> or awgn:<snr_db>.
    #[arg(long, default_value = "awgn:2")]
    pub channel: ChannelArg,
    /// Message sizes in bits.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Bd)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = JointnessArg::Marginal)]
    pub jointness: JointnessArg,
    #[arg(long, value_enum, default_value_t = RepeatArg::Repeated)]
    pub repeat: RepeatArg,
    #[arg(long, value_enum, default_value_t = RcspEmit::Attempts)]
    pub emit: RcspEmit,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error profile for a decoding mode and jointness.
pub fn profile(
    schedule: &IncrementSchedule,
    ch: &ChannelSpec,
    mode: ModeArg,
    jointness: Jointness,
) -> Result<ErrorProfile> {
    Ok(match (mode, jointness) {
        (ModeArg::Bd, Jointness::Marginal) => marginal_profile_bd(schedule, ch)?,
        (ModeArg::Bd, Jointness::JointExact) => {
            joint_profile_bd(schedule, ch, &JointOptions::default())?
        }
        (ModeArg::Bd, Jointness::JointChernoffUb) => chernoff_profile(schedule, ch, true)?,
        (ModeArg::Bd, Jointness::JointChernoffLb) => chernoff_profile(schedule, ch, false)?,
        (ModeArg::Ml, Jointness::Marginal) => marginal_profile_ml(schedule, ch)?,
        (ModeArg::Ml, _) => bail!("ML decoding supports the marginal profile only"),
    })
}

pub fn run_rcsp(a: &RcspArgs) -> Result<Table> {
    let ch = a.channel.0;
    let rows =
        a.k.par_iter()
            .map(|&k| -> Result<Vec<Vec<String>>> {
                let s = a.schedule.schedule(k)?;
                let p = profile(&s, &ch, a.mode, a.jointness.into())?;
                let pt = expected_latency(&p, a.repeat.into())?;
                Ok(match a.emit {
                    RcspEmit::Attempts => s
                        .blocklengths()
                        .iter()
                        .enumerate()
                        .map(|(j, &n)| {
                            vec![
                                cell(k),
                                cell(j + 1),
                                cell(n),
                                cell(p.marginal[j]),
                                cell(p.joint[j]),
                                cell(pt.ell),
                                cell(pt.rate),
                                opt(pt.outage),
                            ]
                        })
                        .collect(),
                    RcspEmit::Summary => vec![vec![
                        cell(k),
                        cell(s.m()),
                        list(s.increments()),
                        cell(s.total()),
                        cell(pt.ell),
                        cell(pt.rate),
                        opt(pt.outage),
                    ]],
                })
            })
            .collect::<Result<Vec<_>>>()?;
    let mut t = match a.emit {
        RcspEmit::Attempts => Table::new(&[
            "k", "j", "n_j", "marginal", "joint", "ell", "rate", "outage",
        ]),
        RcspEmit::Summary => Table::new(&["k", "m", "increments", "N", "ell", "rate", "outage"]),
    };
    rows.into_iter().flatten().for_each(|r| t.push(r));
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizeEmit {
    /// Optimized schedules.
    Result,
    /// Non-dominated (ell, objective) pairs seen by the search.
    Frontier,
    /// Decoding error trajectory of each optimum.
    Trajectory,
}

#[derive(Args, Debug, Clone)]
#[command(args_override_self = true)]
pub struct OptimizeArgs {
    /// Channel, bsc:<p> or awgn:<snr_db>.
    #[arg(long, default_value = "awgn:2")]
    pub channel: ChannelArg,
    /// Message sizes in bits.
    #[arg(long, value_delimiter = ',', required_unless_present = "sweep_snr")]
    pub k: Vec<u32>,
    /// Numbers of transmissions.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub m: Vec<u32>,
    /// Single-transmission ARQ (ignores --m).
    #[arg(long, conflicts_with_all = ["uniform", "outage", "sweep_snr"])]
    pub arq: bool,
    /// Restrict to n1 followed by equal increments (marginal scoring).
    #[arg(long, conflicts_with = "outage")]
    pub uniform: bool,
    /// Non-repeating operation with P[E_m] at most each of these limits.
    #[arg(long, value_delimiter = ',')]
    pub outage: Vec<f64>,
    /// Upper limit on expected latency.
    #[arg(long)]
    pub ell_max: Option<f64>,
    /// Profile used to score schedules (default: joint on AWGN, marginal on BSC).
    #[arg(long, value_enum)]
    pub jointness: Option<JointnessArg>,
    /// For each SNR in dB and each m, the largest k meeting --ell-max.
    #[arg(long, value_delimiter = ',', requires = "ell_max")]
    pub sweep_snr: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = OptimizeEmit::Result)]
    pub emit: OptimizeEmit,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn uniform_parts(inc: &[u32]) -> (u32, Option<u32>) {
    let step = (inc.len() > 1 && inc[1..].iter().all(|&x| x == inc[1])).then(|| inc[1]);
    (inc[0], step)
}

pub fn run_optimize(a: &OptimizeArgs) -> Result<Table> {
    let ch = a.channel.0;
    if let Some(snrs) = &a.sweep_snr {
        let ell_max = a
            .ell_max
            .ok_or_else(|| anyhow!("--sweep-snr needs --ell-max"))?;
        let mut t = Table::new(&[
            "snr_db", "m", "k", "n1", "I", "N", "ell", "rate", "capacity", "gap",
        ]);
        for p in sweep_snr(ell_max, &a.m, snrs)? {
            let (n1, step) = uniform_parts(p.schedule.increments());
            t.push(vec![
                cell(p.snr_db),
                cell(p.m),
                cell(p.k),
                cell(n1),
                opt(step),
                cell(p.schedule.total()),
                cell(p.ell),
                cell(p.rate),
                cell(p.capacity),
                cell(p.gap),
            ]);
        }
        return Ok(t);
    }
    let ms = if a.arq { vec![1] } else { a.m.clone() };
    let jobs: Vec<(u32, u32)> =
        a.k.iter()
            .flat_map(|&k| ms.iter().map(move |&m| (k, m)))
            .collect();
    let results = jobs
        .par_iter()
        .map(
            |&(k, m)| -> Result<Vec<(Option<f64>, OptimizationResult)>> {
                if a.arq {
                    return Ok(vec![(None, optimize_arq(k, &ch)?)]);
                }
                let mut spec = SearchSpec::new(k, m, ch)?;
                spec.ell_max = a.ell_max;
                if let Some(j) = a.jointness {
                    spec.jointness = j.into();
                }
                spec.uniform = a.uniform;
                if !a.outage.is_empty() {
                    let r = optimize_outage_sweep(&spec, &a.outage)?;
                    return Ok(a.outage.iter().copied().map(Some).zip(r).collect());
                }
                let r = if a.uniform {
                    optimize_uniform(&spec)?
                } else {
                    optimize_nonuniform(&spec)?
                };
                Ok(vec![(None, r)])
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(Option<f64>, OptimizationResult)> = results.into_iter().flatten().collect();
    let mut t = match (a.emit, a.arq) {
        (OptimizeEmit::Result, true) => {
            Table::new(&["k", "n1", "code_rate", "rate", "ell", "at_boundary"])
        }
        (OptimizeEmit::Result, false) => Table::new(&[
            "k",
            "m",
            "increments",
            "n1",
            "I",
            "N",
            "ell",
            "rate",
            "objective",
            "p_outage",
            "outage",
            "evaluations",
            "at_boundary",
        ]),
        (OptimizeEmit::Frontier, _) => Table::new(&["k", "m", "p_outage", "ell", "objective"]),
        (OptimizeEmit::Trajectory, _) => {
            Table::new(&["k", "m", "p_outage", "attempt", "n", "joint", "marginal"])
        }
    };
    for (limit, r) in &results {
        let k = r.schedule.k();
        let m = r.schedule.m();
        match a.emit {
            OptimizeEmit::Result if a.arq => {
                let n1 = r.schedule.total();
                t.push(vec![
                    cell(k),
                    cell(n1),
                    cell(k as f64 / n1 as f64),
                    cell(r.point.rate),
                    cell(r.point.ell),
                    cell(r.at_boundary),
                ]);
            }
            OptimizeEmit::Result => {
                let (n1, step) = uniform_parts(r.schedule.increments());
                t.push(vec![
                    cell(k),
                    cell(m),
                    list(r.schedule.increments()),
                    cell(n1),
                    opt(step),
                    cell(r.schedule.total()),
                    cell(r.point.ell),
                    cell(r.point.rate),
                    cell(r.objective),
                    opt(*limit),
                    opt(r.point.outage),
                    cell(r.evaluations),
                    cell(r.at_boundary),
                ]);
            }
            OptimizeEmit::Frontier => {
                for f in &r.frontier {
                    t.push(vec![
                        cell(k),
                        cell(m),
                        opt(*limit),
                        cell(f.ell),
                        cell(f.objective),
                    ]);
                }
            }
            OptimizeEmit::Trajectory => {
                for row in error_trajectory(r) {
                    t.push(vec![
                        cell(k),
                        cell(m),
                        opt(*limit),
                        cell(row.attempt),
                        cell(row.n),
                        cell(row.joint),
                        cell(row.marginal),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CodeArg {
    /// 64-state tail-biting convolutional code.
    Cc64,
    /// 1024-state tail-biting convolutional code.
    Cc1024,
    /// Idealized bounded-distance decoder at the RCSP radii.
    IdealBd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    /// Exact tail-biting ML.
    Exact,
    /// Wrap-around Viterbi.
    Wava,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimEmit {
    Point,
    Trajectory,
}

#[derive(Args, Debug, Clone)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    /// Channel, bsc:<p> or awgn:<snr_db>.
    #[arg(long, default_value = "awgn:2")]
    pub channel: ChannelArg,
    #[arg(long, value_enum, default_value_t = CodeArg::Cc64)]
    pub code: CodeArg,
    /// Decoder (default: exact for cc64, wava for cc1024).
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderArg>,
    /// Wrap-around passes for the wava decoder.
    #[arg(long, default_value_t = 4)]
    pub wraps: u32,
    /// Message size in bits.
    #[arg(long)]
    pub k: u32,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Trials (default: 100000 on the BSC, 20000 on AWGN).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Seed of the trial streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Seed of the rate-matching interleavers.
    #[arg(long, default_value_t = 0)]
    pub interleaver_seed: u64,
    /// Rounds after which a trial is aborted.
    #[arg(long, default_value_t = 1000)]
    pub max_rounds: u32,
    #[arg(long, value_enum, default_value_t = SimEmit::Point)]
    pub emit: SimEmit,
    /// CSV output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn config(&self) -> Result<SimConfig> {
        let ch = self.channel.0;
        let decoder = match self.code {
            CodeArg::IdealBd => SimDecoder::IdealBd,
            CodeArg::Cc64 | CodeArg::Cc1024 => {
                let code = if self.code == CodeArg::Cc64 {
                    TrellisCode::cc64()
                } else {
                    TrellisCode::cc1024()
                };
                let default = if self.code == CodeArg::Cc64 {
                    DecoderArg::Exact
                } else {
                    DecoderArg::Wava
                };
                let kind = match self.decoder.unwrap_or(default) {
                    DecoderArg::Exact => DecoderKind::ExactMl,
                    DecoderArg::Wava => DecoderKind::Wava { wraps: self.wraps },
                };
                SimDecoder::Code { code, kind }
            }
        };
        let trials = self.trials.unwrap_or(if ch.is_bsc() {
            DEFAULT_TRIALS_BSC
        } else {
            DEFAULT_TRIALS_AWGN
        });
        let cfg = SimConfig {
            channel: ch,
            decoder,
            schedule: self.schedule.schedule(self.k)?,
            trials,
            seed: self.seed,
            interleaver_seed: self.interleaver_seed,
            max_rounds: self.max_rounds,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run_simulate(a: &SimulateArgs) -> Result<Table> {
    let cfg = a.config()?;
    let r = parallel::simulate(&cfg)?;
    let code = a
        .code
        .to_possible_value()
        .expect("named variant")
        .get_name()
        .to_string();
    Ok(match a.emit {
        SimEmit::Point => {
            let mut t = Table::new(&[
                "k",
                "code",
                "m",
                "N",
                "trials",
                "completed",
                "aborted",
                "ell",
                "ell_std_err",
                "rate",
                "rate_std_err",
                "mean_rounds",
            ]);
            let k = cfg.schedule.k() as f64;
            t.push(vec![
                cell(cfg.schedule.k()),
                code,
                cell(cfg.schedule.m()),
                cell(cfg.schedule.total()),
                cell(cfg.trials),
                cell(r.tally.completed),
                cell(r.tally.aborted),
                cell(r.ell),
                cell(r.ell_std_err),
                cell(r.rate),
                cell(k * r.ell_std_err / (r.ell * r.ell)),
                cell(r.tally.rounds as f64 / (r.tally.completed + r.tally.aborted) as f64),
            ]);
            t
        }
        SimEmit::Trajectory => {
            let mut t = Table::new(&["attempt", "n", "p_hat", "ci_low", "ci_high", "rounds"]);
            for p in empirical_trajectory(&r, &cfg.schedule) {
                t.push(vec![
                    cell(p.attempt),
                    cell(p.n),
                    cell(p.p_hat),
                    cell(p.ci_low),
                    cell(p.ci_high),
                    cell(r.tally.rounds),
                ]);
            }
            t
        }
    })
}

#[derive(Args, Debug, Clone)]
#[command(args_override_self = true)]
pub struct RecipeArgs {
    /// Preset name (table1, table2, table3, fig1, fig2, fig4, fig9, fig11, fig12, fig13).
    pub name: String,
    /// Output directory (default: ./<name>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every Monte-Carlo sub-task.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the trial count of simulation sub-tasks.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Also write a gnuplot script per CSV.
    #[arg(long)]
    pub gnuplot: bool,
}

/// Runs an analysis subcommand and returns its table.
pub fn run_table(cmd: &Command) -> Result<Table> {
    match cmd {
        Command::Bounds(a) => run_bounds(a),
        Command::Rcsp(a) => run_rcsp(a),
        Command::Optimize(a) => run_optimize(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Recipe(_) => bail!("recipes do not produce a single table"),
    }
}

/// Output path of an analysis subcommand.
pub fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Bounds(a) => a.out.as_ref(),
        Command::Rcsp(a) => a.out.as_ref(),
        Command::Optimize(a) => a.out.as_ref(),
        Command::Simulate(a) => a.out.as_ref(),
        Command::Recipe(a) => a.out.as_ref(),
    }
}
