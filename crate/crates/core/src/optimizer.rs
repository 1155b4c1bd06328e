//! Searches over increment schedules.
//!
//! Every search is deterministic: candidates with objective values within
//! [`TIE_TOLERANCE`] are ordered by smaller `N`, then by lexicographically
//! smaller increments. The longest blocklength is capped at
//! `ceil(6k / C)` unless `SearchSpec::n_cap` overrides it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::{ceil, floor, fmax};

use crate::channels::ChannelSpec;
use crate::chernoff::chernoff_profile;
use crate::error::{Error, Result};
use crate::rcsp::{
    expected_latency, joint_profile_bd, marginal_bd, marginal_profile_bd, ErrorProfile,
    IncrementSchedule, JointOptions, Jointness, LatencyMode, PerformancePoint, Provenance,
};

pub const TIE_TOLERANCE: f64 = 1e-9;

/// Half-width of the window for `I_1` in the non-uniform search, relative
/// to the uniform optimum.
pub const FIRST_INCREMENT_WINDOW: f64 = 0.3;

/// `ceil(6k / C)`.
pub fn blocklength_cap(k: u32, capacity: f64) -> u32 {
    ceil(6.0 * k as f64 / capacity) as u32
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSpec {
    pub k: u32,
    pub m: u32,
    pub channel: ChannelSpec,
    /// Profile used to score candidates.
    pub jointness: Jointness,
    pub latency: LatencyMode,
    /// Restrict to `n1` followed by equal increments.
    pub uniform: bool,
    /// Upper limit on `P[E_{n_m}]`.
    pub p_outage: Option<f64>,
    pub ell_max: Option<f64>,
    pub n_cap: u32,
    pub joint: JointOptions,
}

impl SearchSpec {
    /// Repeated IR-NTC scored with the exact joint profile on AWGN and the
    /// marginal profile on the BSC.
    pub fn new(k: u32, m: u32, channel: ChannelSpec) -> Result<Self> {
        let capacity = channel.capacity();
        if !(capacity > 0.0) {
            return Err(Error::InvalidChannel("capacity must be positive"));
        }
        let spec = Self {
            k,
            m,
            channel,
            jointness: if channel.is_bsc() {
                Jointness::Marginal
            } else {
                Jointness::JointExact
            },
            latency: LatencyMode::Repeated,
            uniform: false,
            p_outage: None,
            ell_max: None,
            n_cap: blocklength_cap(k, capacity),
            joint: JointOptions::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 {
            return Err(Error::InvalidArgument("k and m must be positive"));
        }
        if self.n_cap < self.m {
            return Err(Error::InvalidArgument("blocklength cap leaves no schedule"));
        }
        if let Some(p) = self.p_outage {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidArgument("p_outage must lie in (0, 1]"));
            }
        }
        if let Some(l) = self.ell_max {
            if !(l > 0.0) {
                return Err(Error::InvalidArgument("ell_max must be positive"));
            }
        }
        if self.channel.is_bsc() && self.jointness != Jointness::Marginal {
            return Err(Error::WrongChannel("AWGN"));
        }
        Ok(())
    }
}

/// A non-dominated `(ell, objective)` pair seen during a search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierPoint {
    pub ell: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub schedule: IncrementSchedule,
    pub profile: ErrorProfile,
    pub point: PerformancePoint,
    /// Throughput for repeated operation; `k (1 - P[E_{n_m}]) / ell` for
    /// non-repeating operation.
    pub objective: f64,
    pub evaluations: u64,
    pub frontier: Vec<FrontierPoint>,
    /// The optimum touches the edge of the searched region.
    pub at_boundary: bool,
}

/// Objective value of an evaluated point.
pub fn objective(point: &PerformancePoint) -> f64 {
    point.rate * (1.0 - point.outage.unwrap_or(0.0))
}

/// Scores `schedule` the way the search does.
pub fn evaluate(
    spec: &SearchSpec,
    schedule: &IncrementSchedule,
) -> Result<(ErrorProfile, PerformancePoint)> {
    let profile = match spec.jointness {
        Jointness::Marginal => marginal_profile_bd(schedule, &spec.channel)?,
        Jointness::JointExact => joint_profile_bd(schedule, &spec.channel, &spec.joint)?,
        Jointness::JointChernoffUb => chernoff_profile(schedule, &spec.channel, true)?,
        Jointness::JointChernoffLb => chernoff_profile(schedule, &spec.channel, false)?,
    };
    let point = expected_latency(&profile, spec.latency)?;
    Ok((profile, point))
}

fn satisfies(spec: &SearchSpec, ell: f64, last: f64) -> bool {
    spec.ell_max.is_none_or(|l| ell <= l) && spec.p_outage.is_none_or(|p| last <= p)
}

#[derive(Clone, Debug)]
struct Candidate {
    objective: f64,
    increments: Vec<u32>,
}

impl Candidate {
    fn total(&self) -> u32 {
        self.increments.iter().sum()
    }

    fn beats(&self, other: &Candidate) -> bool {
        if self.objective > other.objective + TIE_TOLERANCE {
            return true;
        }
        if self.objective < other.objective - TIE_TOLERANCE {
            return false;
        }
        (self.total(), &self.increments) < (other.total(), &other.increments)
    }
}

#[derive(Default)]
struct Frontier(Vec<FrontierPoint>);

impl Frontier {
    fn offer(&mut self, ell: f64, objective: f64) {
        if self
            .0
            .iter()
            .any(|p| p.ell <= ell && p.objective >= objective)
        {
            return;
        }
        self.0
            .retain(|p| !(ell <= p.ell && objective >= p.objective));
        self.0.push(FrontierPoint { ell, objective });
    }

    fn into_sorted(mut self) -> Vec<FrontierPoint> {
        self.0.sort_by(|a, b| a.ell.total_cmp(&b.ell));
        self.0
    }
}

fn finish(
    spec: &SearchSpec,
    best: Candidate,
    evaluations: u64,
    frontier: Frontier,
    at_boundary: bool,
) -> Result<OptimizationResult> {
    let schedule = IncrementSchedule::new(spec.k, best.increments)?;
    let (profile, point) = evaluate(spec, &schedule)?;
    Ok(OptimizationResult {
        schedule,
        profile,
        objective: objective(&point),
        point,
        evaluations,
        frontier: frontier.into_sorted(),
        at_boundary,
    })
}

/// Single-transmission ARQ: the `n1 >= k` maximizing `(k/n1)(1 - P[zeta_{n1}])`.
///
/// Ternary search over the quasi-concave throughput, then a sweep of +-5
/// around the optimum, repeated until the optimum stays put.
pub fn optimize_arq(k: u32, ch: &ChannelSpec) -> Result<OptimizationResult> {
    let mut spec = SearchSpec::new(k, 1, *ch)?;
    spec.jointness = Jointness::Marginal;
    let cap = spec.n_cap.max(k);
    let mut cache: BTreeMap<u32, f64> = BTreeMap::new();
    let mut rate = |n: u32| -> Result<f64> {
        if let Some(&r) = cache.get(&n) {
            return Ok(r);
        }
        let r = k as f64 / n as f64 * (1.0 - marginal_bd(n, k, ch)?);
        cache.insert(n, r);
        Ok(r)
    };
    let (mut lo, mut hi) = (k, cap);
    while hi - lo > 2 {
        let a = lo + (hi - lo) / 3;
        let b = hi - (hi - lo) / 3;
        if rate(a)? < rate(b)? {
            lo = a + 1;
        } else {
            hi = b - 1;
        }
    }
    let better = |n: u32, rn: f64, best: u32, rb: f64| {
        rn > rb + TIE_TOLERANCE || (rn >= rb - TIE_TOLERANCE && n < best)
    };
    let mut best = lo;
    let mut best_rate = rate(lo)?;
    for n in lo + 1..=hi {
        let r = rate(n)?;
        if better(n, r, best, best_rate) {
            (best, best_rate) = (n, r);
        }
    }
    loop {
        let center = best;
        for n in center.saturating_sub(5).max(k)..=(center + 5).min(cap) {
            let r = rate(n)?;
            if better(n, r, best, best_rate) {
                (best, best_rate) = (n, r);
            }
        }
        if best == center {
            break;
        }
    }
    let mut frontier = Frontier::default();
    for &r in cache.values() {
        frontier.offer(k as f64 / r, r);
    }
    let evaluations = cache.len() as u64;
    let candidate = Candidate {
        objective: best_rate,
        increments: alloc::vec![best],
    };
    let mut result = finish(&spec, candidate, evaluations, frontier, best == cap)?;
    result.point.provenance = Provenance::Arq;
    Ok(result)
}

/// Marginal error probabilities for every blocklength `1..=cap`.
fn marginal_table(spec: &SearchSpec) -> Result<Vec<f64>> {
    (1..=spec.n_cap)
        .map(|n| marginal_bd(n, spec.k, &spec.channel))
        .collect()
}

/// Exhaustive search over `(n1, I)` scored with marginal profiles.
fn uniform_search(spec: &SearchSpec, table: &[f64]) -> Result<(Candidate, u64, Frontier, bool)> {
    let m = spec.m as usize;
    let cap = spec.n_cap;
    let p = |n: u32| table[n as usize - 1];
    let mut best: Option<Candidate> = None;
    let mut frontier = Frontier::default();
    let mut evaluations = 0u64;
    let n1_max = match (spec.ell_max, spec.latency) {
        // ell >= n1 in either mode
        (Some(l), _) => (floor(l) as u32).min(cap),
        _ => cap,
    };
    for n1 in 1..=n1_max.min(cap + 1 - spec.m) {
        let i_max = if m == 1 {
            1
        } else {
            (cap - n1) / (m as u32 - 1)
        };
        for step in 1..=i_max {
            evaluations += 1;
            let mut num = n1 as f64;
            for j in 1..m {
                num += step as f64 * p(n1 + (j as u32 - 1) * step);
            }
            let last = p(n1 + (m as u32 - 1) * step);
            let ell = match spec.latency {
                LatencyMode::Repeated if last >= 1.0 => continue,
                LatencyMode::Repeated => num / (1.0 - last),
                LatencyMode::NonRepeating => num,
            };
            if !satisfies(spec, ell, last) {
                continue;
            }
            let obj = match spec.latency {
                LatencyMode::Repeated => spec.k as f64 / ell,
                LatencyMode::NonRepeating => spec.k as f64 * (1.0 - last) / ell,
            };
            frontier.offer(ell, obj);
            let mut increments = alloc::vec![n1];
            increments.extend(core::iter::repeat_n(step, m - 1));
            let c = Candidate {
                objective: obj,
                increments,
            };
            if best.as_ref().is_none_or(|b| c.beats(b)) {
                best = Some(c);
            }
        }
    }
    let best = best.ok_or(Error::Infeasible)?;
    let at_boundary = best.total() + (spec.m - 1).max(1) > cap;
    Ok((best, evaluations, frontier, at_boundary))
}

/// Best `n1` and uniform increment under marginal RCSP scoring.
pub fn optimize_uniform(spec: &SearchSpec) -> Result<OptimizationResult> {
    spec.validate()?;
    let mut spec = spec.clone();
    spec.jointness = Jointness::Marginal;
    let table = marginal_table(&spec)?;
    let (best, evaluations, frontier, at_boundary) = uniform_search(&spec, &table)?;
    finish(&spec, best, evaluations, frontier, at_boundary)
}

struct PatternSearch<'a> {
    spec: &'a SearchSpec,
    first: (u32, u32),
    cache: BTreeMap<Vec<u32>, Option<Candidate>>,
    frontier: Frontier,
}

impl PatternSearch<'_> {
    fn score(&mut self, increments: &[u32]) -> Option<Candidate> {
        if let Some(c) = self.cache.get(increments) {
            return c.clone();
        }
        let scored = self.score_uncached(increments);
        self.cache.insert(increments.to_vec(), scored.clone());
        scored
    }

    fn score_uncached(&mut self, increments: &[u32]) -> Option<Candidate> {
        let total: u32 = increments.iter().sum();
        if total > self.spec.n_cap || increments[0] < self.first.0 || increments[0] > self.first.1 {
            return None;
        }
        let schedule = IncrementSchedule::new(self.spec.k, increments.to_vec()).ok()?;
        let (profile, point) = evaluate(self.spec, &schedule).ok()?;
        if !satisfies(self.spec, point.ell, profile.joint[profile.joint.len() - 1]) {
            return None;
        }
        let obj = objective(&point);
        self.frontier.offer(point.ell, obj);
        Some(Candidate {
            objective: obj,
            increments: increments.to_vec(),
        })
    }

    /// Best-improvement moves of size `step`: single coordinates up and
    /// down, and transfers between pairs of coordinates.
    fn run(&mut self, start: Candidate, initial_step: u32) -> Candidate {
        let m = start.increments.len();
        let mut current = start;
        let mut step = initial_step.max(1);
        loop {
            let mut best_move: Option<Candidate> = None;
            let mut consider = |this: &mut Self, inc: Vec<u32>| {
                if let Some(c) = this.score(&inc) {
                    if best_move.as_ref().is_none_or(|b| c.beats(b)) {
                        best_move = Some(c);
                    }
                }
            };
            for j in 0..m {
                let mut up = current.increments.clone();
                up[j] += step;
                consider(self, up);
                if current.increments[j] > step {
                    let mut down = current.increments.clone();
                    down[j] -= step;
                    consider(self, down);
                }
            }
            for i in 0..m {
                for j in 0..m {
                    if i != j && current.increments[j] > step {
                        let mut t = current.increments.clone();
                        t[i] += step;
                        t[j] -= step;
                        consider(self, t);
                    }
                }
            }
            match best_move {
                Some(c) if c.beats(&current) => current = c,
                _ if step == 1 => return current,
                _ => step /= 2,
            }
        }
    }
}

fn initial_step(k: u32) -> u32 {
    (k / 16).max(1) * 4
}

fn nonuniform_from(spec: &SearchSpec, seeds: &[Vec<u32>]) -> Result<OptimizationResult> {
    let marginal_spec = SearchSpec {
        jointness: Jointness::Marginal,
        ..spec.clone()
    };
    let table = marginal_table(&marginal_spec)?;
    let (uniform, uniform_evals, _, _) = uniform_search(&marginal_spec, &table)?;
    let n1 = uniform.increments[0] as f64;
    let mut first = (
        (floor(n1 * (1.0 - FIRST_INCREMENT_WINDOW)) as u32).max(1),
        ceil(n1 * (1.0 + FIRST_INCREMENT_WINDOW)) as u32,
    );
    for s in seeds {
        first = (first.0.min(s[0]), first.1.max(s[0]));
    }
    let mut search = PatternSearch {
        spec,
        first,
        cache: BTreeMap::new(),
        frontier: Frontier::default(),
    };
    let mut start: Option<Candidate> = None;
    for inc in core::iter::once(&uniform.increments).chain(seeds) {
        if let Some(c) = search.score(inc) {
            if start.as_ref().is_none_or(|b| c.beats(b)) {
                start = Some(c);
            }
        }
    }
    let start = start.ok_or(Error::Infeasible)?;
    let best = search.run(start, initial_step(spec.k));
    let at_boundary = best.increments[0] == first.0
        || best.increments[0] == first.1
        || best.total() == spec.n_cap;
    let evaluations = uniform_evals + search.cache.len() as u64;
    finish(spec, best, evaluations, search.frontier, at_boundary)
}

/// Pattern search over arbitrary increments, started from the uniform
/// marginal optimum and scored with `spec.jointness`.
pub fn optimize_nonuniform(spec: &SearchSpec) -> Result<OptimizationResult> {
    spec.validate()?;
    if spec.m > 6 && spec.jointness == Jointness::JointExact {
        return Err(Error::InvalidArgument("exact joint search supports m <= 6"));
    }
    if spec.m == 1 && spec.latency == LatencyMode::Repeated && spec.ell_max.is_none() {
        return optimize_arq(spec.k, &spec.channel);
    }
    nonuniform_from(spec, &[])
}

/// Non-repeating IR-NTC maximizing `k (1 - P[E_{n_m}]) / ell` subject to
/// `P[E_{n_m}] <= p_outage`.
pub fn optimize_outage(spec: &SearchSpec, p_outage: f64) -> Result<OptimizationResult> {
    optimize_outage_sweep(spec, &[p_outage]).map(|mut v| v.remove(0))
}

/// [`optimize_outage`] for several limits. Limits are solved from the
/// tightest to the loosest, each search seeded with the previous optimum,
/// so throughput never increases as the limit tightens. Results follow the
/// order of `limits`.
pub fn optimize_outage_sweep(spec: &SearchSpec, limits: &[f64]) -> Result<Vec<OptimizationResult>> {
    let mut order: Vec<usize> = (0..limits.len()).collect();
    order.sort_by(|&a, &b| limits[a].total_cmp(&limits[b]));
    let mut out: Vec<Option<OptimizationResult>> = alloc::vec![None; limits.len()];
    let mut seeds: Vec<Vec<u32>> = Vec::new();
    for idx in order {
        let s = SearchSpec {
            latency: LatencyMode::NonRepeating,
            p_outage: Some(limits[idx]),
            ..spec.clone()
        };
        s.validate()?;
        let r = nonuniform_from(&s, &seeds)?;
        seeds = alloc::vec![r.schedule.increments().to_vec()];
        out[idx] = Some(r);
    }
    Ok(out
        .into_iter()
        .map(|r| r.expect("every limit solved"))
        .collect())
}

/// Largest `k` reachable within an expected latency for one SNR and `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrSweepPoint {
    pub snr_db: f64,
    pub m: u32,
    pub k: u32,
    pub schedule: IncrementSchedule,
    pub ell: f64,
    pub rate: f64,
    pub capacity: f64,
    pub gap: f64,
}

fn min_latency_uniform(
    k: u32,
    m: u32,
    ch: &ChannelSpec,
    ell_max: f64,
) -> Result<Option<(Candidate, f64)>> {
    if blocklength_cap(k, ch.capacity()) < m {
        return Ok(None);
    }
    let mut spec = SearchSpec::new(k, m, *ch)?;
    spec.jointness = Jointness::Marginal;
    spec.ell_max = Some(ell_max);
    let table = marginal_table(&spec)?;
    match uniform_search(&spec, &table) {
        Ok((c, ..)) => {
            let ell = k as f64 / c.objective;
            Ok(Some((c, ell)))
        }
        Err(Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// For each SNR and `m`, the largest `k` whose optimized uniform schedule
/// (marginal BD scoring) meets `ell <= ell_max`.
pub fn sweep_snr(ell_max: f64, m_list: &[u32], snr_db: &[f64]) -> Result<Vec<SnrSweepPoint>> {
    if !(ell_max > 0.0) {
        return Err(Error::InvalidArgument("ell_max must be positive"));
    }
    let mut out = Vec::new();
    for &db in snr_db {
        let ch = ChannelSpec::awgn_db(db)?;
        let capacity = ch.capacity();
        for &m in m_list {
            let feasible = |k: u32| min_latency_uniform(k, m, &ch, ell_max).map(|r| r.is_some());
            // smallest k whose blocklength cap admits m attempts
            let mut lo = 1;
            while blocklength_cap(lo, capacity) < m {
                lo += 1;
            }
            if !feasible(lo)? {
                continue;
            }
            let mut hi = (fmax(capacity * ell_max, 1.0) as u32).max(lo + 1);
            while feasible(hi)? {
                hi *= 2;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if feasible(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // guard against small non-monotone pockets above the bisection point
            let mut k = lo;
            for cand in lo + 1..lo + 4 {
                if feasible(cand)? {
                    k = cand;
                }
            }
            let (c, ell) = min_latency_uniform(k, m, &ch, ell_max)?.expect("k is feasible");
            let rate = k as f64 / ell;
            out.push(SnrSweepPoint {
                snr_db: db,
                m,
                k,
                schedule: IncrementSchedule::new(k, c.increments)?,
                ell,
                rate,
                capacity,
                gap: capacity - rate,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub attempt: usize,
    pub n: u32,
    pub joint: f64,
    pub marginal: f64,
}

/// The decoding error trajectory of an optimized schedule.
pub fn error_trajectory(result: &OptimizationResult) -> Vec<TrajectoryRow> {
    result
        .schedule
        .blocklengths()
        .into_iter()
        .enumerate()
        .map(|(j, n)| TrajectoryRow {
            attempt: j + 1,
            n,
            joint: result.profile.joint[j],
            marginal: result.profile.marginal[j],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awgn2() -> ChannelSpec {
        ChannelSpec::awgn_db(2.0).unwrap()
    }

    #[test]
    fn arq_matches_exhaustive_search() {
        for k in [16, 40] {
            let ch = awgn2();
            let r = optimize_arq(k, &ch).unwrap();
            let cap = blocklength_cap(k, ch.capacity());
            let mut best = (0, -1.0);
            for n in k..=cap {
                let rate = k as f64 / n as f64 * (1.0 - marginal_bd(n, k, &ch).unwrap());
                if rate > best.1 + TIE_TOLERANCE {
                    best = (n, rate);
                }
            }
            assert_eq!(r.schedule.increments(), &[best.0]);
        }
    }

    #[test]
    fn arq_noiseless_limit_uses_n1_equal_k() {
        let ch = ChannelSpec::awgn_db(80.0).unwrap();
        let r = optimize_arq(24, &ch).unwrap();
        assert_eq!(r.schedule.increments(), &[24]);
    }

    #[test]
    fn uniform_result_reevaluates_identically() {
        let mut spec = SearchSpec::new(16, 3, awgn2()).unwrap();
        spec.uniform = true;
        let r = optimize_uniform(&spec).unwrap();
        let again = expected_latency(
            &marginal_profile_bd(&r.schedule, &spec.channel).unwrap(),
            LatencyMode::Repeated,
        )
        .unwrap();
        assert_eq!(again.rate, r.point.rate);
        assert!(!r.frontier.is_empty());
    }

    #[test]
    fn nonuniform_m1_reduces_to_arq() {
        let spec = SearchSpec::new(16, 1, awgn2()).unwrap();
        assert_eq!(
            optimize_nonuniform(&spec).unwrap(),
            optimize_arq(16, &awgn2()).unwrap()
        );
    }

    #[test]
    fn outage_constraint_holds_and_is_monotone() {
        let spec = SearchSpec::new(16, 3, awgn2()).unwrap();
        let limits = [1.0, 1e-3, 1e-6];
        let rs = optimize_outage_sweep(&spec, &limits).unwrap();
        for (r, &p) in rs.iter().zip(&limits) {
            assert!(r.point.outage.unwrap() <= p);
        }
        assert!(rs[0].objective >= rs[1].objective);
        assert!(rs[1].objective >= rs[2].objective);
    }

    #[test]
    fn trajectory_of_single_attempt_is_marginal() {
        let r = optimize_arq(16, &awgn2()).unwrap();
        let t = error_trajectory(&r);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].joint, t[0].marginal);
    }

    #[test]
    fn infeasible_outage_is_reported() {
        let mut spec = SearchSpec::new(16, 2, awgn2()).unwrap();
        spec.n_cap = 20;
        assert_eq!(
            optimize_outage(&spec, 1e-12).unwrap_err(),
            Error::Infeasible
        );
    }
}
