//! Curve helpers shared by the subcommands, the recipes and the tests.

use anyhow::{bail, Result};
use ir_ntc_core::optimizer::blocklength_cap;
use ir_ntc_core::rcsp::IncrementSchedule;
use ir_ntc_core::rcu::{dt_bound_awgn, RcuSeries};
use ir_ntc_core::ChannelSpec;

/// `(ell, rate)` pair on a throughput-latency curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub ell: f64,
    pub rate: f64,
}

/// Repeated-operation latency when attempt `j` fails with probability
/// `fail[j]`: `(n_1 + sum_{j>=2} I_j fail[j-1]) / (1 - fail[m])`.
pub fn repeated_latency(schedule: &IncrementSchedule, fail: &[f64]) -> Result<f64> {
    let inc = schedule.increments();
    if fail.len() != inc.len() {
        bail!("one failure probability per attempt is required");
    }
    let mut num = inc[0] as f64;
    for j in 1..inc.len() {
        num += inc[j] as f64 * fail[j - 1];
    }
    let last = fail[fail.len() - 1];
    if last.is_nan() || last >= 1.0 {
        bail!("final attempt always fails");
    }
    Ok(num / (1.0 - last))
}

/// Random-coding curve point from the DT-style bound for repeated
/// operation with the given schedule; `xi` is capped at 1.
pub fn dt_schedule(
    schedule: &IncrementSchedule,
    ch: &ChannelSpec,
    samples: u32,
    seed: u64,
) -> Result<(CurvePoint, Vec<f64>)> {
    let n = schedule.blocklengths();
    let xi = dt_bound_awgn(schedule.total(), schedule.k(), ch, samples, seed)?;
    let fail: Vec<f64> = n
        .iter()
        .map(|&n| xi[n as usize - 1].mean.min(1.0))
        .collect();
    let ell = repeated_latency(schedule, &fail)?;
    Ok((
        CurvePoint {
            ell,
            rate: schedule.k() as f64 / ell,
        },
        fail,
    ))
}

/// Random-coding ARQ: one transmission of length `N`, repeated until it
/// decodes. Returns the best `N` in `1..=ceil(6k/C)` with its point.
pub fn rcu_arq(k: u32, ch: &ChannelSpec) -> Result<(u32, CurvePoint)> {
    let cap = blocklength_cap(k, ch.capacity()).max(k + 1);
    let mut series = RcuSeries::new(k, *ch)?;
    series.extend_to(cap)?;
    let mut best: Option<(u32, CurvePoint)> = None;
    for n in 1..=cap {
        let xi = series.get(n)?;
        if xi >= 1.0 {
            continue;
        }
        let ell = n as f64 / (1.0 - xi);
        let p = CurvePoint {
            ell,
            rate: k as f64 / ell,
        };
        if best.is_none_or(|(_, b)| p.rate > b.rate) {
            best = Some((n, p));
        }
    }
    best.map_or_else(|| bail!("no blocklength up to {cap} decodes k = {k}"), Ok)
}

/// Linear interpolation of `rate` at `ell` along a curve sorted by
/// latency. `None` outside the curve's latency range.
pub fn interpolate(curve: &[CurvePoint], ell: f64) -> Option<f64> {
    let i = curve
        .windows(2)
        .position(|w| w[0].ell <= ell && ell <= w[1].ell)?;
    let (a, b) = (curve[i], curve[i + 1]);
    if b.ell == a.ell {
        return Some(a.rate.max(b.rate));
    }
    let t = (ell - a.ell) / (b.ell - a.ell);
    Some(a.rate + t * (b.rate - a.rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_latency_matches_hand_value() {
        let s = IncrementSchedule::new(4, vec![10, 2, 3]).unwrap();
        let ell = repeated_latency(&s, &[0.5, 0.25, 0.1]).unwrap();
        assert!((ell - (10.0 + 2.0 * 0.5 + 3.0 * 0.25) / 0.9).abs() < 1e-12);
        assert!(repeated_latency(&s, &[0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn interpolation() {
        let c = [
            CurvePoint {
                ell: 10.0,
                rate: 0.4,
            },
            CurvePoint {
                ell: 20.0,
                rate: 0.5,
            },
        ];
        assert_eq!(interpolate(&c, 15.0), Some(0.45));
        assert_eq!(interpolate(&c, 25.0), None);
    }

    #[test]
    fn arq_is_the_best_single_length() {
        let ch = ChannelSpec::bsc(0.0789).unwrap();
        let (n, p) = rcu_arq(16, &ch).unwrap();
        let mut s = RcuSeries::new(16, ch).unwrap();
        for m in 1..=blocklength_cap(16, ch.capacity()) {
            let r = 16.0 * (1.0 - s.get(m).unwrap()) / m as f64;
            assert!(r <= p.rate + 1e-15, "N={m} beats N={n}");
        }
    }
}
