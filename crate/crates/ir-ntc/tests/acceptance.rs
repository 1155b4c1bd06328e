//! Acceptance report: one PASS/FAIL line per criterion with the measured
//! values. Exits non-zero only when a criterion outside `KNOWN_GAPS` fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{ensure, Result};
use ir_ntc::analysis::{dt_schedule, interpolate, rcu_arq, CurvePoint};
use ir_ntc::parallel;
use ir_ntc::recipes::{NONUNIFORM_SCHEDULES, UNIFORM_PAIRS};
use ir_ntc_core::chernoff::chernoff_profile;
use ir_ntc_core::optimizer::{
    blocklength_cap, optimize_arq, optimize_nonuniform, optimize_outage, optimize_uniform,
    sweep_snr, SearchSpec,
};
use ir_ntc_core::rcsp::{
    awgn_radius_sq, bd_radii, expected_latency, joint_profile_bd, marginal_profile_bd, JointOptions,
};
use ir_ntc_core::rcu::{
    blocklength_rule, grid_start, loglog_increment, vlft_converse, vlft_infinite, vlft_repeated,
};
use ir_ntc_core::simulator::{SimConfig, SimDecoder};
use ir_ntc_core::special::chi_square_tail;
use ir_ntc_core::trellis::{DecoderKind, TrellisCode};
use ir_ntc_core::{ChannelSpec, IncrementSchedule, LatencyMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;

/// Criteria expected to fail; they are reported but do not fail the run.
const KNOWN_GAPS: &[u32] = &[];

const KS: [u32; 5] = [16, 32, 64, 128, 256];
const TAIL_TOL: f64 = 1e-9;

type Outcome = Result<(bool, String)>;
type Check = fn() -> Outcome;

fn awgn(db: f64) -> ChannelSpec {
    ChannelSpec::awgn_db(db).unwrap()
}

fn bsc() -> ChannelSpec {
    ChannelSpec::bsc(0.0789).unwrap()
}

fn repeated(s: &IncrementSchedule, joint: bool) -> Result<ir_ntc_core::PerformancePoint> {
    let p = if joint {
        joint_profile_bd(s, &awgn(2.0), &JointOptions::default())?
    } else {
        marginal_profile_bd(s, &awgn(2.0))?
    };
    Ok(expected_latency(&p, LatencyMode::Repeated)?)
}

fn c1() -> Outcome {
    let b = bsc().capacity();
    let a = awgn(2.0).capacity();
    Ok((
        (b - 0.6017).abs() <= 1e-4 && (a - 0.6851).abs() <= 1e-4,
        format!("BSC {b:.5}, AWGN {a:.5}"),
    ))
}

fn c2() -> Outcome {
    let n1 = [31, 60, 116, 222, 429];
    let rc = [0.516, 0.533, 0.552, 0.577, 0.597];
    let mut ok = true;
    let mut got = Vec::new();
    for (i, &k) in KS.iter().enumerate() {
        let r = optimize_arq(k, &awgn(2.0))?;
        let n = r.schedule.increments()[0];
        let code_rate = k as f64 / n as f64;
        ok &= n == n1[i] && (code_rate - rc[i]).abs() <= 1e-3;
        got.push(format!("{n}/{code_rate:.3}"));
    }
    Ok((ok, format!("n1/Rc = {}", got.join(", "))))
}

fn c3() -> Outcome {
    let rt = [0.6019, 0.6208, 0.6363, 0.6494, 0.6593];
    let mut worst = 0.0f64;
    let mut got = Vec::new();
    for (i, (k, inc)) in NONUNIFORM_SCHEDULES.iter().enumerate() {
        let pt = repeated(&IncrementSchedule::new(*k, inc.to_vec())?, true)?;
        worst = worst.max((pt.rate - rt[i]).abs());
        got.push(format!("{:.4}", pt.rate));
    }
    Ok((
        worst <= 1e-3,
        format!("Rt = {}, worst error {worst:.1e}", got.join(", ")),
    ))
}

fn c4() -> Outcome {
    let rt = [0.5944, 0.6164, 0.6341, 0.6475, 0.6576];
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut got = Vec::new();
    for (i, &(k, n1, step)) in UNIFORM_PAIRS.iter().enumerate() {
        let pt = repeated(&IncrementSchedule::uniform(k, n1, step, 5)?, false)?;
        worst = worst.max((pt.rate - rt[i]).abs());
        let mut spec = SearchSpec::new(k, 5, awgn(2.0))?;
        spec.uniform = true;
        let best = optimize_uniform(&spec)?;
        ok &= best.point.rate >= rt[i] - 1e-3;
        got.push(format!("{:.4}", best.point.rate));
    }
    Ok((
        ok && worst <= 1e-3,
        format!(
            "reference pairs worst error {worst:.1e}; own optimum Rt = {}",
            got.join(", ")
        ),
    ))
}

fn c5() -> Outcome {
    let pt = repeated(&IncrementSchedule::new(64, vec![85, 12, 8, 12, 16])?, true)?;
    Ok((
        (pt.ell - 101.0).abs() <= 2.0 && (pt.rate - 0.636).abs() <= 2e-3,
        format!("ell {:.2}, Rt {:.4}", pt.ell, pt.rate),
    ))
}

fn c6() -> Outcome {
    let want = [0.155, 0.046, 0.025];
    let pts = sweep_snr(200.0, &[1, 4, 8], &[4.0])?;
    ensure!(pts.len() == 3, "expected three sweep points");
    let mut ok = true;
    let mut got = Vec::new();
    for (p, w) in pts.iter().zip(want) {
        ok &= (p.gap - w).abs() <= 0.01;
        got.push(format!("m={} k={} gap {:.4}", p.m, p.k, p.gap));
    }
    Ok((ok, got.join(", ")))
}

fn c7() -> Outcome {
    let spec = SearchSpec::new(128, 4, awgn(2.0))?;
    let free = optimize_nonuniform(&spec)?;
    let capped = optimize_outage(&spec, 1e-10)?;
    let loss = free.objective - capped.objective;
    let outage = capped.profile.joint[capped.profile.joint.len() - 1];
    Ok((
        loss <= 0.03 && outage <= 1e-10,
        format!(
            "unconstrained {:.4} at ell {:.1}, outage-capped {:.4} at ell {:.1} (P_out {outage:.1e}), loss {loss:.4}",
            free.objective, free.point.ell, capped.objective, capped.point.ell
        ),
    ))
}

fn random_schedule(rng: &mut ChaCha8Rng) -> (IncrementSchedule, ChannelSpec) {
    let k = rng.random_range(16..=256u32);
    let m = rng.random_range(2..=6usize);
    let ch = awgn(rng.random_range(0.0..4.0));
    let n1 = ((k as f64 / ch.capacity()) * rng.random_range(0.85..1.15)).round() as u32;
    let mut inc = vec![n1];
    for _ in 1..m {
        inc.push(((k as f64 * rng.random_range(0.02..0.25)).round() as u32).max(1));
    }
    (IncrementSchedule::new(k, inc).unwrap(), ch)
}

/// Monte-Carlo `P[E_j]`: cumulative energy above every radius up to `j`.
fn joint_monte_carlo(s: &IncrementSchedule, radii: &[f64], samples: u64, seed: u64) -> Vec<f64> {
    const BLOCK: u64 = 1 << 16;
    let dists: Vec<ChiSquared<f64>> = s
        .increments()
        .iter()
        .map(|&i| ChiSquared::new(i as f64).unwrap())
        .collect();
    let hits = (0..samples.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut hits = vec![0u64; dists.len()];
            for _ in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                let mut energy = 0.0;
                for (j, d) in dists.iter().enumerate() {
                    energy += d.sample(&mut rng);
                    if energy <= radii[j] {
                        break;
                    }
                    hits[j] += 1;
                }
            }
            hits
        })
        .reduce(
            || vec![0; dists.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    hits.iter().map(|&h| h as f64 / samples as f64).collect()
}

fn c8() -> Outcome {
    const SAMPLES: u64 = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cases: Vec<_> = (0..50).map(|_| random_schedule(&mut rng)).collect();
    let mut worst_sigma = 0.0f64;
    let mut sandwich_violations = 0;
    let mut mc_violations = 0;
    for (idx, (s, ch)) in cases.iter().enumerate() {
        let exact = joint_profile_bd(s, ch, &JointOptions::default())?;
        let ub = chernoff_profile(s, ch, true)?;
        let lb = chernoff_profile(s, ch, false)?;
        let mc = joint_monte_carlo(s, &bd_radii(s, ch)?, SAMPLES, 1000 + idx as u64);
        for j in 0..s.m() {
            let e = exact.joint[j];
            if lb.joint[j] > e + 1e-6 || e > ub.joint[j].min(exact.marginal[j]) + 1e-6 {
                sandwich_violations += 1;
            }
            let sigma = (e * (1.0 - e) / SAMPLES as f64).sqrt();
            let dev = (mc[j] - e).abs();
            if dev > 4.0 * sigma + 1e-6 {
                mc_violations += 1;
            }
            if sigma > 0.0 {
                worst_sigma = worst_sigma.max(dev / sigma);
            }
        }
    }
    Ok((
        sandwich_violations == 0 && mc_violations == 0,
        format!(
            "50 schedules: {sandwich_violations} sandwich violations, {mc_violations} Monte-Carlo misses, worst deviation {worst_sigma:.2} sigma"
        ),
    ))
}

fn c9() -> Outcome {
    let ch = bsc();
    let c = ch.capacity();
    let ks: Vec<u32> = (8..=160).step_by(4).collect();
    let curve = |f: &(dyn Fn(u32) -> Result<CurvePoint> + Sync)| -> Result<Vec<CurvePoint>> {
        let mut v = ks.par_iter().map(|&k| f(k)).collect::<Result<Vec<_>>>()?;
        v.sort_by(|a, b| a.ell.total_cmp(&b.ell));
        Ok(v)
    };
    let point = |p: ir_ntc_core::rcu::VlftPoint| CurvePoint {
        ell: p.ell,
        rate: p.rate,
    };
    let infinite = curve(&|k| Ok(point(vlft_infinite(k, &ch, TAIL_TOL)?)))?;
    let step = |k: u32, i: u32| -> Result<CurvePoint> {
        let n = blocklength_rule(k, c, 10.0, 30.0);
        Ok(point(vlft_repeated(k, n, i, grid_start(n, i), &ch)?))
    };
    let unit = curve(&|k| step(k, 1))?;
    let loglog = curve(&|k| step(k, loglog_increment(k)))?;
    let arq = curve(&|k| Ok(rcu_arq(k, &ch)?.1))?;
    // each lower curve is checked at its own latencies against the curve above
    let mut ok = true;
    let mut margins = Vec::new();
    let chain: [(&str, &[CurvePoint], &str, &[CurvePoint]); 3] = [
        ("infinite", &infinite, "repeated I=1", &unit),
        ("repeated I=1", &unit, "log-log I", &loglog),
        ("log-log I", &loglog, "ARQ", &arq),
    ];
    for (upper_name, upper, lower_name, lower) in chain {
        let mut min_margin = f64::INFINITY;
        for p in lower {
            if let Some(u) = interpolate(upper, p.ell) {
                min_margin = min_margin.min(u - p.rate);
            }
        }
        ok &= min_margin >= -1e-6;
        margins.push(format!("{upper_name} - {lower_name} >= {min_margin:.1e}"));
    }
    let mut conv_margin = f64::INFINITY;
    for p in &infinite {
        conv_margin = conv_margin.min(vlft_converse(p.ell, &ch)? - p.rate);
    }
    ok &= conv_margin >= 0.0;
    margins.insert(0, format!("converse - infinite >= {conv_margin:.3}"));
    Ok((ok, margins.join("; ")))
}

fn simulate(
    ch: ChannelSpec,
    code: TrellisCode,
    kind: DecoderKind,
    s: IncrementSchedule,
    trials: u64,
) -> Result<ir_ntc_core::simulator::SimResult> {
    parallel::simulate(&SimConfig {
        channel: ch,
        decoder: SimDecoder::Code { code, kind },
        schedule: s,
        trials,
        seed: 1,
        interleaver_seed: 0,
        max_rounds: 1000,
    })
}

fn c10() -> Outcome {
    let ch = bsc();
    let ks: Vec<u32> = (8..=44).collect();
    let mut rcsp = ks
        .par_iter()
        .map(|&k| -> Result<CurvePoint> {
            let s = IncrementSchedule::uniform(k, k, 1, 10 * k)?;
            let p = expected_latency(&marginal_profile_bd(&s, &ch)?, LatencyMode::Repeated)?;
            Ok(CurvePoint {
                ell: p.ell,
                rate: p.rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rcsp.sort_by(|a, b| a.ell.total_cmp(&b.ell));
    let infinite = ks
        .par_iter()
        .map(|&k| {
            vlft_infinite(k, &ch, TAIL_TOL).map(|p| CurvePoint {
                ell: p.ell,
                rate: p.rate,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut ok = true;
    let mut got = Vec::new();
    for k in [16u32, 20, 32] {
        let s = IncrementSchedule::uniform(k, k, 1, 2 * k + 1)?;
        let r = simulate(ch, TrellisCode::cc64(), DecoderKind::ExactMl, s, 100_000)?;
        let vlft = interpolate(&infinite, r.ell)
            .ok_or_else(|| anyhow::anyhow!("ell {} outside the random-coding curve", r.ell))?;
        let bound = interpolate(&rcsp, r.ell)
            .ok_or_else(|| anyhow::anyhow!("ell {} outside the RCSP curve", r.ell))?;
        ok &= r.rate > vlft;
        if r.ell < 50.0 {
            ok &= (r.rate - bound).abs() <= 0.03;
        }
        got.push(format!(
            "k={k}: ell {:.2}, R {:.4} (random coding {vlft:.4}, RCSP {bound:.4})",
            r.ell, r.rate
        ));
    }
    Ok((ok, got.join("; ")))
}

fn c11() -> Outcome {
    let ch = awgn(2.0);
    let mut ok = true;
    let mut got = Vec::new();
    for (k, inc) in NONUNIFORM_SCHEDULES.iter().filter(|(k, _)| *k <= 32) {
        let s = IncrementSchedule::new(*k, inc.to_vec())?;
        let (dt, _) = dt_schedule(&s, &ch, 100_000, 1)?;
        let r = simulate(
            ch,
            TrellisCode::cc1024(),
            DecoderKind::Wava { wraps: 4 },
            s,
            20_000,
        )?;
        ok &= r.rate > dt.rate;
        got.push(format!(
            "k={k}: sim ell {:.2} R {:.4} (+-{:.4}), DT ell {:.2} R {:.4}",
            r.ell,
            r.rate,
            r.rate * r.ell_std_err / r.ell,
            dt.ell,
            dt.rate
        ));
    }
    Ok((ok, got.join("; ")))
}

fn c12() -> Outcome {
    let ch = awgn(2.0);
    let mut worst = 0.0f64;
    let mut misses = 0;
    for (k, inc) in NONUNIFORM_SCHEDULES {
        let s = IncrementSchedule::new(k, inc.to_vec())?;
        let exact = joint_profile_bd(&s, &ch, &JointOptions::default())?;
        let r = parallel::simulate(&SimConfig {
            channel: ch,
            decoder: SimDecoder::IdealBd,
            schedule: s,
            trials: 40_000,
            seed: 12,
            interleaver_seed: 0,
            max_rounds: 1000,
        })?;
        for (j, &p) in exact.joint.iter().enumerate() {
            let sigma = (p * (1.0 - p) / r.tally.rounds as f64).sqrt();
            let dev = (r.attempt_error[j] - p).abs();
            if dev > 4.0 * sigma {
                misses += 1;
            }
            worst = worst.max(dev / sigma);
        }
    }
    Ok((
        misses == 0,
        format!("25 attempt probabilities, {misses} outside 4 sigma, worst {worst:.2} sigma"),
    ))
}

fn c13() -> Outcome {
    const FIXTURE: &str = include_str!("../../core/tests/data/chi_square_tail.csv");
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut max_dof = 0;
    for line in FIXTURE.lines().skip(1) {
        let mut it = line.split(',');
        let dof: u32 = it.next().unwrap().parse()?;
        let x: f64 = it.next().unwrap().parse()?;
        let want: f64 = it.next().unwrap().parse()?;
        worst = worst.max((chi_square_tail(dof, x) - want).abs());
        max_dof = max_dof.max(dof);
        count += 1;
    }
    Ok((
        worst <= 1e-12,
        format!("{count} points, dof up to {max_dof}, worst absolute error {worst:.1e}"),
    ))
}

fn c14() -> Outcome {
    let mut checked = 0u64;
    let mut bad = Vec::new();
    let mut check = |n: u32, k: u32, ch: &ChannelSpec| {
        let ChannelSpec::Awgn { eta } = *ch else {
            return;
        };
        if k as f64 / n as f64 <= ch.capacity() {
            checked += 1;
            if awgn_radius_sq(n, k, eta) < n as f64 {
                bad.push((n, k));
            }
        }
    };
    for db in [0.0, 2.0, 4.0] {
        let ch = awgn(db);
        for k in 1..=256 {
            for n in 1..=blocklength_cap(k, ch.capacity()) {
                check(n, k, &ch);
            }
        }
    }
    let ch = awgn(2.0);
    let regression = NONUNIFORM_SCHEDULES
        .iter()
        .map(|(k, inc)| IncrementSchedule::new(*k, inc.to_vec()))
        .chain(
            UNIFORM_PAIRS
                .iter()
                .map(|&(k, n1, i)| IncrementSchedule::uniform(k, n1, i, 5)),
        );
    for s in regression {
        let s = s?;
        for n in s.blocklengths() {
            check(n, s.k(), &ch);
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "{checked} (n, k, SNR) cases below capacity, {} violations",
            bad.len()
        ),
    ))
}

const CRITERIA: [(u32, &str, Check); 14] = [
    (1, "capacity anchors", c1),
    (2, "ARQ optimum lengths and code rates", c2),
    (3, "non-uniform schedules, joint throughput", c3),
    (
        4,
        "uniform schedules, marginal throughput and own search",
        c4,
    ),
    (5, "k=64 latency anchor", c5),
    (6, "capacity gaps at 4 dB within latency 200", c6),
    (7, "outage-capped throughput loss at k=128, m=4", c7),
    (8, "Chernoff sandwich and Monte-Carlo joint", c8),
    (9, "BSC dominance chain", c9),
    (10, "cc64 BSC simulation vs random coding and RCSP", c10),
    (11, "cc1024 AWGN simulation vs DT bound", c11),
    (12, "ideal-BD simulation vs joint profile", c12),
    (13, "chi-square tail accuracy", c13),
    (14, "radius at least blocklength below capacity", c14),
];

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut unexpected = 0;
    for (id, name, check) in CRITERIA {
        let t0 = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(_) => Err(anyhow::anyhow!("panicked")),
        };
        let secs = t0.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e:#}")),
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_GAPS.contains(&id) {
            " [known gap]"
        } else {
            ""
        };
        println!("C{id} {verdict}: {name} ({detail}) [{secs:.1} s]{note}");
        if !pass && !KNOWN_GAPS.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
