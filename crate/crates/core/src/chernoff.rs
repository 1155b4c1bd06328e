//! Chernoff bounds on joint BD error events for the AWGN channel.
//!
//! With unit-variance noise the accumulated energy `S_j` after attempt `j`
//! is chi-square with `n_j` degrees of freedom and attempt `j` fails iff
//! `S_j > r_j^2`. Tilting the energy of each increment by `e^{u S}` and
//! changing variables gives bounds of the form
//! `e^{-u r_i^2} (1 - 2u)^{-n_i/2} P[chi^2_{n_j} > (1 - 2u) r_j^2]`.
//! The chained form below generalizes this to any ordered subset of
//! attempts: tilts accumulate as `1 - 2h_i = prod (1 - 2u_l)`, each
//! increment contributes `(1 - 2h_i)^{-I/2}`, and each threshold
//! contributes `e^{-u_i (1 - 2h_{i-1}) r^2}`.
//!
//! Every choice of tilts yields a valid bound, so the numerical infima only
//! affect tightness.

use alloc::vec::Vec;

use libm::{exp, fmax, fmin, log, log1p};

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::rcsp::{bd_radii, marginal_profile_bd, ErrorProfile, IncrementSchedule, Jointness};
use crate::special::ln_gamma_pq;

const U_MAX: f64 = 0.5 - 1e-9;
const GOLDEN_TOL: f64 = 1e-6;
const SWEEPS: usize = 3;

/// Tilt parameters of a chained bound and the derived recursion state.
#[derive(Clone, Debug, PartialEq)]
pub struct ChernoffParams {
    /// `u_1..u_{t-1}`, each in `[0, 1/2)`; `u_1` tilts the last event.
    pub u: Vec<f64>,
}

impl ChernoffParams {
    /// Cumulative tilts `h_1..h_{t-1}`.
    pub fn h(&self) -> Vec<f64> {
        self.u
            .iter()
            .scan(0.0f64, |h, &u| {
                *h += u * (1.0 - 2.0 * *h);
                Some(*h)
            })
            .collect()
    }
}

/// A bound value together with the tilt that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBound {
    pub value: f64,
    pub u: f64,
}

/// Complement pair bound plus its value at `u = 1/2 - n/(2 r^2 + 2k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplementBound {
    pub value: f64,
    pub u: f64,
    pub convenient: f64,
}

fn ln_tail(dof: u32, x: f64, complement: bool) -> f64 {
    if x <= 0.0 {
        return if complement { f64::NEG_INFINITY } else { 0.0 };
    }
    let (lp, lq) = ln_gamma_pq(0.5 * dof as f64, 0.5 * x);
    if complement {
        lp
    } else {
        lq
    }
}

/// Log of the chained bound on `P[A_1 ∩ ζ_{s_2} ∩ ... ∩ ζ_{s_t}]` where
/// `A_1` is `ζ_{s_1}` or, with `complement`, its complement. `n` and `r2`
/// are the cumulative lengths and squared radii of the selected attempts.
fn ln_chain(n: &[u32], r2: &[f64], u: &[f64], complement: bool) -> f64 {
    let t = n.len();
    debug_assert_eq!(u.len(), t - 1);
    let mut ln_b = 0.0;
    let mut one_minus_2h = 1.0f64;
    for (i, &ui) in u.iter().enumerate() {
        let idx = t - 1 - i;
        let inc = (n[idx] - n[idx - 1]) as f64;
        ln_b -= ui * one_minus_2h * r2[idx];
        one_minus_2h *= 1.0 - 2.0 * ui;
        ln_b -= 0.5 * inc * log(one_minus_2h);
    }
    ln_b - 0.5 * n[0] as f64 * log(one_minus_2h) + ln_tail(n[0], one_minus_2h * r2[0], complement)
}

fn golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> (f64, f64) {
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    // Endpoints too, since the objective need not be unimodal.
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Minimizes the chained bound over the tilts by cyclic golden-section
/// searches. Returns `(bound, params)`.
fn optimize_chain(n: &[u32], r2: &[f64], complement: bool) -> (f64, ChernoffParams) {
    let dims = n.len() - 1;
    let mut u = alloc::vec![0.0f64; dims];
    let mut best = ln_chain(n, r2, &u, complement);
    for _ in 0..SWEEPS {
        for c in 0..dims {
            let mut trial = u.clone();
            let (x, fx) = golden(
                |x| {
                    trial[c] = x;
                    ln_chain(n, r2, &trial, complement)
                },
                0.0,
                U_MAX,
            );
            if fx < best {
                best = fx;
                u[c] = x;
            }
        }
    }
    (fmin(exp(best), 1.0), ChernoffParams { u })
}

/// Evaluates the chained bound at given tilts (any tilts give a valid bound).
pub fn chain_bound(n: &[u32], r2: &[f64], params: &ChernoffParams, complement: bool) -> f64 {
    fmin(exp(ln_chain(n, r2, &params.u, complement)), 1.0)
}

fn check_pair(j: usize, i: usize, m: usize) -> Result<()> {
    if j >= i || i >= m {
        return Err(Error::InvalidArgument("pair bounds need j < i <= m"));
    }
    Ok(())
}

/// Upper bound on `P[ζ_{n_j} ∩ ζ_{n_i}]`, attempts indexed from 0.
pub fn pair_joint_ub(
    j: usize,
    i: usize,
    radii: &[f64],
    schedule: &IncrementSchedule,
) -> Result<PairBound> {
    check_pair(j, i, schedule.m())?;
    let n = schedule.blocklengths();
    let (value, p) = optimize_chain(&[n[j], n[i]], &[radii[j], radii[i]], false);
    Ok(PairBound { value, u: p.u[0] })
}

/// Upper bound on `P[ζ_{n_j}^c ∩ ζ_{n_i}]`, attempts indexed from 0.
pub fn pair_complement_ub(
    j: usize,
    i: usize,
    radii: &[f64],
    schedule: &IncrementSchedule,
) -> Result<ComplementBound> {
    check_pair(j, i, schedule.m())?;
    let n = schedule.blocklengths();
    let (ns, rs) = ([n[j], n[i]], [radii[j], radii[i]]);
    let (value, p) = optimize_chain(&ns, &rs, true);
    let uc = (0.5 - n[i] as f64 / (2.0 * radii[i] + 2.0 * schedule.k() as f64)).clamp(0.0, U_MAX);
    let convenient = chain_bound(&ns, &rs, &ChernoffParams { u: alloc::vec![uc] }, true);
    Ok(ComplementBound {
        value: fmin(value, convenient),
        u: p.u[0],
        convenient,
    })
}

/// Lower bound on `P[w ∩ ζ_{n_i}]` for `w = ζ_{n_j} ∩ ζ_{n_i}^c`:
/// `inf_v e^{v r_i^2} (1 + 2v)^{-n_i/2} P[chi^2_{n_j} > (1 + 2v) r_j^2]`.
fn pair_w1(nj: u32, ni: u32, rj: f64, ri: f64) -> f64 {
    let f = |v: f64| {
        v * ri - 0.5 * ni as f64 * log1p(2.0 * v) + ln_tail(nj, (1.0 + 2.0 * v) * rj, false)
    };
    // v beyond a few units only makes the bound worse for radii of interest
    let (_, fx) = golden(f, 0.0, 50.0);
    fmin(exp(fx), 1.0)
}

struct Context {
    n: Vec<u32>,
    r2: Vec<f64>,
    marginal: Vec<f64>,
    k: u32,
}

impl Context {
    fn new(schedule: &IncrementSchedule, radii: &[f64]) -> Result<Self> {
        if radii.len() != schedule.m() {
            return Err(Error::InvalidArgument("one radius per attempt is required"));
        }
        let n = schedule.blocklengths();
        let marginal = n
            .iter()
            .zip(radii)
            .map(|(&nj, &r)| crate::special::chi_square_tail(nj, r))
            .collect();
        Ok(Self {
            n,
            r2: radii.to_vec(),
            marginal,
            k: schedule.k(),
        })
    }

    fn select(&self, s: &[usize]) -> (Vec<u32>, Vec<f64>) {
        (
            s.iter().map(|&i| self.n[i]).collect(),
            s.iter().map(|&i| self.r2[i]).collect(),
        )
    }

    fn chain(&self, s: &[usize], complement: bool) -> f64 {
        let (n, r) = self.select(s);
        let (opt, _) = optimize_chain(&n, &r, complement);
        if complement && s.len() == 2 {
            let uc = (0.5 - n[1] as f64 / (2.0 * r[1] + 2.0 * self.k as f64)).clamp(0.0, U_MAX);
            return fmin(
                opt,
                chain_bound(&n, &r, &ChernoffParams { u: alloc::vec![uc] }, true),
            );
        }
        opt
    }

    /// Lower bound on the intersection of failures at the attempts in `s`.
    fn lower(&self, s: &[usize]) -> f64 {
        let last = s[s.len() - 1];
        if s.len() == 1 {
            return self.marginal[last];
        }
        // Union bound over the complements of the earlier attempts.
        let gap: f64 = s[..s.len() - 1]
            .iter()
            .map(|&j| self.chain(&[j, last], true))
            .sum();
        let mut best = self.marginal[last] - gap;
        // Peel the first attempt off: P[∩ s] = P[∩ s[1..]] - P[ζ^c_{s_1} ∩ ...]
        best = fmax(best, self.lower(&s[1..]) - self.chain(s, true));
        if s.len() == 2 {
            let (n, r) = self.select(s);
            best = fmax(best, self.marginal[s[0]] - pair_w1(n[0], n[1], r[0], r[1]));
        }
        fmax(best, 0.0)
    }

    fn upper_pair(&self, j: usize, i: usize) -> f64 {
        fmin(
            self.chain(&[j, i], false),
            fmin(self.marginal[i], self.marginal[j]),
        )
    }
}

/// Per-attempt upper bounds on `P[E_{n_i}]`: the minimum of the marginal,
/// every pair bound, the chained bound over all attempts so far, and the
/// expansion through the final attempt.
pub fn joint_ub_recursive(schedule: &IncrementSchedule, radii: &[f64]) -> Result<Vec<f64>> {
    let ctx = Context::new(schedule, radii)?;
    let m = schedule.m();
    let mut ub: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let mut best = fmin(ctx.marginal[i], 1.0);
        if i > 0 {
            best = fmin(best, ub[i - 1]);
            for j in 0..i {
                best = fmin(best, ctx.upper_pair(j, i));
            }
            if i > 1 {
                let all: Vec<usize> = (0..=i).collect();
                best = fmin(best, ctx.chain(&all, false));
            }
            if i + 1 < m {
                // P[E_i] <= P[ζ_i ∩ ζ_m] + P[ζ_{i-1} ∩ ζ_i] - P[ζ_{i-1} ∩ ζ_i ∩ ζ_m]
                let last = m - 1;
                let alt = ctx.upper_pair(i, last) + ctx.upper_pair(i - 1, i)
                    - ctx.lower(&[i - 1, i, last]);
                best = fmin(best, alt);
            }
        }
        ub.push(fmax(best, 0.0));
    }
    Ok(ub)
}

/// Per-attempt lower bounds on `P[E_{n_i}]`.
pub fn joint_lb(schedule: &IncrementSchedule, radii: &[f64]) -> Result<Vec<f64>> {
    let ctx = Context::new(schedule, radii)?;
    let all: Vec<usize> = (0..schedule.m()).collect();
    Ok((0..schedule.m()).map(|i| ctx.lower(&all[..=i])).collect())
}

/// Profile whose joint entries are the Chernoff upper (or lower) bounds.
pub fn chernoff_profile(
    schedule: &IncrementSchedule,
    ch: &ChannelSpec,
    upper: bool,
) -> Result<ErrorProfile> {
    let radii = bd_radii(schedule, ch)?;
    let mut profile = marginal_profile_bd(schedule, ch)?;
    if upper {
        profile.joint = joint_ub_recursive(schedule, &radii)?;
        profile.jointness = Jointness::JointChernoffUb;
    } else {
        profile.joint = joint_lb(schedule, &radii)?;
        profile.jointness = Jointness::JointChernoffLb;
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcsp::{joint_profile_bd, JointOptions};
    use crate::special::chi_square_tail;

    fn table2_k64() -> (IncrementSchedule, ChannelSpec, Vec<f64>) {
        let s = IncrementSchedule::new(64, alloc::vec![85, 12, 8, 12, 16]).unwrap();
        let ch = ChannelSpec::awgn_db(2.0).unwrap();
        let r = bd_radii(&s, &ch).unwrap();
        (s, ch, r)
    }

    #[test]
    fn untilted_pair_is_marginal_tail() {
        let (s, _, r) = table2_k64();
        let n = s.blocklengths();
        let v = chain_bound(
            &[n[0], n[1]],
            &[r[0], r[1]],
            &ChernoffParams {
                u: alloc::vec![0.0],
            },
            false,
        );
        assert!((v - chi_square_tail(n[0], r[0])).abs() < 1e-14);
    }

    #[test]
    fn tilt_identity() {
        let p = ChernoffParams {
            u: alloc::vec![0.1, 0.37, 0.02, 0.49],
        };
        let h = p.h();
        let mut prod = 1.0;
        for (ui, hi) in p.u.iter().zip(&h) {
            prod *= 1.0 - 2.0 * ui;
            assert!((1.0 - 2.0 * hi - prod).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_bounds_in_range() {
        let (s, _, r) = table2_k64();
        let b = pair_joint_ub(0, 1, &r, &s).unwrap();
        assert!(b.value > 0.0 && b.value < 1.0);
        let c = pair_complement_ub(0, 3, &r, &s).unwrap();
        assert!(c.value <= c.convenient + 1e-15);
        assert!(pair_joint_ub(2, 1, &r, &s).is_err());
    }

    #[test]
    fn sandwich_on_reference_schedule() {
        let (s, ch, r) = table2_k64();
        let exact = joint_profile_bd(&s, &ch, &JointOptions::default()).unwrap();
        let ub = joint_ub_recursive(&s, &r).unwrap();
        let lb = joint_lb(&s, &r).unwrap();
        for i in 0..s.m() {
            assert!(
                lb[i] <= exact.joint[i] + 1e-6,
                "i={i} lb={} exact={}",
                lb[i],
                exact.joint[i]
            );
            assert!(
                exact.joint[i] <= ub[i] + 1e-6,
                "i={i} ub={} exact={}",
                ub[i],
                exact.joint[i]
            );
        }
        assert_eq!(lb[0], exact.marginal[0]);
    }

    #[test]
    fn above_capacity_marginal_is_active() {
        // rates far above capacity: r^2 < n so tilting cannot help
        let s = IncrementSchedule::new(64, alloc::vec![40, 4, 4]).unwrap();
        let ch = ChannelSpec::awgn_db(2.0).unwrap();
        let r = bd_radii(&s, &ch).unwrap();
        let ub = joint_ub_recursive(&s, &r).unwrap();
        let p = marginal_profile_bd(&s, &ch).unwrap();
        for i in 0..3 {
            assert!((ub[i] - p.marginal[i]).abs() < 1e-12);
        }
    }
}
