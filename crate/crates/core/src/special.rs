//! Special functions used throughout the analysis: regularized incomplete
//! gamma (chi-square distribution), regularized incomplete beta, log-domain
//! binomial helpers and compensated summation.
//!
//! Everything here works in `f64` and is written against `libm` so that the
//! results are identical with and without `std`.

use libm::{exp, expm1, fabs, lgamma, log, log1p, sqrt};

const EPS: f64 = 1.0e-17;
const MAX_ITER: usize = 200_000;
const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8; // ln(2*pi)/2

/// Kahan-Babuska (Neumaier) compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// Stirling-series remainder `ln Gamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2]`
/// for `a >= 10`.
fn stirling_remainder(a: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / a;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

/// `ln(1 + x) - x`.
#[inline]
fn log1pmx(x: f64) -> f64 {
    if fabs(x) < 0.1 {
        // Alternating series; 25 terms cover |x| < 0.1 to full precision.
        let mut term = x;
        let mut acc = 0.0;
        for n in 2..40 {
            term *= -x;
            acc += term / n as f64;
            if fabs(term) < 1e-18 * fabs(acc) {
                break;
            }
        }
        acc
    } else {
        log1p(x) - x
    }
}

/// `ln( x^a e^{-x} / Gamma(a) )`, evaluated without the cancellation that
/// plagues the naive form when `a` is large and `x` is near `a`.
pub fn ln_gamma_prefix(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if a < 10.0 {
        a * log(x) - x - lgamma(a)
    } else {
        let eps = (x - a) / a;
        a * log1pmx(eps) + 0.5 * log(a) - LN_2PI_HALF - stirling_remainder(a)
    }
}

/// Regularized incomplete gamma functions `(P(a, x), Q(a, x))`.
pub fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let prefix = ln_gamma_prefix(a, x);
    if x < a + 1.0 {
        let p = exp(prefix + log(gamma_series(a, x)) - log(a));
        let p = p.min(1.0);
        (p, 1.0 - p)
    } else {
        let q = exp(prefix + log(gamma_continued_fraction(a, x)));
        let q = q.min(1.0);
        (1.0 - q, q)
    }
}

/// `(ln P(a, x), ln Q(a, x))`, finite even where `P` or `Q` underflow.
pub fn ln_gamma_pq(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x.is_infinite() {
        return (0.0, f64::NEG_INFINITY);
    }
    let prefix = ln_gamma_prefix(a, x);
    if x < a + 1.0 {
        let lp = (prefix + log(gamma_series(a, x)) - log(a)).min(0.0);
        (lp, log1p(-exp(lp)))
    } else {
        let lq = (prefix + log(gamma_continued_fraction(a, x))).min(0.0);
        (log1p(-exp(lq)), lq)
    }
}

/// `sum_{n>=0} x^n / ((a+1)...(a+n))`.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of the continued fraction for `Q(a,x) / prefix`.
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Upper tail `P[chi^2_dof > x]`.
pub fn chi_square_tail(dof: u32, x: f64) -> f64 {
    debug_assert!(dof >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    if dof == 2 {
        return exp(-0.5 * x);
    }
    gamma_pq(0.5 * dof as f64, 0.5 * x).1
}

/// CDF `P[chi^2_dof <= x]`.
pub fn chi_square_cdf(dof: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if dof == 2 {
        return -expm1(-0.5 * x);
    }
    gamma_pq(0.5 * dof as f64, 0.5 * x).0
}

/// Density of a chi-square variable with `dof` degrees of freedom.
pub fn chi_square_pdf(dof: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return match dof {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        };
    }
    let a = 0.5 * dof as f64;
    exp(ln_gamma_prefix(a, 0.5 * x)) / x
}

/// Smallest `x` (to within 1e-9 relative) with `P[chi^2_dof > x] <= tail`.
pub fn chi_square_upper_quantile(dof: u32, tail: f64) -> f64 {
    let n = dof as f64;
    let mut lo = 0.0;
    let mut hi = n + 10.0 * sqrt(2.0 * n) + 40.0;
    while chi_square_tail(dof, hi) > tail {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_tail(dof, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    hi
}

/// `ln Beta(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// `ln I_x(a, b)`, the log of the regularized incomplete beta function.
pub fn ln_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let ln_front = a * log(x) + b * log1p(-x) - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front + log(beta_continued_fraction(a, b, x)) - log(a)
    } else {
        let comp = exp(ln_front + log(beta_continued_fraction(b, a, 1.0 - x)) - log(b));
        log1p(-comp)
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}

/// `ln C(n, t)`.
#[inline]
pub fn ln_binomial(n: u32, t: u32) -> f64 {
    debug_assert!(t <= n);
    lgamma(n as f64 + 1.0) - lgamma(t as f64 + 1.0) - lgamma((n - t) as f64 + 1.0)
}

/// Binary entropy in bits; `h2(0) = h2(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * libm::log2(q) };
    term(p) + term(1.0 - p)
}
