//! Shared numeric plumbing: compensated accumulation and log-factorials.
//!
//! Everything heavy in this crate works in log space and the validation
//! tolerances sit far below what naive f64 accumulation delivers, so the
//! log-factorial table keeps an explicit compensation term (an unevaluated
//! double-double) and binomial coefficients are combined with error-free
//! two-sums before collapsing to f64.

use std::sync::OnceLock;

/// Kahan-Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Error-free transformation: `a + b = s + e` exactly, `s = fl(a + b)`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Double-double value `hi + lo`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo2) = two_sum(s, lo);
        Dd { hi, lo: lo2 }
    }

    #[inline]
    fn sub(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, -other.hi);
        let lo = self.lo - other.lo + e;
        let (hi, lo2) = two_sum(s, lo);
        Dd { hi, lo: lo2 }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Largest argument served by the cumulative table; above it a four-term
/// Stirling series is used, whose truncation error is below 1e-40 there.
const TABLE_LIMIT: usize = 100_000;

fn table() -> &'static Vec<(f64, f64)> {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut entries = Vec::with_capacity(TABLE_LIMIT + 1);
        let mut acc = Dd::ZERO;
        entries.push((0.0, 0.0));
        for k in 1..=TABLE_LIMIT {
            acc = acc.add_f64((k as f64).ln());
            entries.push((acc.hi, acc.lo));
        }
        entries
    })
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series for `ln k!`; truncation error `< 1/(1188 k^9)`.
fn ln_factorial_stirling(k: f64) -> f64 {
    let inv = 1.0 / k;
    let inv2 = inv * inv;
    (k + 0.5) * k.ln() - k
        + LN_SQRT_2PI
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `ln k!`, exact-table below 100_000 and Stirling above.
pub fn ln_factorial(k: u64) -> f64 {
    if (k as usize) <= TABLE_LIMIT {
        let (hi, lo) = table()[k as usize];
        hi + lo
    } else {
        ln_factorial_stirling(k as f64)
    }
}

/// `ln C(n, k)`; `-inf` when `k > n`.
///
/// Inside the table range the three cumulative sums are subtracted in
/// double-double before collapsing, so the cancellation between terms of
/// size `n ln n` does not eat into the result's precision.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    if (n as usize) <= TABLE_LIMIT {
        let t = table();
        let a = t[n as usize];
        let b = t[k as usize];
        let c = t[(n - k) as usize];
        let a = Dd { hi: a.0, lo: a.1 };
        let b = Dd { hi: b.0, lo: b.1 };
        let c = Dd { hi: c.0, lo: c.1 };
        a.sub(b).sub(c).value()
    } else {
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    }
}

/// Log-gamma for positive real arguments (Lanczos, g = 7, 9 terms).
///
/// Integer arguments agree with [`ln_factorial`] to full double precision;
/// arguments below 1/2 go through the reflection formula.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return std::f64::consts::PI.ln() - (std::f64::consts::PI * x).sin().abs().ln()
            - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut series = 0.999_999_999_999_809_93;
    for (i, c) in COEFFS.iter().enumerate() {
        series += c / (z + (i + 1) as f64);
    }
    let t = z + 7.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// `ln C(a, b)` for real arguments via log-gamma; `-inf` outside the
/// triangle `0 <= b <= a`, so infeasible slots vanish instead of erroring.
pub fn ln_binom_real(a: f64, b: f64) -> f64 {
    if !(b >= 0.0 && b <= a) {
        return f64::NEG_INFINITY;
    }
    ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0)
}

/// `ln sum exp(xs)` with compensated accumulation; `-inf` inputs are skipped.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs
        .clone()
        .into_iter()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = Kahan::new();
    for x in xs {
        if x.is_finite() {
            acc.add((x - max).exp());
        }
    }
    max + acc.total().ln()
}

/// Mean of a slice with compensated accumulation.
pub fn mean(xs: &[f64]) -> f64 {
    let mut acc = Kahan::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total() / xs.len() as f64
}

/// Population variance of a slice (two-pass, compensated).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let mut acc = Kahan::new();
    for &x in xs {
        acc.add((x - m) * (x - m));
    }
    acc.total() / xs.len() as f64
}

/// Pearson correlation of two equally long slices.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (Kahan::new(), Kahan::new(), Kahan::new());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy.add((x - mx) * (y - my));
        sxx.add((x - mx) * (x - mx));
        syy.add((y - my) * (y - my));
    }
    sxy.total() / (sxx.total() * syy.total()).sqrt()
}
