//! Standard-normal primitives: erf/erfc, cdf/pdf and a small adaptive
//! quadrature routine.
//!
//! The error function follows W. J. Cody's rational Chebyshev approximations
//! (the SPECFUN `calerf` scheme): three regimes glued at 0.46875 and 4.0,
//! with the `exp(-x^2)` factor split into an exactly representable part and a
//! small correction.  Absolute error of the resulting cdf is below 1e-15 on
//! `|z| <= 8`, comfortably inside the 1e-12 accuracy this crate promises.

const THRESH: f64 = 0.46875;
const SQRPI: f64 = 5.641_895_835_477_562_9e-1; // 1/sqrt(pi)

const A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
    1.857_777_061_846_031_53e-1,
];
const B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const C: [f64; 9] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const P: [f64; 6] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
    1.631_538_713_730_209_78e-2,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];

/// erf on `|x| <= 0.46875`.
fn erf_small(x: f64) -> f64 {
    let z = x * x;
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    x * (num + A[3]) / (den + B[3])
}

/// `exp(-y^2) * f`, with the square split to retain accuracy for large `y`.
fn scaled_exp_nyy(y: f64, f: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * f
}

/// erfc on `0.46875 < y <= 4`.
fn erfc_mid(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    scaled_exp_nyy(y, (num + C[7]) / (den + D[7]))
}

/// erfc on `y > 4`.
fn erfc_large(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    scaled_exp_nyy(y, (SQRPI - r) / y)
}

pub fn erf(x: f64) -> f64 {
    if x.is_infinite() {
        return x.signum();
    }
    let y = x.abs();
    if y <= THRESH {
        erf_small(x)
    } else {
        let e = if y <= 4.0 { erfc_mid(y) } else { erfc_large(y) };
        if x < 0.0 {
            e - 1.0
        } else {
            1.0 - e
        }
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_infinite() {
        return 1.0 - x.signum();
    }
    let y = x.abs();
    let e = if y <= THRESH {
        1.0 - erf_small(x.abs())
    } else if y <= 4.0 {
        erfc_mid(y)
    } else {
        erfc_large(y)
    };
    if x < 0.0 {
        2.0 - e
    } else {
        e
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cdf.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Cdf of an independent standard bivariate normal on the lower-left
/// orthant `(-inf, a] x (-inf, b]`.
pub fn normal2_indep_cdf(a: f64, b: f64) -> f64 {
    normal_cdf(a) * normal_cdf(b)
}

/// `P[N(mu, sigma^2) <= x]`.
pub fn normal_cdf_scaled(x: f64, mu: f64, sigma: f64) -> f64 {
    normal_cdf((x - mu) / sigma)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// Signed: `a > b` integrates backwards.  Depth is capped at 60 bisections,
/// far beyond what the smooth integrands used here require.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_step(f, a, b, fa, fb, fm, simpson(a, b, fa, fm, fb), tol, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
    }
}
