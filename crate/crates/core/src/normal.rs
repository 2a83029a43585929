//! Standard normal distribution: density, distribution function, quantile and
//! the Gaussian CVaR constant.
//!
//! The distribution function goes through Cody's rational approximations of
//! `erf`/`erfc`, accurate to roughly machine precision in `f64`. The quantile
//! is Wichura's AS241 (PPND16).

use crate::error::{domain, Result};
use crate::scalar::Real;

#[inline]
fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_6e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_5e3,
    1.857_777_061_846_031_5e-1,
];
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412e1,
    2.440_246_379_344_441_7e2,
    1.282_616_526_077_372_3e3,
    2.844_236_833_439_170_6e3,
];
const ERFC_C: [f64; 9] = [
    5.641_884_969_886_701e-1,
    8.883_149_794_388_376e0,
    6.611_919_063_714_163e1,
    2.986_351_381_974_001_3e2,
    8.819_522_212_417_691e2,
    1.712_047_612_634_070_6e3,
    2.051_078_377_826_071_5e3,
    1.230_339_354_797_997_2e3,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    1.574_492_611_070_983_5e1,
    1.176_939_508_913_125e2,
    5.371_811_018_620_099e2,
    1.621_389_574_566_690_2e3,
    3.290_799_235_733_459_7e3,
    4.362_619_090_143_247e3,
    3.439_367_674_143_721_6e3,
    1.230_339_354_803_749_5e3,
];
const ERFC_P: [f64; 6] = [
    3.053_266_349_612_323_4e-1,
    3.603_448_999_498_044_4e-1,
    1.257_817_261_112_292_5e-1,
    1.608_378_514_874_227_7e-2,
    6.587_491_615_298_378e-4,
    1.631_538_713_730_209_8e-2,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822_4e0,
    1.872_952_849_923_467_3e0,
    5.279_051_029_514_284e-1,
    6.051_834_131_244_132e-2,
    2.335_204_976_268_691_8e-3,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `exp(-y^2)` with the argument split to avoid cancellation.
#[inline]
fn exp_neg_sq<T: Real>(y: T) -> T {
    let sixteen = T::lit(16.0);
    let ysq = (y * sixteen).trunc() / sixteen;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Complementary error function for `y >= 0.46875`.
fn erfc_tail<T: Real>(y: T) -> T {
    if y > T::lit(27.0) {
        return T::zero();
    }
    if y <= T::lit(4.0) {
        let mut num = T::lit(ERFC_C[8]) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + T::lit(ERFC_C[i])) * y;
            den = (den + T::lit(ERFC_D[i])) * y;
        }
        (num + T::lit(ERFC_C[7])) / (den + T::lit(ERFC_D[7])) * exp_neg_sq(y)
    } else {
        let z = (y * y).recip();
        let mut num = T::lit(ERFC_P[5]) * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + T::lit(ERFC_P[i])) * z;
            den = (den + T::lit(ERFC_Q[i])) * z;
        }
        let r = z * (num + T::lit(ERFC_P[4])) / (den + T::lit(ERFC_Q[4]));
        (T::lit(FRAC_1_SQRT_PI) - r) / y * exp_neg_sq(y)
    }
}

fn erf_small<T: Real>(x: T) -> T {
    let z = x * x;
    let mut num = T::lit(ERF_A[4]) * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + T::lit(ERF_A[i])) * z;
        den = (den + T::lit(ERF_B[i])) * z;
    }
    x * (num + T::lit(ERF_A[3])) / (den + T::lit(ERF_B[3]))
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::lit(0.46875) {
        return T::one() - erf_small(x);
    }
    let tail = erfc_tail(y);
    if x < T::zero() {
        T::lit(2.0) - tail
    } else {
        tail
    }
}

/// Standard normal density.
#[inline]
pub fn normal_pdf<T: Real>(x: T) -> T {
    let inv_sqrt_2pi = T::lit(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(x * x) / T::lit(2.0)).exp()
}

/// Standard normal distribution function `N(x)`.
pub fn normal_cdf<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let half = T::lit(0.5);
    let y = x.abs() * T::FRAC_1_SQRT_2();
    if y <= T::lit(0.46875) {
        return half + half * erf_small(x * T::FRAC_1_SQRT_2());
    }
    let upper = half * erfc_tail(y);
    if x > T::zero() {
        T::one() - upper
    } else {
        upper
    }
}

const AS241_A: [f64; 8] = [
    3.387_132_872_796_366_5,
    133.141_667_891_784_38,
    1_971.590_950_306_551_3,
    13_731.693_765_509_461,
    45_921.953_931_549_87,
    67_265.770_927_008_7,
    33_430.575_583_588_13,
    2_509.080_928_730_122_7,
];
const AS241_B: [f64; 8] = [
    1.0,
    42.313_330_701_600_91,
    687.187_007_492_057_9,
    5_394.196_021_424_751,
    21_213.794_301_586_597,
    39_307.895_800_092_71,
    28_729.085_735_721_943,
    5_226.495_278_852_546,
];
const AS241_C: [f64; 8] = [
    1.423_437_110_749_683_6,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    0.241_780_725_177_450_6,
    0.022_723_844_989_269_184,
    7.745_450_142_783_414e-4,
];
const AS241_D: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    0.689_767_334_985_1,
    0.148_103_976_427_480_08,
    0.015_198_666_563_616_457,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_8e-9,
];
const AS241_E: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    0.296_560_571_828_504_9,
    0.026_532_189_526_576_124,
    0.001_242_660_947_388_078_4,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const AS241_F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_9,
    0.136_929_880_922_735_8,
    0.014_875_361_290_850_615,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

/// AS241 without domain checks; `p` must lie strictly inside `(0, 1)`.
#[inline]
pub(crate) fn inv_cdf_unchecked<T: Real>(p: T) -> T {
    let q = p - T::lit(0.5);
    if q.abs() <= T::lit(0.425) {
        let r = T::lit(0.180_625) - q * q;
        return q * horner(&AS241_A, r) / horner(&AS241_B, r);
    }
    let tail = if q < T::zero() { p } else { T::one() - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= T::lit(5.0) {
        r = r - T::lit(1.6);
        horner(&AS241_C, r) / horner(&AS241_D, r)
    } else {
        r = r - T::lit(5.0);
        horner(&AS241_E, r) / horner(&AS241_F, r)
    };
    if q < T::zero() {
        -val
    } else {
        val
    }
}

/// Standard normal quantile `N^{-1}(p)`.
pub fn normal_inv_cdf<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return domain(format!("normal_inv_cdf requires 0 < p < 1, got {p}"));
    }
    Ok(inv_cdf_unchecked(p))
}

/// Gaussian CVaR constant `C_alpha = phi(N^{-1}(alpha)) / (1 - alpha)`, the
/// expected shortfall of a standard normal at level `alpha`.
pub fn gaussian_cvar_constant<T: Real>(alpha: T) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return domain(format!(
            "CVaR confidence level must lie in (0, 1), got {alpha}"
        ));
    }
    let x = inv_cdf_unchecked(alpha);
    Ok(normal_pdf(x) / (T::one() - alpha))
}
