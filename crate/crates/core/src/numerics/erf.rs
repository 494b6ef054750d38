//! The error-function family: `erf`, `erfc` and `erfinv`.
//!
//! `erf`/`erfc` use W. J. Cody's rational Chebyshev approximations on the
//! three intervals `|x| <= 0.46875`, `0.46875 < |x| <= 4` and `|x| > 4`.
//! `erfc` is evaluated directly (never as `1 - erf`) away from the origin, so
//! the upper tail keeps full relative precision until it underflows near
//! `x = 26.5`.
//!
//! `erfinv` starts from a short rational approximation and is polished with
//! Newton steps on `erf` (centre) or `erfc` (tails).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const CENTRE: f64 = 0.46875;
const MID: f64 = 4.0;
/// Beyond this `erfc(x)` underflows to zero in double precision.
const XBIG: f64 = 26.543;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_8;

const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_5,
    0.185_777_706_184_603_15,
];
const B: [f64; 4] = [
    23.601_290_952_344_121,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const C: [f64; 9] = [
    0.564_188_496_988_670_09,
    8.883_149_794_388_375_9,
    66.119_190_637_141_63,
    298.635_138_197_400_13,
    881.952_221_241_769_09,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_3,
    2.153_115_354_744_038_5e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_86,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247_2,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const P: [f64; 6] = [
    0.305_326_634_961_232_34,
    0.360_344_899_949_804_44,
    0.125_781_726_111_229_25,
    0.016_083_785_148_742_277,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_098,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_4,
    1.872_952_849_923_460_5,
    0.527_905_102_951_428_41,
    0.060_518_341_312_441_319,
    0.002_335_204_976_268_691_9,
];

#[inline(always)]
fn k<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

/// `erf(x)/x` for `|x| <= 0.46875`, argument `z = x^2`.
#[inline]
fn centre_ratio<T: Scalar>(z: T) -> T {
    let num = (((k::<T>(A[4]) * z + k(A[0])) * z + k(A[1])) * z + k(A[2])) * z + k(A[3]);
    let den = (((z + k(B[0])) * z + k(B[1])) * z + k(B[2])) * z + k(B[3]);
    num / den
}

/// `erfc(y) * exp(y^2)` for `0.46875 < y <= 4`.
#[inline]
fn mid_scaled<T: Scalar>(y: T) -> T {
    let mut num = k::<T>(C[8]) * y;
    for &c in &C[..7] {
        num = (num + k(c)) * y;
    }
    num = num + k(C[7]);
    let mut den = y;
    for &d in &D[..7] {
        den = (den + k(d)) * y;
    }
    den = den + k(D[7]);
    num / den
}

/// `erfc(y) * exp(y^2)` for `y > 4`.
#[inline]
fn tail_scaled<T: Scalar>(y: T) -> T {
    let z = (y * y).recip();
    let mut num = k::<T>(P[5]) * z;
    for &p in &P[..4] {
        num = (num + k(p)) * z;
    }
    num = num + k(P[4]);
    let mut den = z;
    for &q in &Q[..4] {
        den = (den + k(q)) * z;
    }
    den = den + k(Q[4]);
    let r = z * num / den;
    (k::<T>(FRAC_1_SQRT_PI) - r) / y
}

/// `exp(-y^2)` with `y^2` split so the rounding error of the square does not
/// get amplified by the exponential.
#[inline]
fn exp_neg_square<T: Scalar>(y: T) -> T {
    let sixteen = k::<T>(16.0);
    let head = (y * sixteen).trunc() / sixteen;
    let tail = (y - head) * (y + head);
    (-head * head).exp() * (-tail).exp()
}

/// `erfc(|x|)` for `|x| > 0.46875`.
#[inline]
fn erfc_outer<T: Scalar>(y: T) -> T {
    if y >= k(XBIG) {
        T::zero()
    } else if y <= k(MID) {
        mid_scaled(y) * exp_neg_square(y)
    } else {
        tail_scaled(y) * exp_neg_square(y)
    }
}

pub(crate) fn erf_unchecked<T: Scalar>(x: T) -> T {
    let y = x.abs();
    if y <= k(CENTRE) {
        return x * centre_ratio(y * y);
    }
    let tail = erfc_outer(y);
    if x < T::zero() {
        tail - T::one()
    } else {
        T::one() - tail
    }
}

pub(crate) fn erfc_unchecked<T: Scalar>(x: T) -> T {
    let y = x.abs();
    if y <= k(CENTRE) {
        return T::one() - x * centre_ratio(y * y);
    }
    let tail = erfc_outer(y);
    if x < T::zero() {
        k::<T>(2.0) - tail
    } else {
        tail
    }
}

fn check_finite<T: Scalar>(op: &'static str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("argument must be finite, got {x}")))
    }
}

/// The error function `2/sqrt(pi) * integral_0^x exp(-t^2) dt`.
pub fn erf<T: Scalar>(x: T) -> Result<T> {
    check_finite("erf", x)?;
    Ok(erf_unchecked(x))
}

/// The complementary error function `1 - erf(x)`, computed without cancellation
/// for positive `x`.
pub fn erfc<T: Scalar>(x: T) -> Result<T> {
    check_finite("erfc", x)?;
    Ok(erfc_unchecked(x))
}

/// Single-precision-grade starting point (Giles 2010).
#[inline]
fn erfinv_seed<T: Scalar>(p: T, w: T) -> T {
    let poly = if w < k(5.0) {
        let w = w - k(2.5);
        let mut r = k::<T>(2.810_226_36e-08);
        for c in [
            3.432_739_39e-07,
            -3.523_387_7e-06,
            -4.391_506_54e-06,
            0.000_218_580_87,
            -0.001_253_725_03,
            -0.004_177_681_64,
            0.246_640_727,
            1.501_409_41,
        ] {
            r = k::<T>(c) + r * w;
        }
        r
    } else {
        let w = w.sqrt() - k(3.0);
        let mut r = k::<T>(-0.000_200_214_257);
        for c in [
            0.000_100_950_558,
            0.001_349_343_22,
            -0.003_673_428_44,
            0.005_739_507_73,
            -0.007_622_461_3,
            0.009_438_870_47,
            1.001_674_06,
            2.832_976_82,
        ] {
            r = k::<T>(c) + r * w;
        }
        r
    };
    poly * p
}

/// Seed accuracy is about 1e-7 relative while `w = -ln(1 - p^2)` stays below
/// this; two Newton steps then reach full precision.
const SEED_RELIABLE_W: f64 = 16.0;
const MAX_NEWTON_STEPS: usize = 8;

pub(crate) fn erfinv_unchecked<T: Scalar>(p: T) -> T {
    if p == T::zero() {
        return T::zero();
    }
    let a = p.abs();
    let centre = a <= k::<T>(0.5);
    // 1 - a is exact for a >= 0.5 and carries the tail information the
    // refinement needs.
    let q = T::one() - a;
    let w = -(q * (T::one() + a)).ln();
    let mut x = erfinv_seed(a, w);
    let two_over_sqrt_pi = k::<T>(2.0 * FRAC_1_SQRT_PI);
    let far_tail = w >= k(SEED_RELIABLE_W);
    let steps = if far_tail { MAX_NEWTON_STEPS } else { 2 };
    for _ in 0..steps {
        let gauss = (-x * x).exp();
        if gauss == T::zero() {
            break;
        }
        let step = if centre {
            (erf_unchecked(x) - a) / (two_over_sqrt_pi * gauss)
        } else {
            // (erfc(x) - q) / erfc'(x) with erfc(x) = scaled(x) * exp(-x^2)
            let scaled = if x <= k(MID) { mid_scaled(x) } else { tail_scaled(x) };
            (q / gauss - scaled) / two_over_sqrt_pi
        };
        x = x - step;
        if far_tail && step.abs() <= k::<T>(4.0) * T::epsilon() * x.abs() {
            break;
        }
    }
    if p < T::zero() {
        -x
    } else {
        x
    }
}

/// Inverse of [`erf`] on the open interval `(-1, 1)`.
///
/// Vote shares at exactly 0 or 1 map to `±inf`; callers that start from a
/// share should go through [`clamp_vote_share`] first.
pub fn erfinv<T: Scalar>(p: T) -> Result<T> {
    if !(p.abs() < T::one()) {
        return Err(Error::domain(
            "erfinv",
            format!("argument must lie in (-1, 1), got {p}"),
        ));
    }
    Ok(erfinv_unchecked(p))
}

/// Smallest distance from {0, 1} a vote share is allowed before `erfinv`.
pub const VOTE_SHARE_EPS: f64 = 1e-12;

/// Clamps a vote share to `[1e-12, 1 - 1e-12]`.
#[inline]
pub fn clamp_vote_share<T: Scalar>(y: T) -> T {
    let eps = T::lit(VOTE_SHARE_EPS);
    y.max(eps).min(T::one() - eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent oracles: Maclaurin series with positive terms
    // (erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!) and the
    // Laplace continued fraction for erfc, both summed to convergence.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        2.0 * FRAC_1_SQRT_PI * (-x * x).exp() * sum
    }

    fn erfc_continued_fraction(x: f64) -> f64 {
        // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let mut f = x;
        for n in (1..200).rev() {
            f = x + (n as f64 / 2.0) / f;
        }
        (-x * x).exp() * FRAC_1_SQRT_PI / f
    }

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0_f64).unwrap(), 0.0);
        assert!(rel(erf(1.0_f64).unwrap(), 0.842_700_792_949_714_9) < 1e-15);
        assert!(rel(erfc(5.0_f64).unwrap(), 1.537_459_794_428_034_7e-12) < 1e-14);
        assert_eq!(erfc(0.0_f64).unwrap(), 1.0);
    }

    #[test]
    fn erf_matches_series_oracle() {
        let mut worst = 0.0_f64;
        for i in 1..=300 {
            let x = i as f64 * 0.01;
            worst = worst.max(rel(erf(x).unwrap(), erf_series(x)));
        }
        assert!(worst < 1e-15, "worst relative error {worst:e}");
    }

    #[test]
    fn erfc_matches_continued_fraction_in_tail() {
        let mut worst = 0.0_f64;
        for i in 0..=220 {
            let x = 2.0 + i as f64 * 0.1;
            worst = worst.max(rel(erfc(x).unwrap(), erfc_continued_fraction(x)));
        }
        assert!(worst < 1e-13, "worst relative error {worst:e}");
    }

    #[test]
    fn erfc_positive_until_underflow() {
        let mut x = 0.0;
        while x < 26.0 {
            assert!(erfc(x).unwrap() > 0.0, "erfc({x}) underflowed");
            x += 0.25;
        }
    }

    #[test]
    fn odd_and_reflection_identities() {
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            assert_eq!(erf(x).unwrap(), -erf(-x).unwrap());
            assert!((erfc(-x).unwrap() - (2.0 - erfc(x).unwrap())).abs() < 1e-15);
            let e = erf(x).unwrap();
            assert!(e.abs() <= 1.0);
            let c = erfc(x).unwrap();
            // 2 - erfc(6) rounds to exactly 2.0 in double precision.
            assert!(c > 0.0 && c <= 2.0);
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(erf(f64::NAN).is_err());
        assert!(erfc(f64::INFINITY).is_err());
        assert!(erfinv(1.0_f64).is_err());
        assert!(erfinv(-1.0_f64).is_err());
        assert!(erfinv(f64::NAN).is_err());
    }

    #[test]
    fn erfinv_examples() {
        assert_eq!(erfinv(0.0_f64).unwrap(), 0.0);
        assert!((erfinv(0.842_700_792_949_714_9_f64).unwrap() - 1.0).abs() < 1e-12);
        for p in [-0.9, -0.5, 0.1, 0.8] {
            let back = erf(erfinv(p).unwrap()).unwrap();
            assert!(rel(back, p) < 1e-12);
        }
    }

    #[test]
    fn erfinv_round_trip_dense() {
        let mut worst = 0.0_f64;
        let n = 20_000;
        for i in 0..=n {
            let p = -1.0 + 1e-9 + (2.0 - 2e-9) * i as f64 / n as f64;
            let x = erfinv(p).unwrap();
            worst = worst.max(rel(erf(x).unwrap(), p));
            assert_eq!(x, -erfinv(-p).unwrap());
        }
        assert!(worst < 1e-12, "worst round trip {worst:e}");
    }

    #[test]
    fn erfinv_tail_round_trip_through_erfc() {
        // Near |p| = 1 the information lives in 1 - p.
        for q in [1e-3, 1e-6, 1e-9, 1e-11, 2e-12] {
            let x = erfinv(1.0 - q).unwrap();
            let q_back = erfc(x).unwrap();
            // 1 - q itself is rounded, so compare against the representable q.
            let q_repr = 1.0 - (1.0 - q);
            assert!(rel(q_back, q_repr) < 1e-10, "q={q:e}: got {q_back:e}");
        }
    }

    #[test]
    fn single_precision_is_usable() {
        assert!((erf(1.0_f32).unwrap() - 0.842_700_8).abs() < 1e-6);
        let x = erfinv(0.5_f32).unwrap();
        assert!((erf(x).unwrap() - 0.5).abs() < 1e-6);
        assert!(erfc(5.0_f32).unwrap() > 0.0);
    }

    #[test]
    fn clamp_keeps_interior() {
        assert_eq!(clamp_vote_share(0.0_f64), 1e-12);
        assert_eq!(clamp_vote_share(1.0_f64), 1.0 - 1e-12);
        assert_eq!(clamp_vote_share(0.3_f64), 0.3);
    }
}
