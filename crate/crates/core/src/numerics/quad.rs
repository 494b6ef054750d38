//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The 15-point Kronrod rule never evaluates the integrand at the interval
//! endpoints, so integrable endpoint singularities are tolerated. The error of
//! each panel is estimated by `|K15 - G7|`; the panel with the largest estimate
//! is bisected until the total estimate drops below the requested tolerance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const EVALS_PER_PANEL: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions<T> {
    /// Absolute error target.
    pub abs_tol: T,
    /// Relative error target; the effective target is `max(abs_tol, rel_tol * |value|)`.
    pub rel_tol: T,
    pub max_evaluations: usize,
}

impl<T: Scalar> QuadratureOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: T::zero(),
            max_evaluations: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod_panel<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let centre = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half_len,
        error: ((kronrod - gauss) * half_len).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<T: Scalar, F: FnMut(T) -> T>(
    f: F,
    a: T,
    b: T,
    tol: T,
) -> Result<QuadratureResult<T>> {
    integrate_with(f, &[a, b], QuadratureOptions::with_tol(tol))
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be strictly increasing). Supplying
/// breakpoints near peaks or kinks saves the adaptive search from finding them.
pub fn integrate_with<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    opts: QuadratureOptions<T>,
) -> Result<QuadratureResult<T>> {
    if points.len() < 2 {
        return Err(Error::domain(
            "integrate",
            "need at least the two interval endpoints",
        ));
    }
    for w in points.windows(2) {
        if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::domain(
                "integrate",
                format!("integration limits must be finite and increasing, got {} .. {}", w[0], w[1]),
            ));
        }
    }

    let mut panels: Vec<Panel<T>> = points
        .windows(2)
        .map(|w| kronrod_panel(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = panels.len() * EVALS_PER_PANEL;
    // Panels that can no longer be split in this precision keep their error
    // but are excluded from further bisection.
    let mut frozen_error = T::zero();
    let mut frozen_value = T::zero();

    loop {
        let value = panels.iter().fold(frozen_value, |s, p| s + p.value);
        let error = panels.iter().fold(frozen_error, |s, p| s + p.error);
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || panels.is_empty() {
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
            });
        }
        if evaluations + 2 * EVALS_PER_PANEL > opts.max_evaluations {
            return Err(Error::Convergence {
                estimate: value.as_f64(),
                abs_error_estimate: error.as_f64(),
                evaluations,
            });
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = T::lit(0.5) * (p.a + p.b);
        if !(p.a < mid && mid < p.b) {
            frozen_error = frozen_error + p.error;
            frozen_value = frozen_value + p.value;
            continue;
        }
        panels.push(kronrod_panel(&mut f, p.a, mid));
        panels.push(kronrod_panel(&mut f, mid, p.b));
        evaluations += 2 * EVALS_PER_PANEL;
    }
}
