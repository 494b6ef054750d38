//! Time-slice law of the vote share and the quadrature route to the price.
//!
//! With `a = sigma^2 tau`, `x = S^-1(y)`, `x0 = S^-1(y0)` and `E = e^{2a} - 1`,
//!
//! ```text
//! phi(y) = E^{-1/2} exp( x^2 - (coth(a) - 1)/2 * (x - x0 e^a)^2 )
//! ```
//!
//! and `(coth(a) - 1)/2 = 1/E`. For `a` above [`Y_SPACE_MAX_SPREAD`] the
//! density piles up against 0 and 1 (it is unbounded there once `a > ln(2)/2`),
//! so integrals are taken after the substitution `y = S(x)`, where the
//! integrand is `phi(S(x)) S'(x)`, a plain Gaussian in `x`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{clamp_vote_share, erfinv_unchecked, integrate_with, QuadratureOptions};
use crate::pricing::BinaryPrice;
use crate::process::{sigmoid_map, time_slice_moments, SigmoidVariant};
use crate::scalar::Scalar;

/// Largest spread `sigma^2 tau` integrated directly in vote-share space.
pub const Y_SPACE_MAX_SPREAD: f64 = 0.25;

/// Internal quadrature target; results are promised to 1e-8.
const INNER_TOL: f64 = 1e-11;
/// Integration window half-width in shadow standard deviations.
const WINDOW_SDS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSliceParams<T> {
    pub y0: T,
    pub sigma: T,
    pub tau: T,
}

impl<T: Scalar> TimeSliceParams<T> {
    pub fn new(y0: T, sigma: T, tau: T) -> Result<Self> {
        if !(y0 > T::zero() && y0 < T::one()) {
            return Err(Error::domain(
                "TimeSliceParams",
                format!("y0 must lie strictly inside (0, 1), got {y0}"),
            ));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::domain(
                "TimeSliceParams",
                format!("sigma must be positive and finite, got {sigma}"),
            ));
        }
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::domain(
                "TimeSliceParams",
                format!("tau must be positive and finite, got {tau}"),
            ));
        }
        let p = Self { y0, sigma, tau };
        if p.spread() > T::lit(crate::pricing::LARGE_SPREAD) {
            return Err(Error::domain(
                "TimeSliceParams",
                format!("sigma^2 tau = {} overflows the time-slice law", p.spread()),
            ));
        }
        Ok(p)
    }

    #[inline]
    pub fn spread(&self) -> T {
        self.sigma * self.sigma * self.tau
    }

    fn x0(&self) -> T {
        erfinv_unchecked(T::lit(2.0) * clamp_vote_share(self.y0) - T::one())
    }

    /// Mean and standard deviation of the shadow state at `tau`.
    fn shadow_law(&self) -> (T, T) {
        let (m, v) = time_slice_moments(self.x0(), self.sigma, self.tau);
        (m, v.sqrt())
    }
}

/// `ln phi` written in the shadow coordinate `x = S^-1(y)`.
#[inline]
fn ln_phi_shadow<T: Scalar>(x: T, drifted_x0: T, growth: T) -> T {
    let d = x - drifted_x0;
    x * x - d * d / growth - T::lit(0.5) * growth.ln()
}

/// Density of `Y_tau` at vote share `y`; 0 at (and beyond) the endpoints.
pub fn timeslice_density<T: Scalar>(y: T, params: &TimeSliceParams<T>) -> T {
    if !(y > T::zero() && y < T::one()) {
        return T::zero();
    }
    let a = params.spread();
    let growth = (T::lit(2.0) * a).exp_m1();
    let x = erfinv_unchecked(T::lit(2.0) * y - T::one());
    ln_phi_shadow(x, params.x0() * a.exp(), growth).exp()
}

/// The same density built as a change of variables: the Gaussian density of
/// the shadow state at `S^-1(y)` times `dS^-1/dy = sqrt(pi) e^{x^2}`.
pub fn timeslice_density_change_of_variables<T: Scalar>(y: T, params: &TimeSliceParams<T>) -> T {
    if !(y > T::zero() && y < T::one()) {
        return T::zero();
    }
    let (m, sd) = params.shadow_law();
    let x = erfinv_unchecked(T::lit(2.0) * y - T::one());
    let z = (x - m) / sd;
    let gauss = (-T::lit(0.5) * z * z).exp() / (sd * (T::lit(2.0) * T::PI()).sqrt());
    gauss * T::PI().sqrt() * (x * x).exp()
}

fn tol<T: Scalar>() -> T {
    T::lit(INNER_TOL).max(T::lit(1e3) * T::epsilon())
}

fn sorted_unique<T: Scalar>(mut pts: Vec<T>) -> Vec<T> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| !(*a > *b));
    pts
}

/// `E[g(Y_tau)]` restricted to `Y_tau >= lower`, by quadrature of the density.
fn expectation_above<T: Scalar, G: Fn(T) -> T>(
    params: &TimeSliceParams<T>,
    lower: T,
    g: G,
) -> Result<T> {
    let a = params.spread();
    let growth = (T::lit(2.0) * a).exp_m1();
    let x0 = params.x0();
    let drifted = x0 * a.exp();
    let (m, sd) = params.shadow_law();
    let opts = QuadratureOptions::with_tol(tol::<T>());
    let ks = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

    if a <= T::lit(Y_SPACE_MAX_SPREAD) {
        let lo = lower.max(T::zero());
        let mut pts = vec![lo, T::one()];
        for k in ks {
            let y = sigmoid_map(SigmoidVariant::ErfBased, m + T::lit(k) * sd);
            if y > lo && y < T::one() {
                pts.push(y);
            }
        }
        let pts = sorted_unique(pts);
        if pts.len() < 2 {
            return Ok(T::zero());
        }
        let integrand = |y: T| g(y) * timeslice_density(y, params);
        return Ok(integrate_with(integrand, &pts, opts)?.value);
    }

    // y = S(x): phi(S(x)) S'(x) with S'(x) = e^{-x^2}/sqrt(pi).
    let half_ln_pi = T::lit(0.5) * T::PI().ln();
    let integrand = |x: T| {
        let ln_w = ln_phi_shadow(x, drifted, growth) - x * x - half_ln_pi;
        g(sigmoid_map(SigmoidVariant::ErfBased, x)) * ln_w.exp()
    };
    let window = T::lit(WINDOW_SDS) * sd;
    let x_lo = if lower > T::zero() {
        erfinv_unchecked(T::lit(2.0) * clamp_vote_share(lower) - T::one()).max(m - window)
    } else {
        m - window
    };
    let x_hi = m + window;
    if !(x_lo < x_hi) {
        return Ok(T::zero());
    }
    let mut pts = vec![x_lo, x_hi];
    for k in ks {
        let x = m + T::lit(k) * sd;
        if x > x_lo && x < x_hi {
            pts.push(x);
        }
    }
    Ok(integrate_with(integrand, &sorted_unique(pts), opts)?.value)
}

/// `integral_0^1 phi(y) dy`; 1 up to quadrature error.
pub fn density_mass<T: Scalar>(params: &TimeSliceParams<T>) -> Result<T> {
    expectation_above(params, T::zero(), |_| T::one())
}

/// `E[Y_tau]` by quadrature; equals `y0` because `Y` is a martingale.
pub fn density_mean<T: Scalar>(params: &TimeSliceParams<T>) -> Result<T> {
    expectation_above(params, T::zero(), |y| y)
}

/// `E[(Y_tau - y0)^2]` by quadrature. No closed form exists.
pub fn density_variance<T: Scalar>(params: &TimeSliceParams<T>) -> Result<T> {
    let y0 = params.y0;
    expectation_above(params, T::zero(), |y| (y - y0) * (y - y0))
}

/// `integral_threshold^1 phi(y) dy`: the binary price without the closed form.
pub fn price_by_quadrature<T: Scalar>(
    params: &TimeSliceParams<T>,
    threshold: T,
) -> Result<BinaryPrice<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::domain(
            "price_by_quadrature",
            format!("threshold must lie strictly inside (0, 1), got {threshold}"),
        ));
    }
    let v = expectation_above(params, threshold, |_| T::one())?;
    Ok(BinaryPrice::new(v.max(T::zero()).min(T::one()))?)
}

/// Half-width of the tabulation window in shadow standard deviations.
const GRID_SDS: f64 = 8.0;
/// Largest `|x|` tabulated; beyond it `S(x)` is within a few ulps of 0 or 1.
const GRID_X_LIMIT: f64 = 5.5;

/// Tabulates `(y, phi(y))` on a grid that is uniform in the shadow coordinate
/// and spans the bulk of the time-slice law, so the points crowd where the
/// mass is. Vote shares increase along the grid.
pub fn density_grid<T: Scalar>(params: &TimeSliceParams<T>, points: usize) -> Result<Vec<(T, T)>> {
    if points < 3 {
        return Err(Error::domain("density_grid", format!("need at least 3 grid points, got {points}")));
    }
    let a = params.spread();
    let growth = (T::lit(2.0) * a).exp_m1();
    let drifted = params.x0() * a.exp();
    let (m, sd) = params.shadow_law();
    let limit = T::lit(GRID_X_LIMIT);
    let lo = (m - T::lit(GRID_SDS) * sd).max(-limit);
    let hi = (m + T::lit(GRID_SDS) * sd).min(limit);
    if !(lo < hi) {
        return Err(Error::domain(
            "density_grid",
            "the law sits entirely at the boundary in this precision",
        ));
    }
    let step = (hi - lo) / T::lit((points - 1) as f64);
    Ok((0..points)
        .map(|i| {
            let x = if i == points - 1 { hi } else { lo + step * T::lit(i as f64) };
            let y = sigmoid_map(SigmoidVariant::ErfBased, x);
            (y, ln_phi_shadow(x, drifted, growth).exp())
        })
        .collect())
}

/// Trapezoid rule over tabulated `(y, phi)` pairs.
pub fn trapezoid_mass<T: Scalar>(table: &[(T, T)]) -> T {
    table
        .windows(2)
        .fold(T::zero(), |acc, w| acc + T::lit(0.5) * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
}
