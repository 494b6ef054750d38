//! Arbitrage-free value of a binary election contract.
//!
//! The vote share `Y = S(X) = 1/2 + erf(X)/2` is a driftless image of the
//! shadow process `dX = sigma^2 X dt + sigma dW`. Over a horizon `tau` the
//! shadow state is Gaussian with mean `x0 e^{sigma^2 tau}` and variance
//! `(e^{2 sigma^2 tau} - 1)/2`, so the price of "share ends at or above the
//! threshold `l`" is
//!
//! ```text
//! B = 1/2 erfc( (S^-1(l) - S^-1(y0) e^{sigma^2 tau}) / sqrt(e^{2 sigma^2 tau} - 1) )
//! ```
//!
//! The threshold is given as a vote share and mapped through `S^-1` before use.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{clamp_vote_share, erfc_unchecked, erfinv_unchecked};
use crate::process::time_slice_moments;
use crate::scalar::Scalar;

/// Above this total shadow variance `sigma^2 tau` the price is replaced by its
/// limit `y0` (the exponentials overflow shortly after).
pub const LARGE_SPREAD: f64 = 350.0;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// A forecast probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct BinaryPrice<T> {
    value: T,
}

impl<T: Scalar> BinaryPrice<T> {
    pub fn new(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Self { value })
        } else {
            Err(Error::domain(
                "BinaryPrice",
                format!("price must lie in [0, 1], got {value}"),
            ))
        }
    }

    #[inline]
    fn clamped(value: T) -> Self {
        Self {
            value: value.max(T::zero()).min(T::one()),
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.value
    }
}

/// Volatility in either space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolSpec<T> {
    /// Volatility `s` of the vote share over the pricing horizon.
    VoteVol(T),
    /// Annualized volatility `sigma` of the shadow process.
    ShadowVol(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PricingInputs<T> {
    pub y0: T,
    /// Years until the outcome is revealed.
    pub horizon: T,
    pub threshold: T,
    pub vol: VolSpec<T>,
}

impl<T: Scalar> PricingInputs<T> {
    pub fn new(y0: T, horizon: T, threshold: T, vol: VolSpec<T>) -> Result<Self> {
        check_share("PricingInputs", "y0", y0)?;
        check_share("PricingInputs", "threshold", threshold)?;
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::domain(
                "PricingInputs",
                format!("horizon must be positive and finite, got {horizon}"),
            ));
        }
        let v = match vol {
            VolSpec::VoteVol(v) | VolSpec::ShadowVol(v) => v,
        };
        check_vol("PricingInputs", v)?;
        Ok(Self {
            y0,
            horizon,
            threshold,
            vol,
        })
    }

    /// Shadow volatility implied by the inputs.
    pub fn shadow_vol(&self) -> Result<T> {
        match self.vol {
            VolSpec::ShadowVol(sigma) => Ok(sigma),
            VolSpec::VoteVol(s) => sigma_from_s(s, self.y0, self.horizon),
        }
    }

    pub fn price(&self) -> Result<BinaryPrice<T>> {
        price_binary(self.y0, self.shadow_vol()?, self.horizon, self.threshold)
    }
}

fn check_share<T: Scalar>(op: &'static str, name: &str, y: T) -> Result<()> {
    if y > T::zero() && y < T::one() {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            format!("{name} must lie strictly inside (0, 1), got {y}"),
        ))
    }
}

fn check_vol<T: Scalar>(op: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            format!("volatility must be finite and non-negative, got {v}"),
        ))
    }
}

fn check_horizon<T: Scalar>(op: &'static str, horizon: T) -> Result<()> {
    if horizon >= T::zero() && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            format!("horizon must be finite and non-negative, got {horizon}"),
        ))
    }
}

#[inline]
pub(crate) fn shadow_of_share<T: Scalar>(y: T) -> T {
    erfinv_unchecked(T::lit(2.0) * clamp_vote_share(y) - T::one())
}

/// Survival price with the spread `a = sigma^2 tau` already formed.
#[inline]
pub(crate) fn price_kernel<T: Scalar>(x0: T, x_threshold: T, spread: T) -> T {
    if spread == T::zero() {
        return step(x0, x_threshold);
    }
    if spread > T::lit(LARGE_SPREAD) {
        // erfc argument tends to -x0: B -> S(x0).
        return T::lit(0.5) * erfc_unchecked(-x0);
    }
    let denom = (T::lit(2.0) * spread).exp_m1().sqrt();
    let arg = (x_threshold - x0 * spread.exp()) / denom;
    T::lit(0.5) * erfc_unchecked(arg)
}

#[inline]
fn step<T: Scalar>(x: T, threshold: T) -> T {
    if x > threshold {
        T::one()
    } else if x < threshold {
        T::zero()
    } else {
        T::lit(0.5)
    }
}

/// Price of the event `Y_T >= threshold` from the current vote share `y0`
/// under shadow volatility `sigma` over `horizon` years.
///
/// `sigma = 0` or `horizon = 0` gives the step `1{y0 > threshold}` (0.5 on a tie).
pub fn price_binary<T: Scalar>(y0: T, sigma: T, horizon: T, threshold: T) -> Result<BinaryPrice<T>> {
    check_share("price_binary", "y0", y0)?;
    check_share("price_binary", "threshold", threshold)?;
    check_vol("price_binary", sigma)?;
    check_horizon("price_binary", horizon)?;
    let spread = sigma * sigma * horizon;
    if spread == T::zero() {
        return Ok(BinaryPrice::clamped(step(y0, threshold)));
    }
    let x0 = shadow_of_share(y0);
    let xl = shadow_of_share(threshold);
    let b = price_kernel(x0, xl, spread);
    // At the one-half threshold the price is capped (floored) at the vote
    // share. The S(S^-1(y0)) round trip can land an ulp on the wrong side.
    let b = if threshold == T::lit(DEFAULT_THRESHOLD) {
        if y0 > threshold {
            b.max(y0)
        } else {
            b.min(y0)
        }
    } else {
        b
    };
    Ok(BinaryPrice::clamped(b))
}

/// The same price expressed on the shadow process: the Gaussian survival
/// probability `P(X_T > x_threshold)`.
pub fn price_binary_xspace<T: Scalar>(
    x0: T,
    sigma: T,
    horizon: T,
    x_threshold: T,
) -> Result<BinaryPrice<T>> {
    if !x0.is_finite() || !x_threshold.is_finite() {
        return Err(Error::domain(
            "price_binary_xspace",
            "shadow state and threshold must be finite",
        ));
    }
    check_vol("price_binary_xspace", sigma)?;
    check_horizon("price_binary_xspace", horizon)?;
    let spread = sigma * sigma * horizon;
    if spread == T::zero() {
        return Ok(BinaryPrice::clamped(step(x0, x_threshold)));
    }
    if spread > T::lit(LARGE_SPREAD) {
        return Ok(BinaryPrice::clamped(T::lit(0.5) * erfc_unchecked(-x0)));
    }
    let (mean, var) = time_slice_moments(x0, sigma, horizon);
    let z = (x_threshold - mean) / (T::lit(2.0) * var).sqrt();
    Ok(BinaryPrice::clamped(T::lit(0.5) * erfc_unchecked(z)))
}

/// Shadow volatility matching a vote-share volatility `s` to first order
/// (delta method):
///
/// `sigma = sqrt( ln(2 pi s^2 e^{2 S^-1(y0)^2} + 1) ) / (sqrt(2) sqrt(tau))`.
///
/// `s` is the standard deviation of the vote share accumulated over the
/// horizon, so `sigma^2 tau` depends on `s` and `y0` only.
pub fn sigma_from_s<T: Scalar>(s: T, y0: T, horizon: T) -> Result<T> {
    check_vol("sigma_from_s", s)?;
    check_share("sigma_from_s", "y0", y0)?;
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::domain(
            "sigma_from_s",
            format!("horizon must be positive and finite, got {horizon}"),
        ));
    }
    let x0 = shadow_of_share(y0);
    let two = T::lit(2.0);
    let inner = two * T::PI() * s * s * (two * x0 * x0).exp();
    Ok((inner.ln_1p() / (two * horizon)).sqrt())
}

/// Inverse of [`sigma_from_s`]:
/// `s = sqrt( e^{-2 S^-1(y0)^2} (e^{2 sigma^2 tau} - 1) / (2 pi) )`.
pub fn s_from_sigma<T: Scalar>(sigma: T, y0: T, horizon: T) -> Result<T> {
    check_vol("s_from_sigma", sigma)?;
    check_share("s_from_sigma", "y0", y0)?;
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::domain(
            "s_from_sigma",
            format!("horizon must be positive and finite, got {horizon}"),
        ));
    }
    let x0 = shadow_of_share(y0);
    let two = T::lit(2.0);
    let growth = (two * sigma * sigma * horizon).exp_m1();
    Ok(((-two * x0 * x0).exp() * growth / (two * T::PI())).sqrt())
}

/// Headline entry point: price from the vote share and its volatility.
pub fn price_binary_from_s<T: Scalar>(
    y0: T,
    s: T,
    horizon: T,
    threshold: T,
) -> Result<BinaryPrice<T>> {
    let sigma = sigma_from_s(s, y0, horizon)?;
    price_binary(y0, sigma, horizon, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint<T> {
    pub y0: T,
    pub s: T,
    pub price: T,
}

/// Prices across a grid of vote shares at fixed `s`.
pub fn price_curve<T: Scalar>(
    s: T,
    horizon: T,
    threshold: T,
    y_grid: &[T],
) -> Result<Vec<CurvePoint<T>>> {
    y_grid
        .iter()
        .map(|&y0| {
            Ok(CurvePoint {
                y0,
                s,
                price: price_binary_from_s(y0, s, horizon, threshold)?.value(),
            })
        })
        .collect()
}

/// `n` evenly spaced interior vote shares `(i + 1) / (n + 1)`; with odd `n`
/// the midpoint is exactly 0.5.
pub fn interior_grid<T: Scalar>(n: usize) -> Vec<T> {
    let d = T::lit((n + 1) as f64);
    (1..=n).map(|i| T::lit(i as f64) / d).collect()
}
