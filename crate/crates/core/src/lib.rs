//! Arbitrage-free valuation of binary election forecasts.
//!
//! A vote share `Y` in `(0, 1)` is modelled as the image `S(X) = 1/2 + erf(X)/2`
//! of an unbounded shadow diffusion `dX = sigma^2 X dt + sigma dW`, which makes
//! `Y` a martingale. A forecast probability is then the price of a binary
//! option on `Y`, and published forecast series can be audited against it.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod audit;
pub mod density;
pub mod error;
pub mod multicandidate;
pub mod numerics;
pub mod pricing;
pub mod process;
mod scalar;

pub use error::{Error, Result};
pub use numerics::SeedSpec;
pub use scalar::Scalar;

pub type QuadratureResult = numerics::QuadratureResult<f64>;
pub type BinaryPrice = pricing::BinaryPrice<f64>;
pub type PricingInputs = pricing::PricingInputs<f64>;
pub type VolSpec = pricing::VolSpec<f64>;
pub type CurvePoint = pricing::CurvePoint<f64>;
pub type ShadowState = process::ShadowState<f64>;
pub type PathEnsemble = process::PathEnsemble<f64>;
pub type TimeSliceParams = density::TimeSliceParams<f64>;

pub type BinaryPrice32 = pricing::BinaryPrice<f32>;
pub type PricingInputs32 = pricing::PricingInputs<f32>;
pub type TimeSliceParams32 = density::TimeSliceParams<f32>;
