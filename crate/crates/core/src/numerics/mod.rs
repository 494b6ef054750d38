//! Special functions, quadrature and random streams shared by every other module.

mod erf;
mod quad;
mod rng;

pub use erf::{clamp_vote_share, erf, erfc, erfinv, VOTE_SHARE_EPS};
pub(crate) use erf::{erf_unchecked, erfc_unchecked, erfinv_unchecked};
pub use quad::{integrate, integrate_with, QuadratureOptions, QuadratureResult};
pub use rng::{gaussian_stream, philox4x32_10, GaussianStream, PhiloxStream, SeedSpec};
