//! The shadow diffusion `X` and its bounded dual `Y = S(X)`.
//!
//! With `S(x) = 1/2 + erf(x)/2` and `dX = sigma^2 X dt + sigma dW` the dual is
//! driftless, `dY = s(Y) dW` with `s(y) = sigma/sqrt(pi) * exp(-S^-1(y)^2)`.
//! `X` is a mean-repelling Ornstein–Uhlenbeck process, so its transition over
//! any horizon is Gaussian and can be sampled exactly. `Y` is simulated with
//! Euler–Maruyama and kept inside `[1e-12, 1 - 1e-12]`.
//!
//! Ensembles give each path its own counter-based stream
//! (`seed.nth(path_index)`), which makes results independent of the rayon
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    clamp_vote_share, erf_unchecked, erfinv_unchecked, GaussianStream, SeedSpec, VOTE_SHARE_EPS,
};
use crate::scalar::Scalar;

/// Default Euler step for oracle runs, in years.
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmoidVariant {
    /// `1/2 + erf(x)/2`; the transform every price is built on.
    ErfBased,
    /// `1 / (1 + e^-x)`.
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartingaleSide {
    XIsMartingale,
    YIsMartingale,
}

/// A point of the unobservable shadow process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowState<T> {
    pub x: T,
    /// Years since the start of the process.
    pub time: T,
}

impl<T: Scalar> ShadowState<T> {
    pub fn from_vote_share(y: T, time: T) -> Result<Self> {
        Ok(Self {
            x: sigmoid_inverse(SigmoidVariant::ErfBased, y)?,
            time,
        })
    }

    pub fn vote_share(&self) -> T {
        sigmoid_map(SigmoidVariant::ErfBased, self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExactXMapped,
    EulerY,
}

/// Terminal vote shares of a seeded Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnsemble<T> {
    pub terminal_values: Vec<T>,
    pub n_paths: usize,
    /// Step actually used (the horizon divided into whole steps); equals the
    /// horizon for the exact scheme.
    pub dt: T,
    /// Stream of path 0; path `i` uses `seed.nth(i)`.
    pub seed: SeedSpec,
    pub scheme: Scheme,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut sum, mut mean, mut m2) = (0usize, 0.0, 0.0, 0.0);
        for x in xs {
            n += 1;
            sum += x;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Self {
            mean: if n > 0 { sum / n as f64 } else { 0.0 },
            std_error: (var / n.max(1) as f64).sqrt(),
        }
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

impl<T: Scalar> PathEnsemble<T> {
    pub fn mean(&self) -> Estimate {
        Estimate::from_samples(self.terminal_values.iter().map(|v| v.as_f64()))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean().mean;
        let n = self.terminal_values.len();
        self.terminal_values
            .iter()
            .map(|v| (v.as_f64() - m).powi(2))
            .sum::<f64>()
            / (n.max(2) - 1) as f64
    }

    /// Fraction of paths ending at or above `threshold`, i.e. the Monte Carlo
    /// price of the binary.
    pub fn prob_at_or_above(&self, threshold: T) -> Estimate {
        Estimate::from_samples(
            self.terminal_values
                .iter()
                .map(|&v| if v >= threshold { 1.0 } else { 0.0 }),
        )
    }

    /// Sample skewness with its large-sample standard error `sqrt(6/n)`.
    pub fn skewness(&self) -> Estimate {
        let m = self.mean().mean;
        let n = self.terminal_values.len() as f64;
        let (m2, m3) = self.terminal_values.iter().fold((0.0, 0.0), |(a, b), v| {
            let d = v.as_f64() - m;
            (a + d * d, b + d * d * d)
        });
        let (m2, m3) = (m2 / n, m3 / n);
        Estimate {
            mean: m3 / m2.powf(1.5),
            std_error: (6.0 / n).sqrt(),
        }
    }
}

pub fn sigmoid_map<T: Scalar>(variant: SigmoidVariant, x: T) -> T {
    match variant {
        SigmoidVariant::ErfBased => T::lit(0.5) + T::lit(0.5) * erf_unchecked(x),
        SigmoidVariant::Logistic => T::one() / (T::one() + (-x).exp()),
    }
}

pub fn sigmoid_inverse<T: Scalar>(variant: SigmoidVariant, y: T) -> Result<T> {
    if !(y > T::zero() && y < T::one()) {
        return Err(Error::domain(
            "sigmoid_inverse",
            format!("vote share must lie strictly inside (0, 1), got {y}"),
        ));
    }
    Ok(match variant {
        SigmoidVariant::ErfBased => erfinv_unchecked(T::lit(2.0) * y - T::one()),
        SigmoidVariant::Logistic => (y / (T::one() - y)).ln(),
    })
}

/// Mean `x0 e^{sigma^2 tau}` and variance `(e^{2 sigma^2 tau} - 1)/2` of the
/// shadow state after `horizon` years.
pub fn time_slice_moments<T: Scalar>(x0: T, sigma: T, horizon: T) -> (T, T) {
    let spread = sigma * sigma * horizon;
    (
        x0 * spread.exp(),
        T::lit(0.5) * (T::lit(2.0) * spread).exp_m1(),
    )
}

fn check_sim<T: Scalar>(op: &'static str, sigma: T, horizon: T, n_paths: usize) -> Result<()> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(Error::domain(op, format!("sigma must be finite and non-negative, got {sigma}")));
    }
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::domain(op, format!("horizon must be positive, got {horizon}")));
    }
    if n_paths == 0 {
        return Err(Error::domain(op, "need at least one path"));
    }
    Ok(())
}

fn check_share<T: Scalar>(op: &'static str, y0: T) -> Result<()> {
    if y0 > T::zero() && y0 < T::one() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("y0 must lie strictly inside (0, 1), got {y0}")))
    }
}

/// Splits `horizon` into whole steps no longer than `dt`.
fn step_count<T: Scalar>(op: &'static str, horizon: T, dt: T) -> Result<(usize, T)> {
    if !(dt > T::zero()) {
        return Err(Error::domain(op, format!("dt must be positive, got {dt}")));
    }
    if dt > horizon {
        return Err(Error::domain(
            op,
            format!("dt ({dt}) must not exceed the horizon ({horizon})"),
        ));
    }
    let ratio = (horizon / dt).as_f64();
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        ratio.ceil()
    } as usize;
    Ok((n.max(1), horizon / T::lit(n.max(1) as f64)))
}

/// Exact draws of `X_T` given `X_0 = x0` under `dX = sigma^2 X dt + sigma dW`.
pub fn x_transition_sample<T: Scalar>(
    x0: T,
    sigma: T,
    horizon: T,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<Vec<T>> {
    check_sim("x_transition_sample", sigma, horizon, n_paths)?;
    if !x0.is_finite() {
        return Err(Error::domain("x_transition_sample", "x0 must be finite"));
    }
    let (mean, var) = time_slice_moments(x0, sigma, horizon);
    let sd = var.sqrt();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| mean + sd * T::lit(GaussianStream::new(seed.nth(i as u64)).next_normal()))
        .collect())
}

/// Terminal vote shares obtained by mapping exact shadow draws through `S`.
pub fn sample_y_exact<T: Scalar>(
    y0: T,
    sigma: T,
    horizon: T,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<PathEnsemble<T>> {
    check_share("sample_y_exact", y0)?;
    let x0 = erfinv_unchecked(T::lit(2.0) * clamp_vote_share(y0) - T::one());
    let xs = x_transition_sample(x0, sigma, horizon, n_paths, seed)?;
    Ok(PathEnsemble {
        terminal_values: xs
            .into_iter()
            .map(|x| sigmoid_map(SigmoidVariant::ErfBased, x))
            .collect(),
        n_paths,
        dt: horizon,
        seed,
        scheme: Scheme::ExactXMapped,
    })
}

/// Exact draws of `x0 + sigma W_T`, the shadow state when `X` itself is taken
/// to be driftless.
pub fn brownian_terminal_sample<T: Scalar>(
    x0: T,
    sigma: T,
    horizon: T,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<Vec<T>> {
    check_sim("brownian_terminal_sample", sigma, horizon, n_paths)?;
    let sd = sigma * horizon.sqrt();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| x0 + sd * T::lit(GaussianStream::new(seed.nth(i as u64)).next_normal()))
        .collect())
}

/// Drift used when stepping the shadow process directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowDrift {
    /// `sigma^2 X`: the dynamics under which `Y = S(X)` is a martingale.
    MeanRepelling,
    Driftless,
}

/// Euler–Maruyama on the shadow process. Kept for drift checks; pricing uses
/// the exact transition instead.
pub fn simulate_x_euler<T: Scalar>(
    x0: T,
    sigma: T,
    horizon: T,
    dt: T,
    n_paths: usize,
    seed: SeedSpec,
    drift: ShadowDrift,
) -> Result<Vec<T>> {
    check_sim("simulate_x_euler", sigma, horizon, n_paths)?;
    let (n_steps, h) = step_count("simulate_x_euler", horizon, dt)?;
    let vol = sigma * h.sqrt();
    let pull = match drift {
        ShadowDrift::MeanRepelling => sigma * sigma * h,
        ShadowDrift::Driftless => T::zero(),
    };
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut g = GaussianStream::new(seed.nth(i as u64));
            let mut x = x0;
            for _ in 0..n_steps {
                x = x + pull * x + vol * T::lit(g.next_normal());
            }
            x
        })
        .collect())
}

/// One Euler–Maruyama step of `dY = s(Y) dW`, clamped to `[1e-12, 1 - 1e-12]`.
#[derive(Debug, Clone, Copy)]
pub struct EulerY<T> {
    scale: T,
    lo: T,
    hi: T,
}

impl<T: Scalar> EulerY<T> {
    pub fn new(sigma: T, h: T) -> Self {
        let eps = T::lit(VOTE_SHARE_EPS);
        Self {
            scale: sigma * (h / T::PI()).sqrt(),
            lo: eps,
            hi: T::one() - eps,
        }
    }

    #[inline]
    pub fn step(&self, y: T, z: T) -> T {
        let x = erfinv_unchecked(T::lit(2.0) * y - T::one());
        let next = y + self.scale * (-x * x).exp() * z;
        next.max(self.lo).min(self.hi)
    }
}

/// Euler–Maruyama ensemble for the vote share.
pub fn simulate_y_paths<T: Scalar>(
    y0: T,
    sigma: T,
    horizon: T,
    dt: T,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<PathEnsemble<T>> {
    check_share("simulate_y_paths", y0)?;
    check_sim("simulate_y_paths", sigma, horizon, n_paths)?;
    let (n_steps, h) = step_count("simulate_y_paths", horizon, dt)?;
    let stepper = EulerY::new(sigma, h);
    let start = clamp_vote_share(y0);
    let terminal_values = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut g = GaussianStream::new(seed.nth(i as u64));
            let mut y = start;
            for _ in 0..n_steps {
                y = stepper.step(y, T::lit(g.next_normal()));
            }
            y
        })
        .collect();
    Ok(PathEnsemble {
        terminal_values,
        n_paths,
        dt: h,
        seed,
        scheme: Scheme::EulerY,
    })
}

/// Vote share observed at each of `times` (increasing, starting after 0) along
/// one exactly simulated path from `y0`.
pub fn exact_y_path<T: Scalar>(y0: T, sigma: T, times: &[T], seed: SeedSpec) -> Result<Vec<T>> {
    check_share("exact_y_path", y0)?;
    let mut g = GaussianStream::new(seed);
    let mut x = erfinv_unchecked(T::lit(2.0) * clamp_vote_share(y0) - T::one());
    let mut t = T::zero();
    let mut out = Vec::with_capacity(times.len());
    for &next in times {
        if !(next > t) {
            return Err(Error::domain("exact_y_path", "observation times must increase"));
        }
        let (mean, var) = time_slice_moments(x, sigma, next - t);
        x = mean + var.sqrt() * T::lit(g.next_normal());
        t = next;
        out.push(sigmoid_map(SigmoidVariant::ErfBased, x));
    }
    Ok(out)
}

/// Diffusion coefficient `s(y) = sigma/sqrt(pi) * exp(-S^-1(y)^2)` of the vote
/// share. Extended continuously by 0 at the endpoints.
pub fn instantaneous_vol<T: Scalar>(y: T, sigma: T) -> T {
    if !(y > T::zero() && y < T::one()) {
        return T::zero();
    }
    let x = erfinv_unchecked(T::lit(2.0) * y - T::one());
    sigma * T::PI().sqrt().recip() * (-x * x).exp()
}

/// Itô drift of the side that is *not* a martingale when the other side is.
///
/// * `YIsMartingale` returns the drift of `X` at shadow state `value`:
///   `sigma^2 x` (erf) or `sigma^2/2 tanh(x/2)` (logistic).
/// * `XIsMartingale` returns the drift of `Y` at vote share `value`:
///   `-sigma^2 x e^{-x^2}/sqrt(pi)` with `x = S^-1(y)` (erf) or
///   `sigma^2/2 y (y - 1)(2y - 1)` (logistic).
pub fn dual_drift<T: Scalar>(
    variant: SigmoidVariant,
    side: MartingaleSide,
    value: T,
    sigma: T,
) -> Result<T> {
    let half_var = T::lit(0.5) * sigma * sigma;
    match side {
        MartingaleSide::YIsMartingale => {
            if !value.is_finite() {
                return Err(Error::domain("dual_drift", "shadow state must be finite"));
            }
            Ok(match variant {
                SigmoidVariant::ErfBased => sigma * sigma * value,
                SigmoidVariant::Logistic => half_var * (T::lit(0.5) * value).tanh(),
            })
        }
        MartingaleSide::XIsMartingale => {
            let x = sigmoid_inverse(variant, value)?;
            Ok(match variant {
                SigmoidVariant::ErfBased => {
                    -sigma * sigma * T::PI().sqrt().recip() * x * (-x * x).exp()
                }
                SigmoidVariant::Logistic => {
                    half_var * value * (value - T::one()) * (T::lit(2.0) * value - T::one())
                }
            })
        }
    }
}

/// `max |s(y)/s(1/2) - 4 y (1 - y)|` over an even grid on `[lo, hi]`: how far
/// the diffusion coefficient is from a rescaled parabola.
pub fn quadratic_vol_deviation<T: Scalar>(lo: T, hi: T, points: usize) -> T {
    let peak = instantaneous_vol(T::lit(0.5), T::one());
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let y = lo + (hi - lo) * T::lit(i as f64) / T::lit((n - 1) as f64);
            (instantaneous_vol(y, T::one()) / peak - T::lit(4.0) * y * (T::one() - y)).abs()
        })
        .fold(T::zero(), T::max)
}
