//! Scoring and arbitrage audit of published forecast series.
//!
//! A forecaster that publishes probabilities for a binary event is treated as
//! quoting the price of a binary option on the vote share. The audit compares
//! each published number with the fair value implied by the contemporaneous
//! vote-share estimate, measures how much the published series moves relative
//! to what the fair series can move, and computes the P/L of trading against
//! the forecaster.
//!
//! Everything here works in `f64` with calendar dates.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::{price_binary, price_binary_from_s, DEFAULT_THRESHOLD};

pub const DAYS_PER_YEAR: f64 = 365.25;
/// Operational default for the absolute divergence tolerance.
pub const DEFAULT_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub date: NaiveDate,
    pub published_prob: f64,
    pub vote_share_est: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastSeries {
    points: Vec<ForecastPoint>,
    election_date: NaiveDate,
    outcome: Option<bool>,
}

impl ForecastSeries {
    pub fn new(points: Vec<ForecastPoint>, election_date: NaiveDate, outcome: Option<bool>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&p.published_prob) {
                return Err(Error::domain(
                    "ForecastSeries",
                    format!("point {i}: published probability {} outside [0, 1]", p.published_prob),
                ));
            }
            if let Some(y) = p.vote_share_est {
                if !(0.0..=1.0).contains(&y) {
                    return Err(Error::domain(
                        "ForecastSeries",
                        format!("point {i}: vote share {y} outside [0, 1]"),
                    ));
                }
            }
            if p.date > election_date {
                return Err(Error::domain(
                    "ForecastSeries",
                    format!("point {i}: {} is after the election date {election_date}", p.date),
                ));
            }
            if i > 0 && p.date <= points[i - 1].date {
                return Err(Error::domain(
                    "ForecastSeries",
                    format!("point {i}: dates must be strictly increasing ({} after {})", p.date, points[i - 1].date),
                ));
            }
        }
        Ok(Self {
            points,
            election_date,
            outcome,
        })
    }

    pub fn points(&self) -> &[ForecastPoint] {
        &self.points
    }

    pub fn election_date(&self) -> NaiveDate {
        self.election_date
    }

    pub fn outcome(&self) -> Option<bool> {
        self.outcome
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_outcome(mut self, outcome: Option<bool>) -> Self {
        self.outcome = outcome;
        self
    }

    pub fn published(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.published_prob).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.points.iter().map(|p| p.date).collect()
    }

    /// Years from `date` to the election.
    pub fn horizon_at(&self, date: NaiveDate) -> f64 {
        years_between(date, self.election_date)
    }
}

pub fn years_between(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64 / DAYS_PER_YEAR
}

fn indicator(outcome: bool) -> f64 {
    if outcome {
        1.0
    } else {
        0.0
    }
}

fn require_outcome(series: &ForecastSeries, op: &str) -> Result<bool> {
    if series.is_empty() {
        return Err(Error::Precondition(format!("{op}: series is empty")));
    }
    series
        .outcome
        .ok_or_else(|| Error::Precondition(format!("{op}: outcome is required")))
}

/// Mean squared distance of forecasts from outcomes.
pub fn brier(forecasts: &[f64], outcomes: &[bool]) -> Result<f64> {
    paired_mean("brier", forecasts, outcomes, |d| d * d)
}

/// Mean absolute distance of forecasts from outcomes.
pub fn l1(forecasts: &[f64], outcomes: &[bool]) -> Result<f64> {
    paired_mean("l1", forecasts, outcomes, f64::abs)
}

fn paired_mean(op: &str, forecasts: &[f64], outcomes: &[bool], loss: impl Fn(f64) -> f64) -> Result<f64> {
    if forecasts.len() != outcomes.len() {
        return Err(Error::Alignment(format!(
            "{op}: {} forecasts vs {} outcomes",
            forecasts.len(),
            outcomes.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::Precondition(format!("{op}: no forecasts")));
    }
    let total: f64 = forecasts
        .iter()
        .zip(outcomes)
        .map(|(&b, &o)| loss(indicator(o) - b))
        .sum();
    Ok(total / forecasts.len() as f64)
}

/// Brier score of a series against its single outcome.
pub fn brier_score(series: &ForecastSeries) -> Result<f64> {
    let o = require_outcome(series, "brier_score")?;
    let n = series.len() as f64;
    Ok(series.points.iter().map(|p| (indicator(o) - p.published_prob).powi(2)).sum::<f64>() / n)
}

pub fn l1_score(series: &ForecastSeries) -> Result<f64> {
    let o = require_outcome(series, "l1_score")?;
    let n = series.len() as f64;
    Ok(series.points.iter().map(|p| (indicator(o) - p.published_prob).abs()).sum::<f64>() / n)
}

/// Annualized volatility of a dated series: root mean square of
/// `dv / sqrt(dt)` over consecutive observations.
pub fn realized_vol(dates: &[NaiveDate], values: &[f64]) -> Result<f64> {
    if dates.len() != values.len() {
        return Err(Error::Alignment(format!(
            "realized_vol: {} dates vs {} values",
            dates.len(),
            values.len()
        )));
    }
    if values.len() < 2 {
        return Err(Error::Precondition(
            "realized_vol: need at least two observations".into(),
        ));
    }
    let mut acc = 0.0;
    for i in 1..values.len() {
        let dt = years_between(dates[i - 1], dates[i]);
        if !(dt > 0.0) {
            return Err(Error::Precondition(format!(
                "realized_vol: dates must be strictly increasing ({} then {})",
                dates[i - 1],
                dates[i]
            )));
        }
        let dv = values[i] - values[i - 1];
        acc += dv * dv / dt;
    }
    Ok((acc / (values.len() - 1) as f64).sqrt())
}

pub fn realized_forecast_vol(series: &ForecastSeries) -> Result<f64> {
    realized_vol(&series.dates(), &series.published())
}

/// Realized vol over the points that carry a value, skipping gaps.
fn realized_vol_sparse(dates: &[NaiveDate], values: &[Option<f64>]) -> Option<f64> {
    let (d, v): (Vec<_>, Vec<_>) = dates
        .iter()
        .zip(values)
        .filter_map(|(&d, v)| v.map(|v| (d, v)))
        .unzip();
    realized_vol(&d, &v).ok()
}

/// Annualized vote-share volatility estimated from the `vote_share_est`
/// increments.
pub fn estimate_vote_vol(series: &ForecastSeries) -> Result<f64> {
    let shares: Vec<Option<f64>> = series.points.iter().map(|p| p.vote_share_est).collect();
    realized_vol_sparse(&series.dates(), &shares).ok_or_else(|| {
        Error::Precondition("estimate_vote_vol: need at least two vote-share estimates".into())
    })
}

/// How the volatility feeding the fair values is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum VolInput {
    /// Annualized vote-share volatility; over a horizon `tau` it accumulates
    /// to `s * sqrt(tau)`.
    VoteVol(f64),
    /// Shadow volatility used directly.
    ShadowVol(f64),
    /// Annualized vote-share volatility estimated from the series itself.
    EstimateFromShares,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolSource {
    Supplied,
    Shadow,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ResolvedVol {
    Vote(f64),
    Shadow(f64),
}

fn resolve_vol(series: &ForecastSeries, vol: VolInput) -> Result<(ResolvedVol, VolSource)> {
    let check = |v: f64, what: &str| {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain("audit", format!("{what} must be finite and nonnegative, got {v}")))
        }
    };
    Ok(match vol {
        VolInput::VoteVol(s) => (ResolvedVol::Vote(check(s, "vote volatility")?), VolSource::Supplied),
        VolInput::ShadowVol(sigma) => (
            ResolvedVol::Shadow(check(sigma, "shadow volatility")?),
            VolSource::Shadow,
        ),
        VolInput::EstimateFromShares => (ResolvedVol::Vote(estimate_vote_vol(series)?), VolSource::Estimated),
    })
}

fn fair_value(y: f64, vol: ResolvedVol, horizon: f64, threshold: f64) -> Result<f64> {
    if horizon == 0.0 {
        return Ok(price_binary(y, 0.0, 0.0, threshold)?.value());
    }
    Ok(match vol {
        ResolvedVol::Vote(s) => price_binary_from_s(y, s * horizon.sqrt(), horizon, threshold)?.value(),
        ResolvedVol::Shadow(sigma) => price_binary(y, sigma, horizon, threshold)?.value(),
    })
}

/// Fair value at every point, `None` where the vote-share estimate is missing.
pub fn fair_value_series(series: &ForecastSeries, vol: VolInput, threshold: f64) -> Result<Vec<Option<f64>>> {
    let (vol, _) = resolve_vol(series, vol)?;
    fair_values_resolved(series, vol, threshold)
}

fn fair_values_resolved(series: &ForecastSeries, vol: ResolvedVol, threshold: f64) -> Result<Vec<Option<f64>>> {
    series
        .points
        .iter()
        .map(|p| {
            p.vote_share_est
                .map(|y| fair_value(y, vol, series.horizon_at(p.date), threshold))
                .transpose()
        })
        .collect()
}

/// P/L of trading one unit against the published price whenever it differs
/// from the fair value: long when published is below fair, short when above,
/// closed at the next published price; the last position settles at the
/// outcome.
pub fn dutch_book_pnl_values(published: &[f64], fair: &[f64], outcome: bool) -> Result<f64> {
    if published.len() != fair.len() {
        return Err(Error::Alignment(format!(
            "dutch_book_pnl: {} published vs {} fair values",
            published.len(),
            fair.len()
        )));
    }
    let fair: Vec<Option<f64>> = fair.iter().copied().map(Some).collect();
    Ok(pnl_with_gaps(published, &fair, outcome))
}

/// Date-checked variant of [`dutch_book_pnl_values`].
pub fn dutch_book_pnl(
    published: &[(NaiveDate, f64)],
    fair: &[(NaiveDate, f64)],
    outcome: bool,
) -> Result<f64> {
    if published.len() != fair.len() {
        return Err(Error::Alignment(format!(
            "dutch_book_pnl: {} published vs {} fair points",
            published.len(),
            fair.len()
        )));
    }
    if let Some((a, b)) = published.iter().zip(fair).find(|(a, b)| a.0 != b.0) {
        return Err(Error::Alignment(format!(
            "dutch_book_pnl: published point dated {} paired with fair point dated {}",
            a.0, b.0
        )));
    }
    let p: Vec<f64> = published.iter().map(|x| x.1).collect();
    let f: Vec<f64> = fair.iter().map(|x| x.1).collect();
    dutch_book_pnl_values(&p, &f, outcome)
}

/// Points without a fair value carry no position.
fn pnl_with_gaps(published: &[f64], fair: &[Option<f64>], outcome: bool) -> f64 {
    let mut pnl = 0.0;
    for i in 0..published.len() {
        let Some(f) = fair[i] else { continue };
        let position = if published[i] < f {
            1.0
        } else if published[i] > f {
            -1.0
        } else {
            0.0
        };
        let exit = published.get(i + 1).copied().unwrap_or(indicator(outcome));
        pnl += position * (exit - published[i]);
    }
    pnl
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAudit {
    pub date: NaiveDate,
    pub published_prob: f64,
    pub vote_share_est: Option<f64>,
    pub horizon_years: f64,
    pub fair_value: Option<f64>,
    /// `published - fair`.
    pub divergence: Option<f64>,
    pub violation_flag: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub election_date: NaiveDate,
    pub outcome: Option<bool>,
    pub threshold: f64,
    pub tol: f64,
    pub tol_is_default: bool,
    pub vol_source: VolSource,
    /// Annualized vote-share volatility, when the fair values were driven by one.
    pub s_used: Option<f64>,
    pub sigma_used: Option<f64>,
    pub points: Vec<PointAudit>,
    pub n_flagged: usize,
    pub realized_forecast_vol: Option<f64>,
    pub max_admissible_vol: Option<f64>,
    pub vol_ratio: Option<f64>,
    pub vol_violation: bool,
    /// Realized forecast vol over realized vote-share vol. Descriptive only.
    pub increment_ratio: Option<f64>,
    /// Points whose published value sits on the wrong side of the vote share
    /// (below it when the share is above one half, above it when below).
    /// Descriptive only, reported for the one-half threshold.
    pub level_bound_breaches: Option<usize>,
    pub dutch_book_pnl: Option<f64>,
    pub brier: Option<f64>,
    pub l1: Option<f64>,
}

impl AuditReport {
    pub fn any_violation(&self) -> bool {
        self.n_flagged > 0 || self.vol_violation
    }
}

pub fn martingale_audit(series: &ForecastSeries, vol: VolInput, threshold: f64, tol: f64) -> Result<AuditReport> {
    if series.is_empty() {
        return Err(Error::Precondition("martingale_audit: series is empty".into()));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::domain("martingale_audit", format!("tol must be finite and nonnegative, got {tol}")));
    }
    let (resolved, vol_source) = resolve_vol(series, vol)?;
    let fair = fair_values_resolved(series, resolved, threshold)?;

    let points: Vec<PointAudit> = series
        .points
        .iter()
        .zip(&fair)
        .map(|(p, &f)| {
            let divergence = f.map(|f| p.published_prob - f);
            PointAudit {
                date: p.date,
                published_prob: p.published_prob,
                vote_share_est: p.vote_share_est,
                horizon_years: series.horizon_at(p.date),
                fair_value: f,
                divergence,
                violation_flag: divergence.is_some_and(|d| d.abs() > tol),
                note: f.is_none().then(|| "no vote share estimate; fair value skipped".to_string()),
            }
        })
        .collect();

    let dates = series.dates();
    let realized = realized_forecast_vol(series).ok();
    let admissible = realized_vol_sparse(&dates, &fair);
    let vol_ratio = match (realized, admissible) {
        (Some(r), Some(a)) if a > 0.0 => Some(r / a),
        (Some(r), Some(_)) if r == 0.0 => Some(1.0),
        (Some(_), Some(_)) => Some(f64::INFINITY),
        _ => None,
    };
    let shares: Vec<Option<f64>> = series.points.iter().map(|p| p.vote_share_est).collect();
    let increment_ratio = match (realized, realized_vol_sparse(&dates, &shares)) {
        (Some(r), Some(v)) if v > 0.0 => Some(r / v),
        _ => None,
    };
    let level_bound_breaches = (threshold == DEFAULT_THRESHOLD).then(|| {
        series
            .points
            .iter()
            .filter(|p| match p.vote_share_est {
                Some(y) if y > 0.5 => p.published_prob < y,
                Some(y) if y < 0.5 => p.published_prob > y,
                _ => false,
            })
            .count()
    });
    let published = series.published();

    Ok(AuditReport {
        election_date: series.election_date,
        outcome: series.outcome,
        threshold,
        tol,
        tol_is_default: tol == DEFAULT_TOL,
        vol_source,
        s_used: match resolved {
            ResolvedVol::Vote(s) => Some(s),
            ResolvedVol::Shadow(_) => None,
        },
        sigma_used: match resolved {
            ResolvedVol::Shadow(sigma) => Some(sigma),
            ResolvedVol::Vote(_) => None,
        },
        n_flagged: points.iter().filter(|p| p.violation_flag).count(),
        points,
        realized_forecast_vol: realized,
        max_admissible_vol: admissible,
        vol_ratio,
        vol_violation: vol_ratio.is_some_and(|r| r > 1.0 + tol),
        increment_ratio,
        level_bound_breaches,
        dutch_book_pnl: series.outcome.map(|o| pnl_with_gaps(&published, &fair, o)),
        brier: brier_score(series).ok(),
        l1: l1_score(series).ok(),
    })
}
