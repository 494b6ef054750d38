//! Monte Carlo properties of the audit layer on simulated elections.

use bounded_martingale::audit::{
    brier, dutch_book_pnl_values, fair_value_series, martingale_audit, realized_forecast_vol, ForecastPoint,
    ForecastSeries, VolInput, DAYS_PER_YEAR,
};
use bounded_martingale::numerics::GaussianStream;
use bounded_martingale::pricing::price_binary;
use bounded_martingale::process::{exact_y_path, sample_y_exact, Estimate};
use bounded_martingale::SeedSpec;
use chrono::{Duration, NaiveDate};

fn day(n: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2030, 1, 1).unwrap() + Duration::days(n)
}

struct Election {
    shares: Vec<f64>,
    fair: Vec<f64>,
    outcome: bool,
}

/// Daily vote shares over `days` observations ending `days` before the
/// election, fair values under shadow vol `sigma`, and the realized outcome.
fn simulate_election(y0: f64, sigma: f64, days: usize, seed: SeedSpec) -> Election {
    let times: Vec<f64> = (1..=days).map(|d| d as f64 / DAYS_PER_YEAR).collect();
    let mut path = vec![y0];
    path.extend(exact_y_path(y0, sigma, &times, seed).unwrap());
    let final_share = path.pop().unwrap();
    let fair = path
        .iter()
        .enumerate()
        .map(|(d, &y)| price_binary(y, sigma, (days - d) as f64 / DAYS_PER_YEAR, 0.5).unwrap().value())
        .collect();
    Election {
        shares: path,
        fair,
        outcome: final_share >= 0.5,
    }
}

fn series_from(published: &[f64], shares: &[f64], election_day: i64, outcome: Option<bool>) -> ForecastSeries {
    let points = published
        .iter()
        .zip(shares)
        .enumerate()
        .map(|(i, (&p, &y))| ForecastPoint {
            date: day(i as i64),
            published_prob: p,
            vote_share_est: Some(y),
        })
        .collect();
    ForecastSeries::new(points, day(election_day), outcome).unwrap()
}

#[test]
fn brier_minimizer_recovers_bernoulli_rate() {
    let mut g = GaussianStream::new(SeedSpec::new(11, 0));
    let outcomes: Vec<bool> = (0..10_000).map(|_| g.next_uniform() < 0.3).collect();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let best = grid
        .iter()
        .map(|&b| (b, brier(&vec![b; outcomes.len()], &outcomes).unwrap()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap()
        .0;
    assert!((best - 0.3).abs() <= 0.02, "minimizer {best}");
}

#[test]
fn fair_values_form_a_martingale() {
    let (y0, sigma) = (0.56, 1.3);
    let (election, mid) = (182, 91);
    let n = 10_000;
    let mids = sample_y_exact(y0, sigma, mid as f64 / DAYS_PER_YEAR, n, SeedSpec::new(5, 0)).unwrap();
    let mut start = None;
    let samples = mids.terminal_values.iter().map(|&y| {
        let points = vec![
            ForecastPoint {
                date: day(0),
                published_prob: 0.5,
                vote_share_est: Some(y0),
            },
            ForecastPoint {
                date: day(mid),
                published_prob: 0.5,
                vote_share_est: Some(y),
            },
        ];
        let s = ForecastSeries::new(points, day(election), None).unwrap();
        let f = fair_value_series(&s, VolInput::ShadowVol(sigma), 0.5).unwrap();
        start = f[0];
        f[1].unwrap()
    });
    let est = Estimate::from_samples(samples.collect::<Vec<_>>());
    let b0 = start.unwrap();
    assert!(est.z_score(b0) < 4.0, "{est:?} vs {b0}");
}

#[test]
fn consistent_forecaster_is_rarely_flagged() {
    let (sigma, days, elections) = (0.8, 60, 1_000);
    let mut flagged = 0;
    for e in 0..elections {
        let el = simulate_election(0.52, sigma, days, SeedSpec::new(21, e));
        // published numbers carry four decimals
        let published: Vec<f64> = el.fair.iter().map(|f| (f * 1e4).round() / 1e4).collect();
        let s = series_from(&published, &el.shares, days as i64, Some(el.outcome));
        let r = martingale_audit(&s, VolInput::ShadowVol(sigma), 0.5, 0.01).unwrap();
        if r.any_violation() {
            flagged += 1;
        }
    }
    let specificity = 1.0 - flagged as f64 / elections as f64;
    assert!(specificity >= 0.99, "specificity {specificity}");
}

#[test]
fn dutch_book_profits_grow_with_bias() {
    let (sigma, days, elections) = (0.8, 20, 10_000);
    let deltas = [0.0, 0.02, 0.05, 0.1];
    let mut pnl: Vec<Vec<f64>> = vec![Vec::with_capacity(elections); deltas.len()];
    for e in 0..elections as u64 {
        let el = simulate_election(0.55, sigma, days, SeedSpec::new(31, e));
        let mut noise = GaussianStream::new(SeedSpec::new(32, e));
        let signs: Vec<f64> = (0..days).map(|_| if noise.next_uniform() < 0.5 { -1.0 } else { 1.0 }).collect();
        for (k, &d) in deltas.iter().enumerate() {
            let published: Vec<f64> = el.fair.iter().zip(&signs).map(|(f, s)| (f + d * s).clamp(0.0, 1.0)).collect();
            pnl[k].push(dutch_book_pnl_values(&published, &el.fair, el.outcome).unwrap());
        }
    }
    assert!(pnl[0].iter().all(|&p| p == 0.0));
    let est: Vec<Estimate> = pnl.iter().map(|v| Estimate::from_samples(v.iter().copied())).collect();
    for k in 1..deltas.len() {
        assert!(est[k].mean > 4.0 * est[k].std_error, "delta {}: {:?}", deltas[k], est[k]);
        let diff = Estimate::from_samples(pnl[k].iter().zip(&pnl[k - 1]).map(|(a, b)| a - b));
        assert!(diff.mean > 4.0 * diff.std_error, "delta {} vs {}: {diff:?}", deltas[k], deltas[k - 1]);
    }
}

#[test]
fn realized_vol_tracks_fine_grid_vol_of_fair_value() {
    let (sigma, points, substeps, election) = (0.6, 250usize, 10usize, 400usize);
    let dt = 1.0 / (DAYS_PER_YEAR * substeps as f64);
    for path in 0..10u64 {
        let times: Vec<f64> = (1..points * substeps).map(|k| k as f64 * dt).collect();
        let mut ys = vec![0.5 + 0.01 * path as f64];
        ys.extend(exact_y_path(ys[0], sigma, &times, SeedSpec::new(41, path)).unwrap());
        let fine: Vec<f64> = ys
            .iter()
            .enumerate()
            .map(|(k, &y)| {
                let tau = election as f64 / DAYS_PER_YEAR - k as f64 * dt;
                price_binary(y, sigma, tau, 0.5).unwrap().value()
            })
            .collect();
        let oracle = (fine.windows(2).map(|w| (w[1] - w[0]).powi(2) / dt).sum::<f64>() / (fine.len() - 1) as f64).sqrt();
        let daily: Vec<f64> = fine.iter().step_by(substeps).copied().collect();
        let shares: Vec<f64> = ys.iter().step_by(substeps).copied().collect();
        let s = series_from(&daily, &shares, election as i64, None);
        let v = realized_forecast_vol(&s).unwrap();
        assert!((v / oracle - 1.0).abs() < 0.25, "path {path}: {v} vs {oracle}");
    }
}
