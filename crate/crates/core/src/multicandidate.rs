//! Several candidates through nested residual shares.
//!
//! Candidate 1 follows the driftless vote-share diffusion on `[0, 1]`. Each
//! later candidate `i < n` follows an independent copy of the same diffusion
//! on the fraction of the vote left over by candidates `1..i`, and candidate
//! `n` takes whatever remains. The construction depends on the order of the
//! candidates; the order used is carried in every result.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::SeedSpec;
use crate::process::{simulate_y_paths, Estimate};

pub const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareVector {
    shares: Vec<f64>,
    candidate_ids: Vec<String>,
}

impl ShareVector {
    pub fn new(shares: Vec<f64>, candidate_ids: Vec<String>) -> Result<Self> {
        if shares.len() != candidate_ids.len() {
            return Err(Error::domain(
                "ShareVector",
                format!("{} shares but {} candidate ids", shares.len(), candidate_ids.len()),
            ));
        }
        if let Some(s) = shares.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::domain("ShareVector", format!("share {s} outside [0, 1]")));
        }
        let total: f64 = shares.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::domain("ShareVector", format!("shares sum to {total}, not 1")));
        }
        Ok(Self { shares, candidate_ids })
    }

    /// Labels candidates `c1, c2, ...`.
    pub fn unlabelled(shares: Vec<f64>) -> Result<Self> {
        let ids = (1..=shares.len()).map(|i| format!("c{i}")).collect();
        Self::new(shares, ids)
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn candidate_ids(&self) -> &[String] {
        &self.candidate_ids
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

/// Terminal shares, one row per path, columns in `candidate_ids` order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareEnsemble {
    pub candidate_ids: Vec<String>,
    pub terminal: Vec<Vec<f64>>,
    pub seed: SeedSpec,
}

impl ShareEnsemble {
    pub fn column(&self, candidate: usize) -> impl Iterator<Item = f64> + '_ {
        self.terminal.iter().map(move |row| row[candidate])
    }
}

/// Fraction of the remaining vote held by each of the first `n - 1` candidates.
fn conditional_fractions(shares: &[f64]) -> Vec<f64> {
    let mut remaining = 1.0;
    let mut out = Vec::with_capacity(shares.len() - 1);
    for &s in &shares[..shares.len() - 1] {
        out.push(if remaining > 0.0 { (s / remaining).min(1.0) } else { 0.0 });
        remaining -= s;
    }
    out
}

pub fn simulate_shares(
    initial: &ShareVector,
    sigma: f64,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: SeedSpec,
) -> Result<ShareEnsemble> {
    let n = initial.len();
    if n < 2 {
        return Err(Error::domain("simulate_shares", "need at least two candidates"));
    }
    // Candidate 1 uses the stream family of a single-share run with the same
    // seed; candidate k draws from family k.
    let fractions = conditional_fractions(&initial.shares);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for (k, &u0) in fractions.iter().enumerate() {
        let stream = if k == 0 { seed } else { seed.derive_family(k as u64 + 1) };
        if u0 > 0.0 && u0 < 1.0 {
            columns.push(simulate_y_paths(u0, sigma, horizon, dt, n_paths, stream)?.terminal_values);
        } else {
            // Absorbed at 0 or 1. The one-path run only validates the arguments.
            simulate_y_paths(0.5, sigma, horizon, dt, 1, stream)?;
            columns.push(vec![u0; n_paths]);
        }
    }
    let terminal = (0..n_paths)
        .map(|p| {
            let mut row = Vec::with_capacity(n);
            let mut remaining = 1.0;
            for col in &columns {
                let share = if row.is_empty() { col[p] } else { remaining * col[p] };
                row.push(share);
                remaining -= share;
            }
            row.push(remaining.max(0.0));
            row
        })
        .collect();
    Ok(ShareEnsemble {
        candidate_ids: initial.candidate_ids.clone(),
        terminal,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "threshold", rename_all = "snake_case")]
pub enum WinRule {
    /// Largest share wins; ties split the win equally.
    Plurality,
    /// Candidate wins when its share is at least the threshold.
    Majority(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinProbabilities {
    pub candidate_ids: Vec<String>,
    pub rule: WinRule,
    pub probabilities: Vec<Estimate>,
}

pub fn win_probabilities_of(ensemble: &ShareEnsemble, rule: WinRule) -> WinProbabilities {
    let n = ensemble.candidate_ids.len();
    let payoff = |row: &[f64], i: usize| -> f64 {
        match rule {
            WinRule::Majority(l) => {
                if row[i] >= l {
                    1.0
                } else {
                    0.0
                }
            }
            WinRule::Plurality => {
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if row[i] < best {
                    0.0
                } else {
                    1.0 / row.iter().filter(|&&s| s == best).count() as f64
                }
            }
        }
    };
    WinProbabilities {
        candidate_ids: ensemble.candidate_ids.clone(),
        rule,
        probabilities: (0..n)
            .map(|i| Estimate::from_samples(ensemble.terminal.iter().map(|row| payoff(row, i))))
            .collect(),
    }
}

pub fn win_probabilities(
    initial: &ShareVector,
    sigma: f64,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: SeedSpec,
    rule: WinRule,
) -> Result<WinProbabilities> {
    if let WinRule::Majority(l) = rule {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::domain("win_probabilities", format!("threshold {l} outside [0, 1]")));
        }
    }
    let ensemble = simulate_shares(initial, sigma, horizon, dt, n_paths, seed)?;
    Ok(win_probabilities_of(&ensemble, rule))
}
