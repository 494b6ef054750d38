//! Reader for forecast series files.
//!
//! ```text
//! date,published_prob,vote_share_est
//! 2024-07-01,0.48,0.48
//! 2024-07-02,0.47,
//! ```

use std::fs::File;
use std::path::Path;

use bounded_martingale::audit::{ForecastPoint, ForecastSeries};
use chrono::NaiveDate;

use crate::CliError;

const HEADER: [&str; 3] = ["date", "published_prob", "vote_share_est"];

fn malformed(path: &Path, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: line {line}: {msg}", path.display()))
}

pub fn read_series(path: &Path, election_date: NaiveDate, outcome: Option<bool>) -> Result<ForecastSeries, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let mut points = Vec::new();
    let mut lines = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(i as u64 + 1, |p| p.line());
            match e.kind() {
                csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
                _ => malformed(path, line, e),
            }
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 {
            let got: Vec<&str> = record.iter().collect();
            if got != HEADER {
                return Err(malformed(
                    path,
                    line,
                    format!("expected header {:?}, got {:?}", HEADER.join(","), got.join(",")),
                ));
            }
            continue;
        }
        if record.len() != 3 {
            return Err(malformed(path, line, format!("expected 3 fields, got {}", record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| malformed(path, line, format!("bad date {:?}: {e}", &record[0])))?;
        let published_prob: f64 = record[1]
            .parse()
            .map_err(|_| malformed(path, line, format!("bad published_prob {:?}", &record[1])))?;
        let vote_share_est = match &record[2] {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| malformed(path, line, format!("bad vote_share_est {s:?}")))?,
            ),
        };
        points.push(ForecastPoint {
            date,
            published_prob,
            vote_share_est,
        });
        lines.push(line);
    }
    if points.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    // Report validation failures against the offending line.
    for i in 0..points.len() {
        let from = i.saturating_sub(1);
        if let Err(e) = ForecastSeries::new(points[from..=i].to_vec(), election_date, None) {
            return Err(malformed(path, lines[i], e));
        }
    }
    ForecastSeries::new(points, election_date, outcome).map_err(CliError::from)
}
