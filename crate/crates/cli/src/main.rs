//! `bmart`: price, simulate and audit binary election forecasts.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure.

mod series_csv;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bounded_martingale::audit::{martingale_audit, VolInput, DEFAULT_TOL};
use bounded_martingale::density::{density_grid, trapezoid_mass, TimeSliceParams};
use bounded_martingale::multicandidate::{win_probabilities, ShareVector, WinRule};
use bounded_martingale::pricing::{
    interior_grid, price_binary, price_binary_from_s, price_curve, s_from_sigma, sigma_from_s, DEFAULT_THRESHOLD,
};
use bounded_martingale::process::{sample_y_exact, simulate_y_paths, Scheme, DEFAULT_DT};
use bounded_martingale::SeedSpec;
use chrono::NaiveDate;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "bmart", version, about = "Arbitrage-free pricing and auditing of binary election forecasts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price the event "vote share ends at or above the threshold".
    #[command(group(ArgGroup::new("vol").required(true).args(["s", "sigma"])))]
    Price {
        #[arg(long)]
        y0: f64,
        /// Vote-share volatility accumulated over the horizon.
        #[arg(long)]
        s: Option<f64>,
        /// Shadow volatility.
        #[arg(long)]
        sigma: Option<f64>,
        /// Years to the election.
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Convert between vote-share and shadow volatility.
    #[command(group(ArgGroup::new("vol").required(true).args(["s", "sigma"])))]
    Vol {
        #[arg(long)]
        y0: f64,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        horizon: f64,
    },
    /// Price curves across vote shares, one per volatility, as CSV `y0,s,price`.
    Curve {
        /// Comma-separated vote-share volatilities.
        #[arg(long, value_delimiter = ',', required = true)]
        s_list: Vec<f64>,
        #[arg(long)]
        horizon: f64,
        /// Interior vote shares (i + 1)/(n + 1); odd counts include 0.5.
        #[arg(long, default_value_t = 99)]
        grid_points: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a published forecast series (CSV `date,published_prob,vote_share_est`).
    #[command(group(ArgGroup::new("vol").required(true).args(["s", "sigma", "estimate_s"])))]
    Audit {
        #[arg(long)]
        series: PathBuf,
        /// ISO date, e.g. 2024-11-05.
        #[arg(long)]
        election_date: NaiveDate,
        /// Annualized vote-share volatility.
        #[arg(long)]
        s: Option<f64>,
        /// Shadow volatility.
        #[arg(long)]
        sigma: Option<f64>,
        /// Estimate the vote-share volatility from the series' vote shares.
        #[arg(long)]
        estimate_s: bool,
        /// Realized outcome: 1/0, true/false, yes/no.
        #[arg(long, value_parser = parse_outcome)]
        outcome: Option<bool>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate terminal vote shares; prints a JSON summary.
    Simulate {
        #[arg(long)]
        y0: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Euler)]
        scheme: SchemeArg,
        /// CSV of terminal values `path,y`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the time-slice density of the vote share as CSV `y,phi`.
    Density {
        #[arg(long)]
        y0: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 2001)]
        grid_points: usize,
        /// Output file; stdout when absent (the summary then goes to stderr).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Win probabilities in a race with several candidates.
    Multi {
        /// Comma-separated initial shares summing to 1, in construction order.
        #[arg(long, value_delimiter = ',', required = true)]
        shares: Vec<f64>,
        /// Comma-separated candidate labels.
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<String>>,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Win by majority threshold instead of plurality.
        #[arg(long)]
        majority: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Euler,
    Exact,
}

fn parse_outcome(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "win" => Ok(true),
        "0" | "false" | "no" | "lose" | "loss" => Ok(false),
        _ => Err(format!("expected 1/0, true/false or yes/no, got {s:?}")),
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<bounded_martingale::Error> for CliError {
    fn from(e: bounded_martingale::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Opens the destination: a file when given, stdout otherwise.
fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match out {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?))),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn csv_writer(out: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink(out)?))
}

fn write_csv_rows<R: Serialize>(out: Option<&Path>, rows: impl IntoIterator<Item = R>) -> CliResult {
    let label = out.unwrap_or(Path::new("<stdout>"));
    let mut w = csv_writer(out)?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(label, e))?;
    }
    w.flush().map_err(|e| io_err(label, e))
}

fn write_json(out: Option<&Path>, value: &impl Serialize) -> CliResult {
    let label = out.unwrap_or(Path::new("<stdout>"));
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(label, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_err(label, e))
}

fn print_json(value: &impl Serialize) -> CliResult {
    write_json(None, value)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Price {
            y0,
            s,
            sigma,
            horizon,
            threshold,
        } => {
            let (price, sigma_used, s_used) = match (s, sigma) {
                (Some(s), _) => {
                    let price = price_binary_from_s(y0, s, horizon, threshold)?.value();
                    (price, Some(sigma_from_s(s, y0, horizon)?), Some(s))
                }
                (None, Some(sigma)) => {
                    let price = price_binary(y0, sigma, horizon, threshold)?.value();
                    let s = if horizon > 0.0 {
                        Some(s_from_sigma(sigma, y0, horizon)?)
                    } else {
                        None
                    };
                    (price, Some(sigma), s)
                }
                (None, None) => unreachable!("clap requires one of --s/--sigma"),
            };
            print_json(&json!({
                "price": price,
                "sigma_used": sigma_used,
                "s_used": s_used,
                "y0": y0,
                "horizon": horizon,
                "threshold": threshold,
            }))
        }
        Command::Vol { y0, s, sigma, horizon } => {
            let (s, sigma) = match (s, sigma) {
                (Some(s), _) => (s, sigma_from_s(s, y0, horizon)?),
                (None, Some(sigma)) => (s_from_sigma(sigma, y0, horizon)?, sigma),
                (None, None) => unreachable!("clap requires one of --s/--sigma"),
            };
            print_json(&json!({ "y0": y0, "horizon": horizon, "s": s, "sigma": sigma }))
        }
        Command::Curve {
            s_list,
            horizon,
            grid_points,
            threshold,
            out,
        } => {
            if grid_points < 2 {
                return Err(CliError::Input(format!("--grid-points must be at least 2, got {grid_points}")));
            }
            let grid = interior_grid::<f64>(grid_points);
            let mut rows = Vec::with_capacity(grid.len() * s_list.len());
            for &s in &s_list {
                rows.extend(price_curve(s, horizon, threshold, &grid)?);
            }
            write_csv_rows(out.as_deref(), rows)
        }
        Command::Audit {
            series,
            election_date,
            s,
            sigma,
            estimate_s,
            outcome,
            tol,
            threshold,
            out,
        } => {
            let parsed = series_csv::read_series(&series, election_date, outcome)?;
            let vol = match (s, sigma, estimate_s) {
                (Some(s), _, _) => VolInput::VoteVol(s),
                (None, Some(sigma), _) => VolInput::ShadowVol(sigma),
                _ => VolInput::EstimateFromShares,
            };
            let report = martingale_audit(&parsed, vol, threshold, tol)?;
            write_json(out.as_deref(), &report)
        }
        Command::Simulate {
            y0,
            sigma,
            horizon,
            dt,
            paths,
            seed,
            scheme,
            out,
        } => {
            let seed = SeedSpec::new(seed, 0);
            let ensemble = match scheme {
                SchemeArg::Euler => simulate_y_paths(y0, sigma, horizon, dt, paths, seed)?,
                SchemeArg::Exact => sample_y_exact(y0, sigma, horizon, paths, seed)?,
            };
            if let Some(path) = out.as_deref() {
                #[derive(Serialize)]
                struct Row {
                    path: usize,
                    y: f64,
                }
                write_csv_rows(
                    Some(path),
                    ensemble.terminal_values.iter().enumerate().map(|(path, &y)| Row { path, y }),
                )?;
            }
            let mean = ensemble.mean();
            let above = ensemble.prob_at_or_above(0.5);
            print_json(&json!({
                "y0": y0,
                "sigma": sigma,
                "horizon": horizon,
                "dt": ensemble.dt,
                "paths": ensemble.n_paths,
                "seed": ensemble.seed,
                "scheme": match ensemble.scheme { Scheme::EulerY => "euler", Scheme::ExactXMapped => "exact" },
                "mean": mean.mean,
                "mean_std_error": mean.std_error,
                "variance": ensemble.variance(),
                "prob_at_or_above_half": above.mean,
                "prob_std_error": above.std_error,
                "closed_form_price": price_binary(y0, sigma, horizon, 0.5)?.value(),
            }))
        }
        Command::Density {
            y0,
            sigma,
            horizon,
            grid_points,
            out,
        } => {
            let params = TimeSliceParams::new(y0, sigma, horizon)?;
            let table = density_grid(&params, grid_points)?;
            #[derive(Serialize)]
            struct Row {
                y: f64,
                phi: f64,
            }
            write_csv_rows(out.as_deref(), table.iter().map(|&(y, phi)| Row { y, phi }))?;
            let summary = json!({
                "grid_points": table.len(),
                "spread": params.spread(),
                "trapezoid_mass": trapezoid_mass(&table),
            });
            if out.is_some() {
                print_json(&summary)
            } else {
                eprintln!("{summary}");
                Ok(())
            }
        }
        Command::Multi {
            shares,
            ids,
            sigma,
            horizon,
            dt,
            paths,
            seed,
            majority,
        } => {
            let initial = match ids {
                Some(ids) => ShareVector::new(shares, ids)?,
                None => ShareVector::unlabelled(shares)?,
            };
            let rule = majority.map_or(WinRule::Plurality, WinRule::Majority);
            let w = win_probabilities(&initial, sigma, horizon, dt, paths, SeedSpec::new(seed, 0), rule)?;
            print_json(&json!({
                "ordering": w.candidate_ids,
                "initial_shares": initial.shares(),
                "rule": w.rule,
                "probabilities": w.probabilities.iter().map(|e| e.mean).collect::<Vec<_>>(),
                "std_errors": w.probabilities.iter().map(|e| e.std_error).collect::<Vec<_>>(),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) => eprintln!("error: {m}"),
                CliError::Io(m) => eprintln!("I/O error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
