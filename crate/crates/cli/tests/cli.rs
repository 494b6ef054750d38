use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use bounded_martingale::audit::{fair_value_series, ForecastPoint, ForecastSeries, VolInput};
use bounded_martingale::density::{density_grid, timeslice_density, TimeSliceParams};
use bounded_martingale::pricing::price_binary_from_s;
use chrono::{Duration, NaiveDate};
use serde_json::Value;

fn bmart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmart")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = bmart(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn read_table(path: &PathBuf) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn price_examples() {
    let v = ok_json(&["price", "--y0", "0.5", "--s", "0.1", "--horizon", "0.25"]);
    assert_eq!(v["price"].as_f64().unwrap(), 0.5);
    let v = ok_json(&["price", "--y0", "0.55", "--sigma", "1e-9", "--horizon", "0.25"]);
    assert!((v["price"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = ok_json(&["price", "--y0", "0.6", "--s", "0.08", "--horizon", "0.25"]);
    let lib = price_binary_from_s(0.6, 0.08, 0.25, 0.5).unwrap().value();
    assert_eq!(v["price"].as_f64().unwrap(), lib);
    assert_eq!(v["s_used"].as_f64().unwrap(), 0.08);
    assert!(v["sigma_used"].as_f64().unwrap() > 0.0);
}

#[test]
fn price_rejects_bad_flags() {
    let both = bmart(&["price", "--y0", "0.6", "--s", "0.1", "--sigma", "1", "--horizon", "0.25"]);
    assert_eq!(both.status.code(), Some(2));
    let neither = bmart(&["price", "--y0", "0.6", "--horizon", "0.25"]);
    assert_eq!(neither.status.code(), Some(2));
    let out = bmart(&["price", "--y0", "1.5", "--s", "0.1", "--horizon", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("y0"));
    let out = bmart(&["price", "--y0", "0.5", "--sigma", "-1", "--horizon", "0.25"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vol_conversion_round_trips() {
    let v = ok_json(&["vol", "--y0", "0.7", "--s", "0.05", "--horizon", "0.5"]);
    let sigma = v["sigma"].as_f64().unwrap().to_string();
    let back = ok_json(&["vol", "--y0", "0.7", "--sigma", &sigma, "--horizon", "0.5"]);
    assert!((back["s"].as_f64().unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn curve_csv_shape() {
    let path = tmp("curve.csv");
    let out = bmart(&[
        "curve", "--s-list", "0.01,0.05,0.1", "--horizon", "0.25", "--grid-points", "21", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_table(&path);
    assert_eq!(header, ["y0", "s", "price"]);
    assert_eq!(rows.len(), 63);
    for chunk in rows.chunks(21) {
        assert_eq!(chunk[10][0], 0.5);
        assert_eq!(chunk[10][2], 0.5);
        // cap/floor on every row; monotone through the centre
        for r in chunk {
            assert!(if r[0] < 0.5 { r[2] <= r[0] } else { r[2] >= r[0] }, "{r:?}");
        }
        let centre: Vec<_> = chunk.iter().filter(|r| r[0] >= 0.2 && r[0] <= 0.8).collect();
        assert!(centre.windows(2).all(|w| w[1][2] >= w[0][2]));
    }
    let bad = bmart(&["curve", "--s-list", "0.1", "--horizon", "0.25", "--grid-points", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let unwritable = bmart(&["curve", "--s-list", "0.1", "--horizon", "0.25", "--out", "/nonexistent/dir/c.csv"]);
    assert_eq!(unwritable.status.code(), Some(3));
}

fn day(n: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 6, 1).unwrap() + Duration::days(n)
}

fn write_series(name: &str, rows: &[(NaiveDate, f64, Option<f64>)]) -> PathBuf {
    let path = tmp(name);
    let mut text = String::from("date,published_prob,vote_share_est\n");
    for (d, p, y) in rows {
        let y = y.map(|y| y.to_string()).unwrap_or_default();
        text.push_str(&format!("{d},{p},{y}\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn audit_of_fair_series_has_no_flags() {
    let shares = [0.51, 0.53, 0.52, 0.55, 0.54, 0.56];
    let election = day(120);
    let points: Vec<ForecastPoint> = shares
        .iter()
        .enumerate()
        .map(|(i, &y)| ForecastPoint {
            date: day(7 * i as i64),
            published_prob: 0.0,
            vote_share_est: Some(y),
        })
        .collect();
    let series = ForecastSeries::new(points.clone(), election, None).unwrap();
    let fair = fair_value_series(&series, VolInput::VoteVol(0.1), 0.5).unwrap();
    let rows: Vec<_> = points.iter().zip(&fair).map(|(p, f)| (p.date, f.unwrap(), p.vote_share_est)).collect();
    let path = write_series("fair.csv", &rows);
    let v = ok_json(&[
        "audit", "--series", path.to_str().unwrap(), "--election-date", &election.to_string(), "--s", "0.1",
        "--outcome", "1",
    ]);
    assert_eq!(v["n_flagged"], 0);
    assert_eq!(v["vol_violation"], false);
    assert_eq!(v["dutch_book_pnl"].as_f64().unwrap(), 0.0);
    assert!(v["brier"].as_f64().is_some());
}

#[test]
fn audit_flags_the_big_revision() {
    let election = day(110);
    let path = write_series("jump.csv", &[(day(0), 0.48, Some(0.48)), (day(1), 0.15, Some(0.45))]);
    let v = ok_json(&["audit", "--series", path.to_str().unwrap(), "--election-date", &election.to_string(), "--s", "0.05"]);
    assert!(v["n_flagged"].as_u64().unwrap() >= 1);
    // no outcome: scores absent, the rest present
    assert!(v["brier"].is_null());
    assert!(v["l1"].is_null());
    assert!(v["dutch_book_pnl"].is_null());
    assert!(v["realized_forecast_vol"].as_f64().is_some());
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
}

#[test]
fn audit_reports_malformed_lines() {
    let path = tmp("bad.csv");
    fs::write(&path, "date,published_prob,vote_share_est\n2024-06-01,0.4,0.5\n2024-06-02,abc,0.5\n").unwrap();
    let out = bmart(&["audit", "--series", path.to_str().unwrap(), "--election-date", "2024-11-05", "--s", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&path, "when,p\n2024-06-01,0.4\n").unwrap();
    let out = bmart(&["audit", "--series", path.to_str().unwrap(), "--election-date", "2024-11-05", "--s", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    fs::write(&path, "date,published_prob,vote_share_est\n2024-06-02,0.4,\n2024-06-01,0.5,\n").unwrap();
    let out = bmart(&["audit", "--series", path.to_str().unwrap(), "--election-date", "2024-11-05", "--s", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = tmp("does-not-exist.csv");
    let out = bmart(&["audit", "--series", missing.to_str().unwrap(), "--election-date", "2024-11-05", "--s", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn audit_can_estimate_vol() {
    let path = write_series(
        "est.csv",
        &[(day(0), 0.5, Some(0.5)), (day(1), 0.55, Some(0.51)), (day(2), 0.52, None), (day(3), 0.5, Some(0.5))],
    );
    let v = ok_json(&["audit", "--series", path.to_str().unwrap(), "--election-date", "2024-11-05", "--estimate-s"]);
    assert_eq!(v["vol_source"], "estimated");
    assert!(v["s_used"].as_f64().unwrap() > 0.0);
    assert!(v["points"][2]["note"].is_string());
}

#[test]
fn simulate_is_reproducible_and_consistent() {
    let a = tmp("sim_a.csv");
    let b = tmp("sim_b.csv");
    let args = |p: &PathBuf| {
        vec![
            "simulate".to_string(), "--y0".into(), "0.6".into(), "--sigma".into(), "1".into(), "--horizon".into(),
            "0.0833".into(), "--dt".into(), "1e-3".into(), "--paths".into(), "20000".into(), "--seed".into(),
            "9".into(), "--out".into(), p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &PathBuf| {
        let args = args(p);
        ok_json(&args.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let sa = run(&a);
    let sb = run(&b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(sa, sb);
    let mean = sa["mean"].as_f64().unwrap();
    let se = sa["mean_std_error"].as_f64().unwrap();
    assert!((mean - 0.6).abs() < 4.0 * se);
    let price = ok_json(&["price", "--y0", "0.6", "--sigma", "1", "--horizon", "0.0833"])["price"].as_f64().unwrap();
    let p = sa["prob_at_or_above_half"].as_f64().unwrap();
    let pse = sa["prob_std_error"].as_f64().unwrap();
    assert!((p - price).abs() < 4.0 * pse, "{p} vs {price}");
    let (header, rows) = read_table(&a);
    assert_eq!(header, ["path", "y"]);
    assert_eq!(rows.len(), 20_000);
}

#[test]
fn density_csv_properties() {
    let path = tmp("density.csv");
    let summary = ok_json(&[
        "density", "--y0", "0.5", "--sigma", "1.2", "--horizon", "0.15", "--grid-points", "2001", "--out",
        path.to_str().unwrap(),
    ]);
    let (header, rows) = read_table(&path);
    assert_eq!(header, ["y", "phi"]);
    let n = rows.len();
    for i in 0..n {
        assert!((rows[i][0] + rows[n - 1 - i][0] - 1.0).abs() < 1e-15);
        assert!((rows[i][1] - rows[n - 1 - i][1]).abs() <= 1e-12 * rows[i][1].max(1.0));
    }
    let mass: f64 = rows.windows(2).map(|w| 0.5 * (w[0][1] + w[1][1]) * (w[1][0] - w[0][0])).sum();
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
    assert_eq!(summary["trapezoid_mass"].as_f64().unwrap(), mass);

    // bit-for-bit with the library
    let params = TimeSliceParams::new(0.5, 1.2, 0.15).unwrap();
    let lib = density_grid(&params, 2001).unwrap();
    for (row, (y, phi)) in rows.iter().zip(lib) {
        assert_eq!((row[0], row[1]), (y, phi));
    }
}

#[test]
fn density_mode_matches_dense_search() {
    let path = tmp("density_mode.csv");
    let (y0, sigma, tau) = (0.7, 0.6, 0.5);
    let out = bmart(&[
        "density", "--y0", "0.7", "--sigma", "0.6", "--horizon", "0.5", "--grid-points", "801", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = read_table(&path);
    let k = (0..rows.len()).max_by(|&a, &b| rows[a][1].partial_cmp(&rows[b][1]).unwrap()).unwrap();
    let params = TimeSliceParams::new(y0, sigma, tau).unwrap();
    let oracle = (1..1_000_000)
        .map(|i| i as f64 / 1e6)
        .max_by(|a, b| timeslice_density(*a, &params).partial_cmp(&timeslice_density(*b, &params)).unwrap())
        .unwrap();
    let spacing = (rows[k + 1][0] - rows[k - 1][0]) / 2.0;
    assert!((rows[k][0] - oracle).abs() <= spacing + 1e-6, "{} vs {oracle}", rows[k][0]);
}

#[test]
fn multi_candidate_probabilities() {
    let v = ok_json(&[
        "multi", "--shares", "0.45,0.35,0.2", "--ids", "a,b,c", "--sigma", "1", "--horizon", "0.1", "--dt", "1e-3",
        "--paths", "5000", "--seed", "3",
    ]);
    assert_eq!(v["ordering"], serde_json::json!(["a", "b", "c"]));
    let total: f64 = v["probabilities"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let bad = bmart(&["multi", "--shares", "0.5,0.4", "--sigma", "1", "--horizon", "0.1"]);
    assert_eq!(bad.status.code(), Some(2));
}
