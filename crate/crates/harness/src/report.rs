//! Persistence: JSON-lines records, CSV summaries and plot-data files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::Method;
use crate::error::{HarnessError, Result};
use crate::experiments::{ConcentrationRow, VariantResult};
use crate::trial::TrialRecord;

pub const TRIALS_FILE: &str = "trials.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

const SUMMARY_HEADER: [&str; 10] =
    ["method", "sweep_axis", "sweep_value", "metric", "n", "failures", "mean", "median", "ci_low", "ci_high"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Half-width of the two-sided 95% Student-t interval; NaN below n = 2.
    pub ci_half: f64,
}

pub fn stats(values: &[f64]) -> Stats {
    let n = values.len();
    if n == 0 {
        return Stats { n, mean: f64::NAN, median: f64::NAN, ci_half: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let ci_half = if n < 2 {
        f64::NAN
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive dof").inverse_cdf(0.975);
        t * (var / n as f64).sqrt()
    };
    Stats { n, mean, median, ci_half }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        let line = serde_json::to_string(item).expect("records serialize");
        writeln!(w, "{line}").map_err(|e| HarnessError::io(path, e))?;
    }
    finish(w, path)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| HarnessError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Records of one method at one sweep point.
#[derive(Debug, Default)]
struct Group<'a> {
    axis: Option<String>,
    value: Option<f64>,
    records: Vec<&'a TrialRecord>,
}

type GroupKey = (usize, usize);

fn group(records: &[TrialRecord]) -> BTreeMap<GroupKey, Group<'_>> {
    let mut groups: BTreeMap<GroupKey, Group> = BTreeMap::new();
    for r in records {
        let key = (r.sweep_index, Method::ALL.iter().position(|&m| m == r.method).unwrap());
        let g = groups.entry(key).or_default();
        g.axis = r.sweep_axis.clone();
        g.value = r.sweep_value;
        g.records.push(r);
    }
    groups
}

type MetricFn = fn(&TrialRecord) -> Option<f64>;

const METRICS: [(&str, MetricFn); 7] = [
    ("evm", |r| r.metrics.as_ref().map(|m| m.evm)),
    ("ser", |r| r.metrics.as_ref().map(|m| m.ser)),
    ("ber", |r| r.metrics.as_ref().map(|m| m.ber)),
    ("rate_blind", |r| r.metrics.as_ref().map(|m| m.rate_blind)),
    ("rate_training", |r| r.metrics.as_ref().and_then(|m| m.rate_training)),
    ("normalized_objective", |r| r.metrics.as_ref().map(|m| m.normalized_objective)),
    ("iters", |r| r.metrics.as_ref().map(|m| m.iters as f64)),
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_summary(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let to_err = |e: csv::Error| HarnessError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(to_err)?;
    w.write_record(SUMMARY_HEADER).map_err(to_err)?;
    for g in group(records).values() {
        let method = g.records[0].method;
        let failures = g.records.iter().filter(|r| r.metrics.is_none()).count();
        for (name, f) in METRICS {
            let values: Vec<f64> = g.records.iter().filter_map(|r| f(r)).collect();
            if values.is_empty() && name == "rate_training" {
                continue;
            }
            let s = stats(&values);
            w.write_record([
                method.name().to_string(),
                g.axis.clone().unwrap_or_default(),
                fmt_opt(g.value),
                name.to_string(),
                s.n.to_string(),
                failures.to_string(),
                fmt_num(s.mean),
                fmt_num(s.median),
                fmt_num(s.mean - s.ci_half),
                fmt_num(s.mean + s.ci_half),
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes a space-delimited numeric table with `#` comment lines first.
pub fn write_dat(path: &Path, comments: &[String], columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    for c in comments {
        writeln!(w, "# {c}").map_err(io)?;
    }
    writeln!(w, "# {}", columns.join(" ")).map_err(io)?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    finish(w, path)
}

/// Per-method curves `x y y_err` of mean EVM, SER and rate against the sweep
/// value (0 without a sweep), `y_err` being the 95% half-width.
pub fn write_metric_plots(dir: &Path, records: &[TrialRecord]) -> Result<Vec<PathBuf>> {
    let groups = group(records);
    let mut written = Vec::new();
    for method in Method::ALL {
        let mine: Vec<&Group> = groups.values().filter(|g| g.records[0].method == method).collect();
        if mine.is_empty() {
            continue;
        }
        let axis = mine[0].axis.clone().unwrap_or_else(|| "none".into());
        let rate_metric = if method == Method::Pilot { "rate_training" } else { "rate_blind" };
        for (plot, metric) in [("evm", "evm"), ("ser", "ser"), ("rate", rate_metric)] {
            let f = METRICS.iter().find(|(n, _)| *n == metric).unwrap().1;
            let rows: Vec<Vec<f64>> = mine
                .iter()
                .map(|g| {
                    let s = stats(&g.records.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
                    vec![g.value.unwrap_or(0.0), s.mean, s.ci_half]
                })
                .collect();
            let path = dir.join(format!("plot_{plot}_{}.dat", method.name()));
            let comments = vec![format!("method {} metric {metric}", method.name()), format!("x = {axis}")];
            write_dat(&path, &comments, &["x", "mean", "ci95_half"], &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `trials.jsonl`, `summary.csv` and the metric plots in `dir`.
pub fn emit_report(dir: &Path, records: &[TrialRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let trials = dir.join(TRIALS_FILE);
    write_jsonl(&trials, records)?;
    let mut written = summarize(dir, records)?;
    written.insert(0, trials);
    Ok(written)
}

/// `summary.csv` and plots only, for records already on disk.
pub fn summarize(dir: &Path, records: &[TrialRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let summary = dir.join(SUMMARY_FILE);
    write_summary(&summary, records)?;
    let mut written = vec![summary];
    written.extend(write_metric_plots(dir, records)?);
    Ok(written)
}

pub fn write_concentration(dir: &Path, rows: &[ConcentrationRow]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    let table = dir.join("concentration.jsonl");
    write_jsonl(&table, rows)?;
    written.push(table);
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k_users).collect();
    ks.dedup();
    for k in ks {
        let mine: Vec<&ConcentrationRow> = rows.iter().filter(|r| r.k_users == k).collect();
        let data: Vec<Vec<f64>> = mine
            .iter()
            .map(|r| {
                let p = r.frequency;
                vec![r.t_len as f64, p, (p * (1.0 - p) / r.trials as f64).sqrt(), r.theory]
            })
            .collect();
        let path = dir.join(format!("plot_concentration_k{k}.dat"));
        let comments = vec![
            format!("K = {k}, C = {}, bound applies from T = {:.1}", mine[0].c, mine[0].onset),
            "exceedance frequency with binomial standard error, and tail bound".to_string(),
        ];
        write_dat(&path, &comments, &["t_len", "frequency", "std_err", "bound"], &data)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_convergence(dir: &Path, results: &[VariantResult]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    let table = dir.join("convergence.jsonl");
    write_jsonl(&table, results)?;
    written.push(table);
    for r in results {
        let rows: Vec<Vec<f64>> =
            r.mean_trace.iter().zip(&r.median_trace).enumerate().map(|(j, (m, d))| vec![j as f64, *m, *d]).collect();
        let path = dir.join(format!("plot_convergence_{}.dat", r.variant.label));
        let v = &r.variant;
        let comments = vec![
            format!("K = {}, M = {}, T = {}, theta = {}, sigma2 = {}", v.k_users, v.m, v.t_len, v.theta, v.sigma2),
            format!("objective / expected planted value {}; median crossing {}", r.upper_bound, r.median_crossing),
        ];
        write_dat(&path, &comments, &["iteration", "mean", "median"], &rows)?;
        written.push(path);
    }
    Ok(written)
}
