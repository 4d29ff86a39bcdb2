//! CSV tables of per-iteration results and per-method summaries.

use std::path::Path;

use anchored_core::pipeline::{aggregate, Method, MethodResult};
use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub iteration: u64,
    pub seed: u64,
    pub m: usize,
    pub p: usize,
    pub epsilon: f64,
    pub error_e: f64,
    pub time_seconds: f64,
    pub incidence_ok: bool,
    pub residual: f64,
}

impl ResultRow {
    pub fn success(r: &MethodResult, iteration: u64, seed: u64, m: usize, p: usize, epsilon: f64) -> Self {
        Self {
            method: r.method.id().into(),
            iteration,
            seed,
            m,
            p,
            epsilon,
            error_e: r.error_e,
            time_seconds: r.time_seconds,
            incidence_ok: r.incidence_ok,
            residual: r.residual,
        }
    }

    /// A failed solve: numeric columns are NaN.
    pub fn failure(method: Method, iteration: u64, seed: u64, m: usize, p: usize, epsilon: f64) -> Self {
        Self {
            method: method.id().into(),
            iteration,
            seed,
            m,
            p,
            epsilon,
            error_e: f64::NAN,
            time_seconds: f64::NAN,
            incidence_ok: false,
            residual: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub method: String,
    pub metric: String,
    pub median: f64,
    pub mean: f64,
    pub sigma: f64,
}

/// Two rows per method with results, `error_e` then `time`.
pub fn stats_rows<'a>(results: impl IntoIterator<Item = &'a MethodResult>) -> Vec<StatsRow> {
    aggregate(results)
        .into_iter()
        .flat_map(|s| {
            [("error_e", s.accuracy), ("time", s.time)].map(|(metric, v)| StatsRow {
                method: s.method.id().into(),
                metric: metric.into(),
                median: v.median,
                mean: v.mean,
                sigma: v.sigma,
            })
        })
        .collect()
}

pub const RESULT_COLUMNS: [&str; 10] = [
    "method",
    "iteration",
    "seed",
    "m",
    "p",
    "epsilon",
    "error_e",
    "time_seconds",
    "incidence_ok",
    "residual",
];

pub const STATS_COLUMNS: [&str; 5] = ["method", "metric", "median", "mean", "sigma"];

/// Writes `rows` under `header`, which must name the fields of `T` in
/// order. The header is written even when there are no rows.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
