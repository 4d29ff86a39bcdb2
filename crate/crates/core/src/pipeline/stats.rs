//! The error measure and per-method summaries.

use alloc::vec::Vec;

use nalgebra::Vector3;

use super::methods::{Method, MethodResult};

/// Floor of the error measure, reached by exact reconstructions.
pub const ERROR_FLOOR: f64 = -16.0;

/// `log10(sum ||Y_i - X_i|| / (p epsilon))`: how much the data error is
/// amplified. With `epsilon = 0` the mean distance itself is logged.
pub fn error_metric(reconstructed: &[Vector3<f64>], truth: &[Vector3<f64>], epsilon: f64) -> f64 {
    let p = truth.len().max(1) as f64;
    let total: f64 = reconstructed.iter().zip(truth).map(|(y, x)| (y - x).norm()).sum();
    let ratio = if epsilon > 0.0 { total / (p * epsilon) } else { total / p };
    if ratio.is_nan() {
        return f64::NAN;
    }
    if ratio <= 0.0 {
        return ERROR_FLOOR;
    }
    libm::log10(ratio).max(ERROR_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    /// Lower middle element for even counts.
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation, zero for a single value.
    pub sigma: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Self {
            median: sorted[(n - 1) / 2],
            mean,
            sigma: libm::sqrt(var),
            count: n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    pub method: Method,
    pub accuracy: Summary,
    pub time: Summary,
}

/// Per-method summaries of the error measure and wall time, in the order of
/// [`Method::ALL`]. Methods without results are left out.
pub fn aggregate<'a>(results: impl IntoIterator<Item = &'a MethodResult>) -> Vec<MethodStats> {
    let mut errors: Vec<Vec<f64>> = Method::ALL.iter().map(|_| Vec::new()).collect();
    let mut times = errors.clone();
    for r in results {
        errors[r.method.index()].push(r.error_e);
        times[r.method.index()].push(r.time_seconds);
    }
    Method::ALL
        .iter()
        .zip(errors.iter().zip(&times))
        .filter_map(|(&method, (e, t))| {
            Some(MethodStats {
                method,
                accuracy: Summary::of(e)?,
                time: Summary::of(t)?,
            })
        })
        .collect()
}
