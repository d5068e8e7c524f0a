//! Sweep data for the two models: distance sweeps of Ī, constant-P_error
//! isolines in the (t, T) plane, and the CSV/manifest outputs.
//!
//! Times handed to this module are in units of 1/γ₀; records carry both the
//! ω-unit time `t` and `gamma0_t`.

mod csv_io;
mod distance;
mod isoline;
mod manifest;

pub use csv_io::{read_csv, render_value, write_csv};
pub use distance::{distance_sweep, DistanceSweep};
pub use isoline::{isoline_search, isolines, p_error_grid};
pub use manifest::{sha256_file, FileRecord, RunManifest};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::EvolutionConfig;

/// One output row: named parameters, Ī and optionally P_error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub parameters: Vec<(String, f64)>,
    pub i_bar: f64,
    pub p_error: Option<f64>,
}

impl SweepRecord {
    pub fn new(parameters: Vec<(&str, f64)>, i_bar: f64, p_error: Option<f64>) -> Self {
        Self {
            parameters: parameters
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            i_bar,
            p_error,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|&(_, v)| v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.i_bar) {
            return Err(Error::InvariantViolation(format!(
                "Ī = {} outside [0, 1]",
                self.i_bar
            )));
        }
        if let Some(p) = self.p_error {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvariantViolation(format!(
                    "P_error = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Integrator settings plus the size of the worker pool (`None` means one
/// worker per core).
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    pub evolution: EvolutionConfig,
    pub workers: Option<usize>,
}

/// `n` points from `lo` to `hi`, equally spaced in log.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(Error::Config(format!(
            "log grid needs 0 < lo < hi and n >= 2, got [{lo}, {hi}] with {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// 200 points in [10⁻³, 50], units of 1/γ₀.
pub fn default_time_grid() -> Vec<f64> {
    log_grid(1e-3, 50.0, 200).expect("valid constants")
}

/// Twelve temperatures in [0.05, 5], units of ω.
pub fn default_temperatures() -> Vec<f64> {
    log_grid(0.05, 5.0, 12).expect("valid constants")
}

/// Search window for isolines, units of 1/γ₀.
pub const DEFAULT_T_BRACKET: (f64, f64) = (1e-4, 10.0);

pub(crate) fn check_grid(name: &str, values: &[f64], allow_zero: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    let bad = values
        .iter()
        .find(|v| !v.is_finite() || **v < 0.0 || (!allow_zero && **v == 0.0));
    if let Some(v) = bad {
        return Err(Error::Config(format!("{name} contains invalid value {v}")));
    }
    Ok(())
}

pub(crate) fn with_pool<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::Config("worker count must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}"))),
    }
}
