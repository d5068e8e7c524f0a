//! Numeric tolerances shared by every module.
//!
//! One record holds every threshold. The process-wide record is installed
//! once (the CLI does this from `DYNCORR_TOLERANCE_PROFILE` or a JSON file)
//! and falls back to [`Tolerances::default`] otherwise.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROFILE_ENV: &str = "DYNCORR_TOLERANCE_PROFILE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
/// Fields missing from a JSON record take their default values.
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max entrywise |M - M†| for Hermitian inputs and density matrices.
    pub hermitian: f64,
    /// Allowed |Tr ρ - 1| for density matrices.
    pub trace: f64,
    /// Magnitude of the most negative eigenvalue still accepted as PSD.
    pub negative_eigenvalue: f64,
    /// Jacobi stops once the off-diagonal Frobenius norm falls below this
    /// (relative to max(1, ‖M‖_F)).
    pub jacobi_off_diagonal: f64,
    pub jacobi_max_sweeps: usize,
    /// Max entrywise |U U† - 1|.
    pub unitary: f64,
    /// Max entrywise |Σ K†K - 1|.
    pub kraus_completeness: f64,
    /// Distance of Tr ρ² from 1 under which a state counts as pure.
    pub purity: f64,
    /// Roundoff band outside [0, 1] that is clamped rather than rejected.
    pub i_bar_clamp: f64,
    /// Mutual-information threshold (nats) for `is_uncorrelated`.
    pub uncorrelated: f64,
    /// Max entrywise unitarity defect of the reshuffled matrix.
    pub maximal_correlation: f64,
    /// Allowed |Tr ρ(t) - 1| before renormalisation during evolution.
    pub evolution_trace_drift: f64,
    /// Magnitude of the most negative eigenvalue accepted along a trajectory.
    pub evolution_negative_eigenvalue: f64,
    /// Target accuracy of the isoline bisection in P_error.
    pub isoline: f64,
    pub bisection_max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-9,
            negative_eigenvalue: 1e-10,
            jacobi_off_diagonal: 1e-12,
            jacobi_max_sweeps: 100,
            unitary: 1e-10,
            kraus_completeness: 1e-9,
            purity: 1e-9,
            i_bar_clamp: 1e-6,
            uncorrelated: 1e-8,
            maximal_correlation: 1e-8,
            evolution_trace_drift: 1e-8,
            evolution_negative_eigenvalue: 1e-8,
            isoline: 1e-6,
            bisection_max_iterations: 100,
        }
    }
}

impl Tolerances {
    /// Tighter validation thresholds; solver settings are unchanged.
    pub fn strict() -> Self {
        let d = Self::default();
        Self {
            hermitian: d.hermitian / 10.0,
            trace: d.trace / 10.0,
            unitary: d.unitary / 10.0,
            kraus_completeness: d.kraus_completeness / 10.0,
            uncorrelated: d.uncorrelated / 10.0,
            maximal_correlation: d.maximal_correlation / 10.0,
            ..d
        }
    }

    pub fn from_profile(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "strict" => Ok(Self::strict()),
            other => Err(Error::Config(format!(
                "unknown tolerance profile {other:?} (expected \"default\" or \"strict\")"
            ))),
        }
    }

    /// Reads the profile named by `DYNCORR_TOLERANCE_PROFILE`, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PROFILE_ENV) {
            Ok(name) => Self::from_profile(name.trim()),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Parses a (possibly partial) JSON record and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let tol: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("bad tolerance record: {e}")))?;
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("hermitian", self.hermitian),
            ("trace", self.trace),
            ("negative_eigenvalue", self.negative_eigenvalue),
            ("jacobi_off_diagonal", self.jacobi_off_diagonal),
            ("unitary", self.unitary),
            ("kraus_completeness", self.kraus_completeness),
            ("purity", self.purity),
            ("i_bar_clamp", self.i_bar_clamp),
            ("uncorrelated", self.uncorrelated),
            ("maximal_correlation", self.maximal_correlation),
            ("evolution_trace_drift", self.evolution_trace_drift),
            (
                "evolution_negative_eigenvalue",
                self.evolution_negative_eigenvalue,
            ),
            ("isoline", self.isoline),
        ];
        for (name, value) in reals {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "tolerance {name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.jacobi_max_sweeps == 0 || self.bisection_max_iterations == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

static GLOBAL: OnceLock<Tolerances> = OnceLock::new();

/// The process-wide tolerance record.
pub fn global() -> &'static Tolerances {
    GLOBAL.get_or_init(Tolerances::default)
}

/// Installs the process-wide record. Fails if it is invalid or if a record
/// was already installed (or read) with different values.
pub fn install(tol: Tolerances) -> Result<()> {
    tol.validate()?;
    let installed = GLOBAL.get_or_init(|| tol);
    if *installed != tol {
        return Err(Error::Config(
            "tolerances were already fixed for this process".into(),
        ));
    }
    Ok(())
}
