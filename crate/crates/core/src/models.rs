//! Physical two-qubit models.
//!
//! Single-qubit basis order is (|e⟩, |g⟩), so σ⁻ = |g⟩⟨e| = [[0, 0], [1, 0]]
//! and σ^z = diag(1, -1). Atom/qubit 1 is subsystem A, atom/qubit 2 is B.
//! Frequencies, rates and temperatures are in units of ω; times in 1/ω.

use serde::{Deserialize, Serialize};

use crate::channels::{tensor_channels, Channel};
use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, ComplexMatrix};
use crate::lindblad::LindbladGenerator;

/// Closed-form branch is used above this argument; below it, the power series.
const J2_SERIES_CUTOFF: f64 = 0.5;
const SMALL_X: f64 = 1e-4;

pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap()
}

pub fn sigma_plus() -> ComplexMatrix {
    sigma_minus().adjoint()
}

fn on_first(op: &ComplexMatrix) -> ComplexMatrix {
    kron(op, &ComplexMatrix::identity(2))
}

fn on_second(op: &ComplexMatrix) -> ComplexMatrix {
    kron(&ComplexMatrix::identity(2), op)
}

/// sin x / x
pub fn spherical_bessel_j0(x: f64) -> f64 {
    if x.abs() < SMALL_X {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// (3/x³ - 1/x) sin x - (3/x²) cos x
pub fn spherical_bessel_j2(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SMALL_X {
        x * x / 15.0
    } else if ax < J2_SERIES_CUTOFF {
        // The closed form loses ~x⁻³·ε to cancellation here.
        j2_series(x)
    } else {
        (3.0 / (x * x * x) - 1.0 / x) * x.sin() - 3.0 / (x * x) * x.cos()
    }
}

/// x² Σ_k (-x²/2)^k / (k! (2k+5)!!)
fn j2_series(x: f64) -> f64 {
    let y = -x * x / 2.0;
    let mut term = 1.0 / 15.0;
    let mut sum = term;
    for k in 1..30 {
        term *= y / (k as f64 * (2 * k + 5) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    x * x * sum
}

/// P₂(c) = (3c² - 1)/2
pub fn legendre_p2(c: f64) -> f64 {
    0.5 * (3.0 * c * c - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoAtomParams {
    pub omega: f64,
    pub dipole_norm: f64,
    /// Interatomic distance in units of 1/ω.
    pub r: f64,
    /// Angle between the dipole and the separation vector.
    pub theta: f64,
}

impl Default for TwoAtomParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            dipole_norm: 2.0,
            r: 1.0,
            theta: 0.0,
        }
    }
}

impl TwoAtomParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.dipole_norm > 0.0 && self.dipole_norm.is_finite()) {
            return Err(Error::Config(format!(
                "dipole norm must be positive, got {}",
                self.dipole_norm
            )));
        }
        if self.r.is_nan() || self.r < 0.0 {
            return Err(Error::Config(format!(
                "r must be non-negative, got {}",
                self.r
            )));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite".into()));
        }
        Ok(())
    }

    /// γ₀ = (4/3) ω³ |d|²
    pub fn gamma0(&self) -> f64 {
        4.0 / 3.0 * self.omega.powi(3) * self.dipole_norm.powi(2)
    }

    pub fn with_r(self, r: f64) -> Self {
        Self { r, ..self }
    }
}

/// Rate matrix a_jk = γ₀ [j₀(x) + P₂(cos θ) j₂(x)] with x = ω r.
pub fn two_atom_rates(p: &TwoAtomParams) -> Result<[[f64; 2]; 2]> {
    p.validate()?;
    let g = p.gamma0();
    let x = p.omega * p.r;
    let off = if x.is_infinite() {
        0.0
    } else {
        g * (spherical_bessel_j0(x) + legendre_p2(p.theta.cos()) * spherical_bessel_j2(x))
    };
    Ok([[g, off], [off, g]])
}

/// H = (ω/2)(σ₁^z + σ₂^z), jumps [σ₁⁻, σ₂⁻] with collective rates.
pub fn two_atom_generator(p: &TwoAtomParams) -> Result<LindbladGenerator> {
    let a = two_atom_rates(p)?;
    let z = pauli::z();
    let h = (&on_first(&z) + &on_second(&z)).scale_real(p.omega / 2.0);
    let sm = sigma_minus();
    LindbladGenerator::with_real_rates(
        h,
        vec![on_first(&sm), on_second(&sm)],
        &[a[0].to_vec(), a[1].to_vec()],
        vec![2, 2],
    )
}

/// Single-qubit full decay E(ρ) = K₁ρK₁† + K₂ρK₂† with K₁ = |g⟩⟨e|, K₂ = |g⟩⟨g|.
pub fn full_decay_channel() -> Channel {
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
    let k2 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
    Channel::kraus(vec![k1, k2]).expect("complete")
}

/// E ⊗ E, the t → ∞ limit of the two-atom dynamics for r > 0.
pub fn two_atom_asymptotic_channel() -> Channel {
    let e = full_decay_channel();
    tensor_channels(&e, &e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ZZThermalParams {
    pub omega: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub gamma0: f64,
    /// Bath temperature in units of ω.
    #[serde(rename = "T")]
    pub temperature: f64,
    pub include_local_hamiltonian: bool,
}

impl Default for ZZThermalParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            j: 1.0,
            gamma0: 4.0 / 3.0,
            temperature: 0.0,
            include_local_hamiltonian: false,
        }
    }
}

impl ZZThermalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::Config(format!(
                "gamma0 must be positive, got {}",
                self.gamma0
            )));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if !self.j.is_finite() {
            return Err(Error::Config("J must be finite".into()));
        }
        Ok(())
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }

    /// Bose occupation [exp(ω/T) - 1]⁻¹; zero for T < 10⁻⁶ ω.
    pub fn mean_occupation(&self) -> f64 {
        bose_occupation(self.omega, self.temperature)
    }
}

pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature < 1e-6 * omega {
        return 0.0;
    }
    let x = omega / temperature;
    if x > 700.0 {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// H = [ω/2 (σ₁^z + σ₂^z)] + J σ₁^z σ₂^z, jumps [σ₁⁻, σ₂⁻, σ₁⁺, σ₂⁺] with
/// rates diag(γ₀(n̄+1), γ₀(n̄+1), γ₀n̄, γ₀n̄).
pub fn zz_thermal_generator(p: &ZZThermalParams) -> Result<LindbladGenerator> {
    p.validate()?;
    let z = pauli::z();
    let mut h = kron(&z, &z).scale_real(p.j);
    if p.include_local_hamiltonian {
        h += &(&on_first(&z) + &on_second(&z)).scale_real(p.omega / 2.0);
    }
    let n = p.mean_occupation();
    let down = p.gamma0 * (n + 1.0);
    let up = p.gamma0 * n;
    let sm = sigma_minus();
    let sp = sigma_plus();
    let rates = [
        vec![down, 0.0, 0.0, 0.0],
        vec![0.0, down, 0.0, 0.0],
        vec![0.0, 0.0, up, 0.0],
        vec![0.0, 0.0, 0.0, up],
    ];
    LindbladGenerator::with_real_rates(
        h,
        vec![on_first(&sm), on_second(&sm), on_first(&sp), on_second(&sp)],
        &rates,
        vec![2, 2],
    )
}
