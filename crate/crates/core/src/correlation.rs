//! The correlation measure of a bipartite channel.
//!
//! For a channel on S = AB with dim A = dim B = d, the measure is the quantum
//! mutual information of its CJ state across the cut AA'|BB', normalised by
//! its maximum 4 ln d:
//!
//! ```text
//! Ī = [S(ρ_AA') + S(ρ_BB') - S(ρ)] / (4 ln d)
//! ```
//!
//! Ī vanishes exactly on product channels E_A ⊗ E_B, never increases under
//! pre- and post-composition with product channels, and equals 1 exactly on
//! unitaries whose reshuffled matrix is again unitary.

use rand::Rng;
use serde::Serialize;

use crate::channels::{
    choi_state, compose, max_entangled_vector, tensor_channels, Channel, ChoiState,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, partial_trace, ComplexMatrix, DensityMatrix};
use crate::random::{random_kraus_channel, random_unitary_channel};
use crate::tolerance;

/// Entropies (nats) of a CJ state and the resulting Ī.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub i_bar: f64,
    #[serde(rename = "mutual_information_nats")]
    pub mutual_information: f64,
    pub entropy_aa: f64,
    pub entropy_bb: f64,
    pub entropy_total: f64,
    pub d: usize,
}

/// -Σ λ ln λ in nats. Eigenvalues down to `-negative_eigenvalue` are treated
/// as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_matrix(rho.matrix(), tolerance::global().negative_eigenvalue)
}

pub(crate) fn entropy_of_matrix(m: &ComplexMatrix, negative_eigenvalue: f64) -> Result<f64> {
    let eig = hermitian_eigenvalues(m)?;
    let min = *eig.last().expect("non-empty spectrum");
    if min < -negative_eigenvalue {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(eig.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum())
}

/// Ī of a CJ state. Negative eigenvalues are accepted down to the
/// trajectory bound, since CJ states may come out of the integrator.
pub fn i_bar(choi: &ChoiState) -> Result<CorrelationReport> {
    let tol = tolerance::global();
    i_bar_with_tolerance(
        choi,
        tol.negative_eigenvalue
            .max(tol.evolution_negative_eigenvalue),
    )
}

/// [`i_bar`] with an explicit bound on negative eigenvalues, for states coming
/// out of the integrator.
pub fn i_bar_with_tolerance(
    choi: &ChoiState,
    negative_eigenvalue: f64,
) -> Result<CorrelationReport> {
    let (d_a, d_b) = (choi.d_a(), choi.d_b());
    if d_a != d_b {
        return Err(Error::AsymmetricDimensions { d_a, d_b });
    }
    let d = d_a;
    if d < 2 {
        return Err(Error::BadDimension(format!(
            "the measure needs local dimension >= 2, got {d}"
        )));
    }
    let rho = choi.state();
    let s_aa = entropy_of_matrix(partial_trace(rho, &[0, 2])?.matrix(), negative_eigenvalue)?;
    let s_bb = entropy_of_matrix(partial_trace(rho, &[1, 3])?.matrix(), negative_eigenvalue)?;
    let s_total = entropy_of_matrix(rho.matrix(), negative_eigenvalue)?;
    let mi = s_aa + s_bb - s_total;
    let raw = mi / (4.0 * (d as f64).ln());
    let band = tolerance::global().i_bar_clamp;
    if !(-band..=1.0 + band).contains(&raw) {
        return Err(Error::InvariantViolation(format!(
            "Ī = {raw:.12} lies outside [0, 1] beyond roundoff"
        )));
    }
    Ok(CorrelationReport {
        i_bar: raw.clamp(0.0, 1.0),
        mutual_information: mi,
        entropy_aa: s_aa,
        entropy_bb: s_bb,
        entropy_total: s_total,
        d,
    })
}

/// Ī of a channel on C^d ⊗ C^d.
pub fn channel_i_bar(ch: &Channel, d: usize) -> Result<f64> {
    Ok(i_bar(&choi_state(ch, d, d)?)?.i_bar)
}

/// True iff the mutual information across AA'|BB' is below `tol` (nats).
pub fn is_uncorrelated(choi: &ChoiState, tol: Option<f64>) -> Result<bool> {
    let tol = tol.unwrap_or(tolerance::global().uncorrelated);
    Ok(i_bar(choi)?.mutual_information < tol)
}

/// V[(k,m),(ℓ,n)] = U[(k,ℓ),(m,n)] for a d²×d² matrix. An involution.
pub fn reshuffle(u: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    let n = d * d;
    if d == 0 || u.dim() != (n, n) {
        return Err(Error::BadDimension(format!(
            "reshuffle with d = {d} needs a {n}x{n} matrix, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let mut v = ComplexMatrix::zeros(n, n);
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                for nn in 0..d {
                    v[(k * d + m, l * d + nn)] = u[(k * d + l, m * d + nn)];
                }
            }
        }
    }
    Ok(v)
}

/// Entrywise unitarity defect of the reshuffled matrix, scaled so that it is
/// zero exactly for maximally correlated unitaries.
pub fn reshuffle_unitarity_defect(u: &ComplexMatrix, d: usize) -> Result<f64> {
    Ok(reshuffle(u, d)?.unitarity_defect())
}

/// Whether a unitary on C^d ⊗ C^d reaches Ī = 1.
pub fn is_maximally_correlated(u: &ComplexMatrix, d: usize, tol: Option<f64>) -> Result<bool> {
    let defect = u.unitarity_defect();
    if defect > tolerance::global().unitary {
        return Err(Error::NotUnitary { defect });
    }
    let tol = tol.unwrap_or(tolerance::global().maximal_correlation);
    Ok(reshuffle_unitarity_defect(u, d)? < tol)
}

/// Which local maps surround the channel in a law trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalMaps {
    /// Random Kraus channels with the given number of operators.
    Cpt { kraus_count: usize },
    /// Random local unitaries; Ī must stay exactly the same.
    Unitary,
}

impl Default for LocalMaps {
    fn default() -> Self {
        LocalMaps::Cpt { kraus_count: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawTrial {
    pub before: f64,
    pub after: f64,
}

impl LawTrial {
    pub fn increase(&self) -> f64 {
        self.after - self.before
    }
}

fn random_local<R: Rng + ?Sized>(d: usize, maps: LocalMaps, rng: &mut R) -> Channel {
    match maps {
        LocalMaps::Cpt { kraus_count } => random_kraus_channel(d, kraus_count, rng),
        LocalMaps::Unitary => random_unitary_channel(d, rng),
    }
}

/// Measures Ī of `ch` and of `(L_A⊗L_B) ∘ ch ∘ (R_A⊗R_B)` for `trials` random
/// draws of the four local maps.
pub fn check_fundamental_law<R: Rng + ?Sized>(
    ch: &Channel,
    d: usize,
    trials: usize,
    maps: LocalMaps,
    rng: &mut R,
) -> Result<Vec<LawTrial>> {
    if trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    if ch.dim() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "channel dimension {} but d² = {}",
            ch.dim(),
            d * d
        )));
    }
    let before = channel_i_bar(ch, d)?;
    (0..trials)
        .map(|_| {
            let left = tensor_channels(&random_local(d, maps, rng), &random_local(d, maps, rng));
            let right = tensor_channels(&random_local(d, maps, rng), &random_local(d, maps, rng));
            let wrapped = compose(&left, &compose(ch, &right)?)?;
            Ok(LawTrial {
                before,
                after: channel_i_bar(&wrapped, d)?,
            })
        })
        .collect()
}

/// 1 - √⟨Φ|ρ^CJ|Φ⟩
pub fn error_probability(choi: &ChoiState) -> Result<f64> {
    let d_s = choi.d_a() * choi.d_b();
    let phi = max_entangled_vector(d_s);
    let fidelity = choi.state().expectation(&phi)?.clamp(0.0, 1.0);
    Ok(1.0 - fidelity.sqrt())
}
