use num_complex::Complex64;

use super::eig::hermitian_eigenvalues;
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tolerance;

/// Hermitian, unit-trace, positive semidefinite matrix over a tensor product
/// of subsystems. Composite indices are lexicographic in `subsystem_dims`,
/// the first subsystem being the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates against the global state tolerances.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let neg = tolerance::global().negative_eigenvalue;
        Self::with_positivity_tolerance(matrix, dims, neg)
    }

    /// Same checks as [`DensityMatrix::new`] with a caller-supplied bound on
    /// negative eigenvalues. Used for integrator output, which is validated
    /// against the trajectory tolerance.
    pub fn with_positivity_tolerance(
        matrix: ComplexMatrix,
        dims: Vec<usize>,
        negative_eigenvalue: f64,
    ) -> Result<Self> {
        let tol = tolerance::global();
        check_dims(&matrix, &dims)?;
        let herm = matrix.hermiticity_defect();
        if herm > tol.hermitian {
            return Err(Error::InvariantViolation(format!(
                "density matrix not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvariantViolation(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = *hermitian_eigenvalues(&matrix)?
            .last()
            .expect("non-empty spectrum");
        if min < -negative_eigenvalue {
            return Err(Error::InvariantViolation(format!(
                "density matrix has eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Pure state |ψ⟩⟨ψ| from a normalised vector.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > tolerance::global().trace {
            return Err(Error::InvariantViolation(format!(
                "state vector has squared norm {norm}"
            )));
        }
        Self::new(ComplexMatrix::outer(psi, psi), dims)
    }

    /// Computational basis projector |k⟩⟨k| on a single subsystem of dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::BadDimension(format!(
                "basis index {k} for dimension {d}"
            )));
        }
        let mut psi = vec![ZERO; d];
        psi[k] = Complex64::new(1.0, 0.0);
        Self::pure(&psi, vec![d])
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::new(ComplexMatrix::identity(n).scale_real(1.0 / n as f64), dims)
    }

    /// Skips all checks; for values known to be valid by construction.
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.rows();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                // Tr(ρρ) = Σ ρ_ij ρ_ji = Σ |ρ_ij|² for Hermitian ρ
                s += (m[(i, j)] * m[(j, i)]).re;
            }
        }
        s
    }

    /// ρ ⊗ σ with concatenated subsystem lists.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts_unchecked(self.matrix.kron(&other.matrix), dims)
    }

    /// Reinterprets the subsystem split; the total dimension must not change.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&self.matrix, &dims)?;
        Ok(Self {
            matrix: self.matrix,
            dims,
        })
    }

    /// ⟨ψ|ρ|ψ⟩
    pub fn expectation(&self, psi: &[Complex64]) -> Result<f64> {
        let rho_psi = self.matrix.apply_vec(psi)?;
        Ok(psi
            .iter()
            .zip(&rho_psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .re)
    }
}

fn check_dims(matrix: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "density matrix must be square, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::BadDimension(format!("subsystem dims {dims:?}")));
    }
    let product: usize = dims.iter().product();
    if product != matrix.rows() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not multiply to {}",
            matrix.rows()
        )));
    }
    Ok(())
}

/// Digits of `index` in the mixed radix given by `dims` (most significant first).
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn compose_index(digits: impl Iterator<Item = (usize, usize)>) -> usize {
    digits.fold(0, |acc, (digit, d)| acc * d + digit)
}

/// Reduced state on the subsystems in `keep`, kept in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.subsystem_dims();
    let count = dims.len();
    if keep.is_empty() {
        return Err(Error::BadSubsystemIndex {
            index: usize::MAX,
            count,
        });
    }
    let mut kept = vec![false; count];
    for &k in keep {
        if k >= count {
            return Err(Error::BadSubsystemIndex { index: k, count });
        }
        kept[k] = true;
    }
    let kept_dims: Vec<usize> = (0..count).filter(|&i| kept[i]).map(|i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let n = rho.dim();
    let m = rho.matrix();

    // Split each composite index into a (kept, traced) pair once.
    let mut kept_index = vec![0usize; n];
    let mut traced_index = vec![0usize; n];
    let mut buf = vec![0usize; count];
    for idx in 0..n {
        digits(idx, dims, &mut buf);
        kept_index[idx] = compose_index((0..count).filter(|&i| kept[i]).map(|i| (buf[i], dims[i])));
        traced_index[idx] =
            compose_index((0..count).filter(|&i| !kept[i]).map(|i| (buf[i], dims[i])));
    }

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..n {
        for j in 0..n {
            if traced_index[i] == traced_index[j] {
                out[(kept_index[i], kept_index[j])] += m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(out, kept_dims))
}

/// Reorders subsystems: output subsystem `k` is input subsystem `perm[k]`.
/// Equivalent to conjugation by the corresponding permutation unitary.
pub fn permute_subsystems(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.subsystem_dims();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if perm.len() != dims.len() || sorted.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::BadPermutation(perm.to_vec()));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n = rho.dim();
    let map = permuted_index_map(dims, perm);
    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(out, new_dims))
}

/// For each old composite index, its position after permuting subsystems.
fn permuted_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n: usize = dims.iter().product();
    let mut buf = vec![0usize; dims.len()];
    (0..n)
        .map(|idx| {
            digits(idx, dims, &mut buf);
            compose_index(perm.iter().map(|&p| (buf[p], dims[p])))
        })
        .collect()
}

/// Permutation unitary P with P (x₀ ⊗ x₁ ⊗ …) = x_{perm[0]} ⊗ x_{perm[1]} ⊗ …
pub fn permutation_unitary(dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if perm.len() != dims.len() || sorted.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::BadPermutation(perm.to_vec()));
    }
    let n: usize = dims.iter().product();
    let mut p = ComplexMatrix::zeros(n, n);
    for (old, new) in permuted_index_map(dims, perm).into_iter().enumerate() {
        p[(new, old)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}

/// ½ Σ |λ_i(a - b)|
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.subsystem_dims() != b.subsystem_dims() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {:?} and {:?}",
            a.subsystem_dims(),
            b.subsystem_dims()
        )));
    }
    let diff = (a.matrix() - b.matrix()).hermitian_part();
    let eig = hermitian_eigenvalues(&diff)?;
    Ok((0.5 * eig.iter().map(|x| x.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density_matrix, seeded};

    fn bell() -> DensityMatrix {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DensityMatrix::pure(&[h, ZERO, ZERO, h], vec![2, 2]).unwrap()
    }

    #[test]
    fn product_state_marginal() {
        let mut rng = seeded(1);
        let a = random_density_matrix(&[2], &mut rng);
        let b = random_density_matrix(&[3], &mut rng);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, &[0]).unwrap();
        let rb = partial_trace(&ab, &[1]).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-14);
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[0]).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(r.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn keep_everything_is_identity_op() {
        let mut rng = seeded(2);
        let rho = random_density_matrix(&[2, 3, 2], &mut rng);
        let r = partial_trace(&rho, &[0, 1, 2]).unwrap();
        assert_eq!(r, rho);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = bell();
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::BadSubsystemIndex { index: 2, count: 2 })
        ));
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn permutation_identity_and_involution() {
        let mut rng = seeded(3);
        let rho = random_density_matrix(&[2, 2, 2, 2], &mut rng);
        assert_eq!(permute_subsystems(&rho, &[0, 1, 2, 3]).unwrap(), rho);
        let swap = [0, 2, 1, 3];
        let twice = permute_subsystems(&permute_subsystems(&rho, &swap).unwrap(), &swap).unwrap();
        assert_eq!(twice, rho);
    }

    #[test]
    fn permutation_of_product_reorders_factors() {
        let mut rng = seeded(4);
        let f: Vec<DensityMatrix> = [2, 3, 2, 3]
            .iter()
            .map(|&d| random_density_matrix(&[d], &mut rng))
            .collect();
        let abab = f[0].tensor(&f[1]).tensor(&f[2]).tensor(&f[3]);
        let aabb = f[0].tensor(&f[2]).tensor(&f[1]).tensor(&f[3]);
        let p = permute_subsystems(&abab, &[0, 2, 1, 3]).unwrap();
        assert_eq!(p.subsystem_dims(), &[2, 2, 3, 3]);
        assert!(p.matrix().max_abs_diff(aabb.matrix()) < 1e-15);
    }

    #[test]
    fn permutation_matches_unitary_conjugation() {
        let mut rng = seeded(5);
        let dims = [2, 3, 2];
        let perm = [2, 0, 1];
        let rho = random_density_matrix(&dims, &mut rng);
        let u = permutation_unitary(&dims, &perm).unwrap();
        let conj = &(&u * rho.matrix()) * &u.adjoint();
        let p = permute_subsystems(&rho, &perm).unwrap();
        assert!(p.matrix().max_abs_diff(&conj) < 1e-15);
    }

    #[test]
    fn bad_permutation_rejected() {
        let rho = bell();
        assert!(matches!(
            permute_subsystems(&rho, &[0, 0]),
            Err(Error::BadPermutation(_))
        ));
        assert!(permute_subsystems(&rho, &[0]).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!((trace_distance(&mixed, &zero).unwrap() - 0.5).abs() < 1e-15);
        assert!(trace_distance(&zero, &bell()).is_err());
    }

    #[test]
    fn density_validation() {
        let not_psd = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(not_psd, vec![2]).is_err());
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(DensityMatrix::new(bad_trace, vec![2]).is_err());
        let ok = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(DensityMatrix::new(ok.clone(), vec![3]).is_err());
        assert!(DensityMatrix::new(ok, vec![2]).is_ok());
    }
}
