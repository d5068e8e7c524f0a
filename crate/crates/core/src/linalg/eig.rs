//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classic real Jacobi rotation, so a single
//! 2×2 unitary `G` acting on columns `p, q` annihilates the pivot:
//!
//! ```text
//! G = | c            s          |
//!     | -s e^{-iφ}   c e^{-iφ}  |     a_pq = |a_pq| e^{iφ}
//! ```
//!
//! Sweeps run over all pairs `p < q` until the off-diagonal Frobenius norm
//! drops below the configured threshold.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tolerance;

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// V · diag(f(λ)) · V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    let tol = tolerance::global();
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tol.hermitian {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol.jacobi_off_diagonal * m.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off >= threshold {
        if sweeps == tol.jacobi_max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|s| s.eigenvalues)
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = Complex64::from_polar(1.0, -apq.arg());

    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    let n = a.rows();
    // A ← A G
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * g_pp + aiq * g_qp;
        a[(i, q)] = aip * g_pq + aiq * g_qq;
    }
    // A ← G† A
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = g_pp.conj() * apj + g_qp.conj() * aqj;
        a[(q, j)] = g_pq.conj() * apj + g_qq.conj() * aqj;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V ← V G
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * g_pp + viq * g_qp;
        v[(i, q)] = vip * g_pq + viq * g_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::pauli;
    use crate::random::{random_hermitian, seeded};

    #[test]
    fn diagonal_input_sorted_descending() {
        let m = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let s = hermitian_eig(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = hermitian_eig(&pauli::x()).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigenpairs_and_reconstruction_on_random_inputs() {
        let mut rng = seeded(7);
        for n in [1, 2, 3, 5, 8, 16] {
            let m = random_hermitian(n, &mut rng);
            let s = hermitian_eig(&m).unwrap();
            assert!(s.reconstruct().max_abs_diff(&m) < 1e-8);
            let v = &s.eigenvectors;
            let gram = &v.adjoint() * v;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-9);
            for k in 0..n {
                let col = v.column_vec(k);
                let mv = m.apply_vec(&col).unwrap();
                for i in 0..n {
                    assert!((mv[i] - col[i] * s.eigenvalues[k]).norm() < 1e-8);
                }
            }
            let trace: f64 = s.eigenvalues.iter().sum();
            assert!((trace - m.trace().re).abs() < 1e-9);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let m = ComplexMatrix::identity(4).scale_real(0.25);
        let s = hermitian_eig(&m).unwrap();
        assert!(s.eigenvalues.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }
}
