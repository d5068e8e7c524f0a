//! Reference computations that take a different route from the production
//! code. The self-test and the acceptance suite compare against these.

use num_complex::Complex64;

use crate::channels::{max_entangled_state, ChoiState};
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, DensityMatrix, ONE, ZERO};
use crate::lindblad::LindbladGenerator;

/// Matrix of L acting on row-major vec(ρ): vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
pub fn superoperator(gen: &LindbladGenerator) -> ComplexMatrix {
    let n = gen.dim();
    let id = ComplexMatrix::identity(n);
    let h = gen.hamiltonian();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut sup = (&kron(h, &id) - &kron(&id, &h.transpose())).scale(minus_i);
    let ops = gen.jump_ops();
    let rates = gen.rates();
    for (j, lj) in ops.iter().enumerate() {
        for (k, lk) in ops.iter().enumerate() {
            let a = rates[(j, k)];
            if a == ZERO {
                continue;
            }
            let ljk = &lj.adjoint() * lk;
            sup.axpy(a, &kron(lk, &lj.conj()));
            sup.axpy(a * -0.5, &kron(&ljk, &id));
            sup.axpy(a * -0.5, &kron(&id, &ljk.transpose()));
        }
    }
    sup
}

/// e^M by scaling and squaring around a truncated Taylor series.
pub fn expm(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.25 {
        (norm1 / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scale_real(0.5f64.powi(squarings));
    let mut result = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=20 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        result += &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// ρ(t) = e^{tL} ρ₀ through the dense superoperator exponential.
pub fn evolve_dense(gen: &LindbladGenerator, rho0: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = gen.dim();
    let prop = expm(&superoperator(gen).scale_real(t));
    let v = prop.apply_vec(rho0.as_slice()).expect("matching dims");
    ComplexMatrix::new(n, n, v).expect("n² entries")
}

/// CJ state of e^{tL} through the superoperator exponential of L ⊗ 1.
pub fn choi_dense(gen: &LindbladGenerator, t: f64) -> Result<ChoiState> {
    let dims = gen.subsystem_dims().to_vec();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "bipartite generator needed, got {dims:?}"
        )));
    }
    let ext = gen.extend_with_reference(&dims)?;
    let phi = max_entangled_state(gen.dim())?;
    let rho = evolve_dense(&ext, phi.matrix(), t).hermitian_part();
    let state = DensityMatrix::with_positivity_tolerance(
        rho,
        vec![dims[0], dims[1], dims[0], dims[1]],
        1e-8,
    )?;
    ChoiState::from_state(state)
}

/// Coefficients c₀..c_n of det(λ - M) = Σ c_k λ^k via Faddeev–LeVerrier.
pub fn characteristic_polynomial(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = ComplexMatrix::zeros(n, n);
    let id = ComplexMatrix::identity(n);
    for k in 1..=n {
        // M_k = M (M_{k-1} + c_{n-k+1} I), c_{n-k} = -tr(M_k)/k
        let mut shifted = mk.clone();
        shifted.axpy(Complex64::new(coeffs[n - k + 1], 0.0), &id);
        mk = m * &shifted;
        coeffs[n - k] = -mk.trace().re / k as f64;
    }
    coeffs
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Real roots of the characteristic polynomial of a Hermitian matrix,
/// bracketed by sign changes on a fine grid over the Gershgorin interval and
/// refined by bisection. Returned in descending order.
pub fn char_poly_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let coeffs = characteristic_polynomial(m);
    let radius = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let samples = 200_000;
    let step = 2.0 * radius / samples as f64;
    let mut roots = Vec::with_capacity(n);
    let mut x0 = -radius;
    let mut f0 = horner(&coeffs, x0);
    for i in 1..=samples {
        let x1 = -radius + i as f64 * step;
        let f1 = horner(&coeffs, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = horner(&coeffs, mid);
                if fm == 0.0 || hi - lo < 1e-15 * radius {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Tr over qubits 1 and 3 of a four-qubit matrix, written as an explicit
/// sum over the traced indices.
pub fn partial_trace_four_qubits_keep_0_2(rho: &ComplexMatrix) -> ComplexMatrix {
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * 2 + b) * 2 + c) * 2 + d;
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for c in 0..2 {
            for a2 in 0..2 {
                for c2 in 0..2 {
                    let mut acc = ZERO;
                    for b in 0..2 {
                        for d in 0..2 {
                            acc += rho[(idx(a, b, c, d), idx(a2, b, c2, d))];
                        }
                    }
                    out[(a * 2 + c, a2 * 2 + c2)] = acc;
                }
            }
        }
    }
    out
}

/// Largest violation of Σ_{ij} ⟨ki|U|mj⟩⟨nj|U†|ℓi⟩ = δ_kℓ δ_mn.
pub fn maximality_condition_defect(u: &ComplexMatrix, d: usize) -> f64 {
    let ud = u.adjoint();
    let mut worst = 0.0_f64;
    for k in 0..d {
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    let mut s = ZERO;
                    for i in 0..d {
                        for j in 0..d {
                            s += u[(k * d + i, m * d + j)] * ud[(n * d + j, l * d + i)];
                        }
                    }
                    let target = if k == l && m == n { ONE } else { ZERO };
                    worst = worst.max((s - target).norm());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, seeded};

    #[test]
    fn expm_of_diagonal() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -2.0, 0.5]);
        let e = expm(&m);
        for (i, x) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            assert!((e[(i, i)].re - x.exp()).abs() < 1e-13 * x.exp().max(1.0));
        }
    }

    #[test]
    fn char_poly_of_diagonal() {
        let m = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0, -1.0]);
        let r = char_poly_eigenvalues(&m);
        for (a, b) in r.iter().zip([3.0, 2.0, 1.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn char_poly_roots_count() {
        let m = random_hermitian(4, &mut seeded(0));
        assert_eq!(char_poly_eigenvalues(&m).len(), 4);
    }
}
