//! Seeded random matrices, states and channels.
//!
//! Everything draws from an explicit `Rng` so trials are reproducible and can
//! be partitioned across workers by seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::Channel;
use crate::linalg::{inverse_sqrt, ComplexMatrix, DensityMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard-normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    ComplexMatrix::new(rows, cols, data).expect("positive dims")
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

/// Gram–Schmidt orthonormalisation of the columns of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column_vec(j);
        for q in &cols {
            let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= overlap * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

/// Random full-rank density matrix W W† / Tr(W W†).
pub fn random_density_matrix<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let w = ginibre(n, n, rng);
    let ww = &w * &w.adjoint();
    let tr = ww.trace().re;
    let rho = ww.scale_real(1.0 / tr).hermitian_part();
    DensityMatrix::new(rho, dims.to_vec()).expect("Wishart matrix is a valid state")
}

/// Random CPT map: `count` Ginibre Kraus operators right-multiplied by
/// (Σ K†K)^{-1/2}.
pub fn random_kraus_channel<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Channel {
    let raw: Vec<ComplexMatrix> = (0..count.max(1)).map(|_| ginibre(dim, dim, rng)).collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for k in &raw {
        s += &(&k.adjoint() * k);
    }
    let norm = inverse_sqrt(&s.hermitian_part()).expect("Σ K†K is positive definite");
    let ops = raw.iter().map(|k| k * &norm).collect();
    Channel::kraus(ops).expect("normalised Kraus operators are trace preserving")
}

pub fn random_unitary_channel<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Channel {
    Channel::unitary(random_unitary(dim, rng)).expect("Gram–Schmidt output is unitary")
}
