//! Random states and operators for tests and the convex-roof optimiser.
//!
//! Pure states are Haar distributed (normalised complex Gaussian vectors);
//! unitaries come from Gram-Schmidt on a Ginibre matrix with the column
//! phases fixed, which is also Haar; mixed states are `GG†/tr(GG†)` for a
//! Ginibre `G` with `rank` columns.

use ndarray::Array1;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{dagger, CMatrix, CVector};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_shape_fn((rows, cols), |_| complex_gaussian(rng))
}

/// Haar-random unit vector of dimension `dim`.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v: CVector = Array1::from_shape_fn(dim, |_| complex_gaussian(rng));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv(|z| z / norm)
}

/// Orthonormalise the columns of `m` in place (modified Gram-Schmidt).
///
/// Returns `false` if a column became numerically dependent on earlier ones.
pub fn orthonormalize_columns(m: &mut CMatrix) -> bool {
    let (rows, cols) = m.dim();
    for k in 0..cols {
        for j in 0..k {
            let mut overlap = Complex64::new(0.0, 0.0);
            for i in 0..rows {
                overlap += m[[i, j]].conj() * m[[i, k]];
            }
            for i in 0..rows {
                let mij = m[[i, j]];
                m[[i, k]] -= overlap * mij;
            }
        }
        let norm = (0..rows).map(|i| m[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return false;
        }
        for i in 0..rows {
            m[[i, k]] /= norm;
        }
    }
    true
}

/// Haar-random `d×d` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    loop {
        let mut m = ginibre(rng, d, d);
        if orthonormalize_columns(&mut m) {
            return m;
        }
    }
}

/// Random Hermitian matrix with Gaussian entries (GUE-like, unnormalised).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + &dagger(&g)).mapv(|z| z * 0.5)
}

/// Random density matrix of rank at most `rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, dim, rank);
    let rho = g.dot(&dagger(&g));
    let tr: f64 = rho.diag().iter().map(|z| z.re).sum();
    rho.mapv(|z| z / tr)
}
