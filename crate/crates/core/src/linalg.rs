//! Small dense complex linear algebra.
//!
//! Every operator in this crate is at most 64×64 (and in practice ≤ 8×8), so
//! a cyclic Jacobi eigensolver is both accurate and fast enough.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

const MAX_SWEEPS: usize = 100;

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    err
}

/// Largest entrywise absolute difference between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diag().sum()
}

/// Hermitian eigendecomposition `m = V diag(λ) V†`.
///
/// Eigenvalues are returned in ascending order, eigenvectors as the columns
/// of `V`. Only the upper triangle is trusted; the input is symmetrised first.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Array1<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "expected a square matrix, got {}×{}",
                n,
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let herr = hermiticity_error(m);
        if !herr.is_finite() || herr > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (deviation {herr:e})"
            )));
        }
        let (values, vectors) = jacobi(m);
        Ok(Eigh { values, vectors })
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn map_values(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros((n, n));
        for k in 0..n {
            let fk = f(self.values[k]);
            for i in 0..n {
                let vik = self.vectors[[i, k]] * fk;
                for j in 0..n {
                    out[[i, j]] += vik * self.vectors[[j, k]].conj();
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[[i, j]].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi rotations.
fn jacobi(m: &CMatrix) -> (Array1<f64>, CMatrix) {
    let n = m.nrows();
    let mut a = CMatrix::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = Complex64::new(m[[i, i]].re, 0.0);
        for j in (i + 1)..n {
            let z = 0.5 * (m[[i, j]] + m[[j, i]].conj());
            a[[i, j]] = z;
            a[[j, i]] = z.conj();
        }
    }
    let mut v = CMatrix::eye(n);
    let total = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if total == 0.0 {
        return (Array1::zeros(n), v);
    }

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                let mag = apq.norm();
                if mag <= 1e-18 * total {
                    continue;
                }
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                // Reduce to a real symmetric 2×2 problem with the phase of a_pq,
                // then apply the classic rotation.
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -s * phase.conj();
                let g_qq = c * phase.conj();

                // A <- A G
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * g_pp + akq * g_qp;
                    a[[k, q]] = akp * g_pq + akq * g_qq;
                }
                // A <- G† A
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[[q, k]] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[[p, q]] = ZERO;
                a[[q, p]] = ZERO;
                a[[p, p]].im = 0.0;
                a[[q, q]].im = 0.0;
                // V <- V G
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * g_pp + vkq * g_qp;
                    v[[k, q]] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].re.total_cmp(&a[[j, j]].re));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]].re));
    let mut vectors = CMatrix::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        vectors.column_mut(col).assign(&v.column(src));
    }
    (values, vectors)
}

/// Operator (spectral) norm of an arbitrary square matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let gram = dagger(m).dot(m);
    let eig = Eigh::new(&gram).expect("Gram matrix is Hermitian");
    eig.values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(0.0)
        .sqrt()
}

/// Singular values of a square matrix, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let gram = m.dot(&dagger(m));
    let eig = Eigh::new(&gram).expect("Gram matrix is Hermitian");
    let mut s: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    CMatrix::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) - b.dot(a)
}
