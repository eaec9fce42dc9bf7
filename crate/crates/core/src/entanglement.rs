//! Multipartite concurrence.
//!
//! For a pure state of `N` qubits
//!
//! ```text
//! C(ψ) = 2^{1-N/2} · sqrt((2^N - 2) - Σ_S tr ρ_S²)
//! ```
//!
//! with `S` running over the `2^N - 2` nonempty proper subsets of qubits. The
//! same quantity is `sqrt(⟨ψ⊗ψ|A|ψ⊗ψ⟩)` with
//! `A = 2^{2-N} Σ_S (1 - SWAP_S)`, where `SWAP_S` exchanges the qubits of `S`
//! between the two copies. Mixed states use the convex roof, which is bounded
//! from below by the quasi-pure approximation and from above by any explicit
//! decomposition.
//!
//! All state vectors here are in the computational order: the index is the
//! ket string read as a binary number, so qubit `j` (1-based) is index bit
//! `j - 1`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::QubitDensity;
use crate::linalg::{singular_values, CMatrix, CVector, Eigh, ZERO};
use crate::model::{SectorBasis, SectorVector};
use crate::random::{ginibre, orthonormalize_columns};
use crate::{Error, Result};

/// Largest number of qubits handled by the generic subset machinery.
pub const MAX_QUBITS: usize = 8;

/// Below this, `⟨χ₁χ₁|A|χ₁χ₁⟩` is treated as zero (separable dominant term).
const QUASIPURE_ZERO: f64 = 1e-14;

/// Normalised pure state of `n_qubits` qubits in computational order.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: CVector,
}

impl PureState {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(n_qubits: usize, amps: CVector) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidInput(format!(
                "{n_qubits} qubits need {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        let norm = norm_sqr(amps.as_slice().unwrap()).sqrt();
        if !((norm - 1.0).abs() <= Self::NORM_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "pure state must be normalised, got norm {norm}"
            )));
        }
        Ok(PureState { n_qubits, amps })
    }

    /// Three-qubit state carried by a sector vector supported on a single
    /// photon number (for instance an initial product state).
    pub fn from_sector_vector(v: &SectorVector) -> Result<Self> {
        let basis = SectorBasis::new(v.sector().0);
        let mut photons = None;
        let mut amps = CVector::from_elem(8, ZERO);
        for (s, a) in basis.states().iter().zip(v.amplitudes()) {
            if a.norm() == 0.0 {
                continue;
            }
            match photons {
                None => photons = Some(s.photons),
                Some(m) if m != s.photons => {
                    return Err(Error::InvalidInput(
                        "state is entangled with the oscillator".into(),
                    ))
                }
                _ => {}
            }
            amps[s.qubits as usize] = *a;
        }
        PureState::new(3, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    fn slice(&self) -> &[Complex64] {
        self.amps.as_slice().expect("contiguous")
    }
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )))
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Index-bit mask of a set of qubits (1-based qubit labels).
pub fn subset_mask(n_qubits: usize, subset: &[usize]) -> Result<usize> {
    check_qubit_count(n_qubits)?;
    let mut mask = 0usize;
    for &q in subset {
        if q == 0 || q > n_qubits {
            return Err(Error::InvalidInput(format!(
                "qubit label {q} out of range 1..={n_qubits}"
            )));
        }
        mask |= 1 << (q - 1);
    }
    let full = (1 << n_qubits) - 1;
    if mask == 0 || mask == full {
        return Err(Error::InvalidInput(
            "subset must be nonempty and proper".into(),
        ));
    }
    Ok(mask)
}

/// Nonempty proper subsets as index-bit masks.
fn proper_subsets(n_qubits: usize) -> impl Iterator<Item = usize> {
    1..((1usize << n_qubits) - 1)
}

/// All indices whose set bits lie inside `mask`, ascending.
fn submasks(mask: usize, n_qubits: usize) -> Vec<usize> {
    (0..(1usize << n_qubits))
        .filter(|&x| x & !mask == 0)
        .collect()
}

/// `tr ρ_S²` of a (possibly subnormalised) vector, from the reduced matrix.
fn subset_purity_raw(v: &[Complex64], n_qubits: usize, mask: usize) -> f64 {
    let full = (1usize << n_qubits) - 1;
    let kept = submasks(mask, n_qubits);
    let traced = submasks(full & !mask, n_qubits);
    let mut sum = 0.0;
    for (i, &x) in kept.iter().enumerate() {
        for &y in &kept[i..] {
            let mut r = ZERO;
            for &c in &traced {
                r += v[x | c] * v[y | c].conj();
            }
            let w = if x == y { 1.0 } else { 2.0 };
            sum += w * r.norm_sqr();
        }
    }
    sum
}

/// `tr ρ_S²` where `ρ_S` keeps the qubits in `subset` (1-based labels).
pub fn subset_purity(state: &PureState, subset: &[usize]) -> Result<f64> {
    let mask = subset_mask(state.n_qubits, subset)?;
    Ok(subset_purity_raw(state.slice(), state.n_qubits, mask))
}

/// `p · C(ψ/‖ψ‖)` for a subnormalised `ψ` with `p = ‖ψ‖²`.
fn weighted_concurrence(v: &[Complex64], n_qubits: usize) -> f64 {
    let n2 = norm_sqr(v);
    let total: f64 = proper_subsets(n_qubits)
        .map(|mask| subset_purity_raw(v, n_qubits, mask))
        .sum();
    let count = ((1usize << n_qubits) - 2) as f64;
    let prefactor = 2f64.powf(1.0 - n_qubits as f64 / 2.0);
    prefactor * (count * n2 * n2 - total).max(0.0).sqrt()
}

pub fn concurrence_pure(state: &PureState) -> f64 {
    weighted_concurrence(state.slice(), state.n_qubits)
}

/// `⟨a⊗b|SWAP_S|c⊗d⟩`, contracting index blocks instead of building the
/// doubled-space operator.
pub fn swap_element(
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    d: &[Complex64],
    n_qubits: usize,
    mask: usize,
) -> Complex64 {
    let full = (1usize << n_qubits) - 1;
    let kept = submasks(mask, n_qubits);
    let rest = submasks(full & !mask, n_qubits);
    let k = kept.len();
    // left[j][i] = Σ_r a*(r, j) c(r, i); right[i][j] = Σ_r b*(r, i) d(r, j)
    let mut left = vec![ZERO; k * k];
    let mut right = vec![ZERO; k * k];
    for (j, &sj) in kept.iter().enumerate() {
        for (i, &si) in kept.iter().enumerate() {
            let mut l = ZERO;
            let mut r = ZERO;
            for &x in &rest {
                l += a[x | sj].conj() * c[x | si];
                r += b[x | si].conj() * d[x | sj];
            }
            left[j * k + i] = l;
            right[i * k + j] = r;
        }
    }
    let mut out = ZERO;
    for j in 0..k {
        for i in 0..k {
            out += left[j * k + i] * right[i * k + j];
        }
    }
    out
}

/// `⟨a⊗b|A|c⊗d⟩` with `A = 2^{2-N} Σ_S (1 - SWAP_S)`.
pub fn a_operator_element(
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    d: &[Complex64],
    n_qubits: usize,
) -> Complex64 {
    let direct = inner(a, c) * inner(b, d);
    let mut sum = ZERO;
    for mask in proper_subsets(n_qubits) {
        sum += direct - swap_element(a, b, c, d, n_qubits, mask);
    }
    sum * 2f64.powf(2.0 - n_qubits as f64)
}

/// `C(Φ(α)) = sin 2α`, valid for `α ∈ [0, π/2]`.
pub fn concurrence_family_phi(alpha: f64) -> f64 {
    (2.0 * alpha).sin()
}

/// `C(Ψ(α)) = sin α / √2 · sqrt(5 + 3 cos 2α)`, valid for `α ∈ [0, π]`.
pub fn concurrence_family_psi(alpha: f64) -> f64 {
    alpha.sin() / std::f64::consts::SQRT_2 * (5.0 + 3.0 * (2.0 * alpha).cos()).sqrt()
}

/// Spectral decomposition of a density matrix, largest weight first.
#[derive(Debug, Clone)]
pub struct RhoSpectrum {
    /// Eigenvalues μ_i, descending, all above [`RhoSpectrum::RANK_TOLERANCE`].
    pub weights: Vec<f64>,
    /// Matching normalised eigenvectors.
    pub vectors: Vec<CVector>,
}

impl RhoSpectrum {
    pub const RANK_TOLERANCE: f64 = 1e-12;

    pub fn new(rho: &CMatrix) -> Result<Self> {
        let tr = crate::linalg::trace(rho);
        if !((tr.re - 1.0).abs() <= 1e-10 && tr.im.abs() <= 1e-10) {
            return Err(Error::InvalidInput(format!(
                "density matrix must have unit trace, got {tr}"
            )));
        }
        let eig = Eigh::new(rho)?;
        if eig.values[0] < -QubitDensity::EIGEN_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix has negative eigenvalue {:e}",
                eig.values[0]
            )));
        }
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for k in (0..eig.values.len()).rev() {
            let mu = eig.values[k];
            if mu > Self::RANK_TOLERANCE {
                weights.push(mu);
                vectors.push(eig.vectors.column(k).to_owned());
            }
        }
        Ok(RhoSpectrum { weights, vectors })
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `|χ_i⟩ = √μ_i |φ_i⟩`.
    pub fn subnormalized(&self) -> Vec<Vec<Complex64>> {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(mu, v)| v.iter().map(|z| z * mu.sqrt()).collect())
            .collect()
    }
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim.is_power_of_two() && dim >= 2 {
        let n = dim.trailing_zeros() as usize;
        check_qubit_count(n)?;
        Ok(n)
    } else {
        Err(Error::InvalidInput(format!(
            "dimension {dim} is not a qubit register"
        )))
    }
}

/// Quasi-pure lower bound for a density matrix in computational order.
///
/// With `χ_i = √μ_i φ_i` the weighted eigenvectors, the concurrence operator
/// is projected onto its dominant direction `A|χ₁χ₁⟩`, giving the complex
/// symmetric matrix `τ_jk = ⟨χ₁χ₁|A|χ_jχ_k⟩ / sqrt(⟨χ₁χ₁|A|χ₁χ₁⟩)`. The
/// bound is `max(0, s₁ - Σ_{i≥2} s_i)` over the singular values of `τ`; it
/// reproduces `C(ψ)` for pure states.
pub fn quasipure_bound(rho: &CMatrix, n_qubits: usize) -> Result<f64> {
    if qubits_of_dim(rho.nrows())? != n_qubits {
        return Err(Error::InvalidInput(format!(
            "{n_qubits} qubits need a {}-dimensional density matrix",
            1usize << n_qubits
        )));
    }
    let spectrum = RhoSpectrum::new(rho)?;
    let chis = spectrum.subnormalized();
    let r = chis.len();
    let c1 = &chis[0];
    let norm = a_operator_element(c1, c1, c1, c1, n_qubits).re;
    if norm <= QUASIPURE_ZERO {
        return Ok(0.0);
    }
    let scale = norm.sqrt();
    let mut tau = CMatrix::zeros((r, r));
    for j in 0..r {
        for k in j..r {
            let t = a_operator_element(c1, c1, &chis[j], &chis[k], n_qubits) / scale;
            tau[[j, k]] = t;
            tau[[k, j]] = t;
        }
    }
    let s = singular_values(&tau);
    Ok((s[0] - s[1..].iter().sum::<f64>()).max(0.0))
}

pub fn concurrence_quasipure(rho: &QubitDensity) -> Result<f64> {
    quasipure_bound(&rho.to_computational(), 3)
}

/// Budget of the convex-roof upper-bound search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpperBoundOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Decomposition size is `rank + extra_states`.
    pub extra_states: usize,
}

impl UpperBoundOptions {
    pub fn new(restarts: usize, iterations: usize) -> Self {
        UpperBoundOptions {
            restarts,
            iterations,
            seed: 0,
            extra_states: 2,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Average concurrence `Σ_k p_k C(ψ_k)` of the decomposition
/// `ψ̃_k = Σ_i U_ki χ_i`, `U` the orthonormalised columns of `z`.
struct Decomposition<'a> {
    chis: &'a [Vec<Complex64>],
    n_qubits: usize,
    states: usize,
}

impl Decomposition<'_> {
    fn average(&self, params: &[f64]) -> f64 {
        let r = self.chis.len();
        let k_total = self.states;
        let mut z = CMatrix::from_shape_fn((k_total, r), |(k, i)| {
            let o = 2 * (k * r + i);
            Complex64::new(params[o], params[o + 1])
        });
        if !orthonormalize_columns(&mut z) {
            return f64::INFINITY;
        }
        let dim = self.chis[0].len();
        let mut psi = vec![ZERO; dim];
        let mut total = 0.0;
        for k in 0..k_total {
            psi.iter_mut().for_each(|x| *x = ZERO);
            for i in 0..r {
                let u = z[[k, i]];
                for (p, c) in psi.iter_mut().zip(&self.chis[i]) {
                    *p += u * c;
                }
            }
            total += weighted_concurrence(&psi, self.n_qubits);
        }
        total
    }
}

/// Smallest average pure-state concurrence found over decompositions of
/// `rho` (computational order). Always an upper bound on the convex roof.
///
/// Restart 0 starts from the spectral decomposition; the others from random
/// mixing matrices. Each restart runs normalised gradient descent with
/// central finite-difference gradients and an adaptive step.
pub fn convex_roof_upper_bound(
    rho: &CMatrix,
    n_qubits: usize,
    opts: &UpperBoundOptions,
) -> Result<f64> {
    if opts.restarts == 0 || opts.iterations == 0 {
        return Err(Error::InvalidParameter(format!(
            "restarts and iterations must be positive, got {} and {}",
            opts.restarts, opts.iterations
        )));
    }
    if qubits_of_dim(rho.nrows())? != n_qubits {
        return Err(Error::InvalidInput(format!(
            "{n_qubits} qubits need a {}-dimensional density matrix",
            1usize << n_qubits
        )));
    }
    let spectrum = RhoSpectrum::new(rho)?;
    let chis = spectrum.subnormalized();
    let r = chis.len();
    if r == 1 {
        return Ok(weighted_concurrence(&chis[0], n_qubits));
    }
    let states = r + opts.extra_states;
    let objective = Decomposition {
        chis: &chis,
        n_qubits,
        states,
    };
    let n_params = 2 * states * r;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;

    for restart in 0..opts.restarts {
        let mut x: Vec<f64> = if restart == 0 {
            let mut x = vec![0.0; n_params];
            for i in 0..r {
                x[2 * (i * r + i)] = 1.0;
            }
            x
        } else {
            ginibre(&mut rng, states, r)
                .iter()
                .flat_map(|z| [z.re, z.im])
                .collect()
        };
        let mut fx = objective.average(&x);
        best = best.min(fx);
        let mut step = 0.1;
        let h = 1e-6;
        let mut grad = vec![0.0; n_params];

        for _ in 0..opts.iterations {
            for p in 0..n_params {
                let orig = x[p];
                x[p] = orig + h;
                let up = objective.average(&x);
                x[p] = orig - h;
                let down = objective.average(&x);
                x[p] = orig;
                grad[p] = (up - down) / (2.0 * h);
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(gnorm > 1e-12) {
                break;
            }
            let mut accepted = false;
            while step > 1e-10 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(&grad)
                    .map(|(xi, gi)| xi - step * gi / gnorm)
                    .collect();
                let ft = objective.average(&trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            best = best.min(fx);
            if !accepted {
                break;
            }
        }
    }
    Ok(best)
}

pub fn concurrence_upper_bound(
    rho: &QubitDensity,
    restarts: usize,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    convex_roof_upper_bound(
        &rho.to_computational(),
        3,
        &UpperBoundOptions::new(restarts, iterations).with_seed(seed),
    )
}
