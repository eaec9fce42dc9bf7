//! Physical parameters, excitation-sector bases, operators and initial states.
//!
//! Conventions used throughout the crate:
//!
//! * a three-qubit string is written `i3 i2 i1`: qubit `j` (1-based) is bit
//!   `j - 1` of the binary number, so `|001⟩` has qubit 1 excited and
//!   `|100⟩` qubit 3; in code qubits are 0-based;
//! * `σ_z|1⟩ = |1⟩`, `σ_z|0⟩ = -|0⟩`, `σ_+|0⟩ = |1⟩` (i.e. `σ_± = (σ_x ± iσ_y)/2`);
//! * `a|m⟩ = √m |m-1⟩`; no oscillator free term (interaction picture);
//! * the normalisation of the dipole and Ising pair terms is set by
//!   [`PairSum`].

use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector, ONE, ZERO};
use crate::{Error, Result};

pub const NUM_QUBITS: usize = 3;

/// Unordered qubit pairs, in the storage order of `kappa` and `ising`.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Qubit strings in sector order: `000, 001, 010, 100, 110, 101, 011, 111`.
pub const SECTOR_QUBIT_ORDER: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b110, 0b101, 0b011, 0b111];

/// Largest full-space dimension [`build_full_hamiltonian`] will allocate.
pub const MAX_FULL_DIM: usize = 2048;

#[inline]
pub fn qubit_mask(j: usize) -> u8 {
    debug_assert!(j < NUM_QUBITS);
    1 << j
}

#[inline]
fn is_excited(qubits: u8, j: usize) -> bool {
    qubits & qubit_mask(j) != 0
}

#[inline]
fn sigma_z(qubits: u8, j: usize) -> f64 {
    if is_excited(qubits, j) {
        1.0
    } else {
        -1.0
    }
}

/// Render a qubit string as written in kets, `i3 i2 i1`.
pub fn qubit_label(qubits: u8) -> String {
    format!("{:03b}", qubits & 0b111)
}

/// Position of a qubit string in [`SECTOR_QUBIT_ORDER`].
pub fn sector_order_position(qubits: u8) -> usize {
    SECTOR_QUBIT_ORDER
        .iter()
        .position(|&q| q == qubits)
        .expect("3-bit qubit string")
}

/// Normalisation of the pair terms
/// `2 Σ_{j≠k} κ_jk (σ_-⁽ʲ⁾σ_+⁽ᵏ⁾ + h.c.) + Σ_{j≠k} J_jk σ_z⁽ʲ⁾σ_z⁽ᵏ⁾`.
///
/// | variant     | exchange amplitude | `σ_zσ_z` weight |
/// |-------------|--------------------|-----------------|
/// | `Matrix`    | `κ_jk`             | `J_jk`          |
/// | `Unordered` | `2κ_jk`            | `J_jk`          |
/// | `Ordered`   | `4κ_jk`            | `2J_jk`         |
///
/// `Matrix` reproduces the sector matrices, where `κ_jk` appears directly as
/// the exchange element and each pair contributes one `J_jk σ_zσ_z`.
/// `Ordered` reads both sums literally over ordered pairs; `Unordered`
/// counts each pair once but keeps the factor 2 of the dipole term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSum {
    #[default]
    Matrix,
    Unordered,
    Ordered,
}

impl PairSum {
    /// Exchange amplitude per unit `κ`.
    pub fn hop_multiplier(self) -> f64 {
        match self {
            PairSum::Matrix => 1.0,
            PairSum::Unordered => 2.0,
            PairSum::Ordered => 4.0,
        }
    }

    /// `σ_zσ_z` weight per unit `J`.
    pub fn zz_multiplier(self) -> f64 {
        match self {
            PairSum::Matrix | PairSum::Unordered => 1.0,
            PairSum::Ordered => 2.0,
        }
    }
}

/// All couplings of the three-atom cavity Hamiltonian.
///
/// `kappa` and `ising` are stored once per unordered pair in [`PAIRS`] order:
/// `(1,2), (1,3), (2,3)`. How they enter the Hamiltonian is set by
/// `pair_sum`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta: [f64; 3],
    pub g: [f64; 3],
    pub kappa: [f64; 3],
    pub ising: [f64; 3],
    pub pair_sum: PairSum,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .delta
            .iter()
            .chain(&self.g)
            .chain(&self.kappa)
            .chain(&self.ising);
        if all.into_iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "model parameters must be finite: {self:?}"
            )))
        }
    }

    /// Homogeneous couplings with `Δ = 0`, `g = 1`.
    pub fn homogeneous_with(kappa: f64, ising: f64, pair_sum: PairSum) -> Result<Self> {
        check_finite(&[kappa, ising])?;
        Ok(ModelParams {
            delta: [0.0; 3],
            g: [1.0; 3],
            kappa: [kappa; 3],
            ising: [ising; 3],
            pair_sum,
        })
    }

    /// Homogeneous couplings plus `κ(σ_-⁽¹⁾σ_+⁽²⁾ + h.c.)`, folded into `κ_12`.
    pub fn quasi_homogeneous_with(kappa: f64, ising: f64, pair_sum: PairSum) -> Result<Self> {
        let mut p = Self::homogeneous_with(kappa, ising, pair_sum)?;
        // The extra term adds κ to the (1,2) exchange amplitude.
        p.kappa[0] = kappa + kappa / pair_sum.hop_multiplier();
        Ok(p)
    }

    /// Hopping amplitude between `|..1_j..0_k..⟩` and `|..0_j..1_k..⟩`.
    pub fn hopping(&self, pair: usize) -> f64 {
        self.pair_sum.hop_multiplier() * self.kappa[pair]
    }

    /// Effective `σ_z σ_z` weight of a pair.
    pub fn zz_weight(&self, pair: usize) -> f64 {
        self.pair_sum.zz_multiplier() * self.ising[pair]
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "parameters must be finite, got {xs:?}"
        )))
    }
}

pub fn homogeneous_params(kappa: f64, ising: f64) -> Result<ModelParams> {
    ModelParams::homogeneous_with(kappa, ising, PairSum::default())
}

pub fn quasi_homogeneous_params(kappa: f64, ising: f64) -> Result<ModelParams> {
    ModelParams::quasi_homogeneous_with(kappa, ising, PairSum::default())
}

/// Eigenspace of the total excitation number with eigenvalue `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExcitationSector(pub usize);

impl ExcitationSector {
    pub fn dim(self) -> usize {
        match self.0 {
            0 => 1,
            1 => 4,
            2 => 7,
            _ => 8,
        }
    }
}

/// One product state `|photons⟩ ⊗ |qubits⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub photons: usize,
    pub qubits: u8,
}

impl BasisState {
    pub fn excitations(&self) -> usize {
        self.photons + self.qubits.count_ones() as usize
    }
}

impl std::fmt::Display for BasisState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{}⟩|{}⟩", self.photons, qubit_label(self.qubits))
    }
}

/// Ordered basis of a sector: [`SECTOR_QUBIT_ORDER`] with the photon number
/// fixed by `n`, keeping only non-negative photon numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    sector: ExcitationSector,
    states: Vec<BasisState>,
}

impl SectorBasis {
    pub fn new(n: usize) -> Self {
        let states = SECTOR_QUBIT_ORDER
            .iter()
            .filter_map(|&qubits| {
                let k = qubits.count_ones() as usize;
                (k <= n).then(|| BasisState {
                    photons: n - k,
                    qubits,
                })
            })
            .collect();
        SectorBasis {
            sector: ExcitationSector(n),
            states,
        }
    }

    pub fn sector(&self) -> ExcitationSector {
        self.sector
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the basis state carrying the given qubit string, if present.
    pub fn position(&self, qubits: u8) -> Option<usize> {
        self.states.iter().position(|s| s.qubits == qubits)
    }
}

pub fn build_sector_basis(n: usize) -> SectorBasis {
    SectorBasis::new(n)
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "Hermitian matrix must be square, got {:?}",
                m.dim()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let err = crate::linalg::hermiticity_error(&m);
        if !(err <= Self::TOLERANCE * scale) {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (deviation {err:e})"
            )));
        }
        Ok(HermitianMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

/// Apply every term of the Hamiltonian to `|photons⟩|qubits⟩`, reporting each
/// resulting `(photons', qubits', amplitude)`.
fn apply_hamiltonian(
    p: &ModelParams,
    photons: usize,
    qubits: u8,
    mut emit: impl FnMut(usize, u8, f64),
) {
    // Σ Δ_j/2 σ_z + Σ J σ_z σ_z
    let mut diag = 0.0;
    for j in 0..NUM_QUBITS {
        diag += 0.5 * p.delta[j] * sigma_z(qubits, j);
    }
    for (pair, &(j, k)) in PAIRS.iter().enumerate() {
        diag += p.zz_weight(pair) * sigma_z(qubits, j) * sigma_z(qubits, k);
    }
    if diag != 0.0 {
        emit(photons, qubits, diag);
    }

    // g_j (a σ_+ + a† σ_-)
    for j in 0..NUM_QUBITS {
        if p.g[j] == 0.0 {
            continue;
        }
        let mask = qubit_mask(j);
        if is_excited(qubits, j) {
            let amp = p.g[j] * ((photons + 1) as f64).sqrt();
            emit(photons + 1, qubits & !mask, amp);
        } else if photons > 0 {
            let amp = p.g[j] * (photons as f64).sqrt();
            emit(photons - 1, qubits | mask, amp);
        }
    }

    // Dipole term: exchanges one excitation within a pair.
    for (pair, &(j, k)) in PAIRS.iter().enumerate() {
        let hop = p.hopping(pair);
        if hop != 0.0 && is_excited(qubits, j) != is_excited(qubits, k) {
            emit(photons, qubits ^ qubit_mask(j) ^ qubit_mask(k), hop);
        }
    }
}

/// Hamiltonian restricted to the sector with `n` excitations, in the
/// [`SectorBasis`] order.
pub fn build_hamiltonian(params: &ModelParams, n: usize) -> Result<HermitianMatrix> {
    params.validate()?;
    let basis = SectorBasis::new(n);
    let d = basis.len();
    let mut h = CMatrix::zeros((d, d));
    for (col, s) in basis.states().iter().enumerate() {
        apply_hamiltonian(params, s.photons, s.qubits, |m, q, amp| {
            let row = basis
                .position(q)
                .expect("Hamiltonian conserves the excitation number");
            debug_assert_eq!(basis.states()[row].photons, m);
            h[[row, col]] += amp;
        });
    }
    HermitianMatrix::new(h)
}

/// Index of `|photons⟩|qubits⟩` in the truncated product space used by
/// [`build_full_hamiltonian`] and [`build_number_operator`]:
/// `8·photons + qubits` (qubits as the binary number `i3 i2 i1`).
pub fn full_space_index(photons: usize, qubits: u8) -> usize {
    8 * photons + qubits as usize
}

fn full_dim(n_max: usize) -> Result<usize> {
    match n_max.checked_add(1).and_then(|l| l.checked_mul(8)) {
        Some(d) if d <= MAX_FULL_DIM => Ok(d),
        _ => Err(Error::Resource(format!(
            "oscillator cutoff {n_max} exceeds the full-space dimension cap {MAX_FULL_DIM}"
        ))),
    }
}

/// Hamiltonian on oscillator levels `0..=n_max` ⊗ three qubits. Terms that
/// would leave the truncated space are dropped.
pub fn build_full_hamiltonian(params: &ModelParams, n_max: usize) -> Result<HermitianMatrix> {
    params.validate()?;
    let d = full_dim(n_max)?;
    let mut h = CMatrix::zeros((d, d));
    for photons in 0..=n_max {
        for qubits in 0u8..8 {
            let col = full_space_index(photons, qubits);
            apply_hamiltonian(params, photons, qubits, |m, q, amp| {
                if m <= n_max {
                    h[[full_space_index(m, q), col]] += amp;
                }
            });
        }
    }
    HermitianMatrix::new(h)
}

/// Total excitation number `½Σσ_z + a†a + 3/2` on the truncated product space.
pub fn build_number_operator(n_max: usize) -> Result<HermitianMatrix> {
    let d = full_dim(n_max)?;
    let mut m = CMatrix::zeros((d, d));
    for photons in 0..=n_max {
        for qubits in 0u8..8 {
            let i = full_space_index(photons, qubits);
            m[[i, i]] = Complex64::new((photons + qubits.count_ones() as usize) as f64, 0.0);
        }
    }
    HermitianMatrix::new(m)
}

/// Sub-block of a full-space operator on sector `n`, in [`SectorBasis`] order.
pub fn extract_sector_block(full: &CMatrix, n: usize) -> Result<CMatrix> {
    let basis = SectorBasis::new(n);
    let idx: Vec<usize> = basis
        .states()
        .iter()
        .map(|s| full_space_index(s.photons, s.qubits))
        .collect();
    if idx.iter().any(|&i| i >= full.nrows()) {
        return Err(Error::InvalidInput(format!(
            "sector {n} is not contained in a {}-dimensional full space",
            full.nrows()
        )));
    }
    Ok(CMatrix::from_shape_fn((idx.len(), idx.len()), |(a, b)| {
        full[[idx[a], idx[b]]]
    }))
}

/// Cyclic shift of the written string, `|abc⟩ → |cab⟩`.
pub fn rotate_qubits(qubits: u8) -> u8 {
    ((qubits & 1) << 2) | (qubits >> 1)
}

/// Permutation matrix of the cyclic qubit shift on sector `n`.
pub fn build_rotation_operator(n: usize) -> CMatrix {
    let basis = SectorBasis::new(n);
    let d = basis.len();
    let mut r = CMatrix::zeros((d, d));
    for (col, s) in basis.states().iter().enumerate() {
        let row = basis
            .position(rotate_qubits(s.qubits))
            .expect("rotation preserves the excitation count");
        r[[row, col]] = ONE;
    }
    r
}

/// Projectors onto the eigenspaces of the rotation with eigenvalues
/// `α^k`, `α = exp(2πi/3)`, `k = 0, 1, 2`.
pub fn build_symmetry_projectors(n: usize) -> [HermitianMatrix; 3] {
    let r = build_rotation_operator(n);
    let d = r.nrows();
    let powers = [CMatrix::eye(d), r.clone(), r.dot(&r)];
    std::array::from_fn(|k| {
        let mut p = CMatrix::zeros((d, d));
        for (m, rm) in powers.iter().enumerate() {
            let phase = Complex64::from_polar(
                1.0 / 3.0,
                -2.0 * std::f64::consts::PI * (k * m) as f64 / 3.0,
            );
            p = p + rm.mapv(|z| z * phase);
        }
        HermitianMatrix::new(p).expect("projector is Hermitian")
    })
}

/// Amplitudes of a state inside one excitation sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorVector {
    sector: ExcitationSector,
    amps: CVector,
}

impl SectorVector {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(n: usize, amps: CVector) -> Result<Self> {
        let sector = ExcitationSector(n);
        if amps.len() != sector.dim() {
            return Err(Error::InvalidInput(format!(
                "sector {n} has dimension {}, got {} amplitudes",
                sector.dim(),
                amps.len()
            )));
        }
        let v = SectorVector { sector, amps };
        let norm = v.norm();
        if !((norm - 1.0).abs() <= Self::NORM_TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "state vector must have unit norm, got {norm}"
            )));
        }
        Ok(v)
    }

    pub(crate) fn from_parts_unchecked(sector: ExcitationSector, amps: CVector) -> Self {
        SectorVector { sector, amps }
    }

    pub fn sector(&self) -> ExcitationSector {
        self.sector
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `|n-1⟩ ⊗ (sin α |001⟩ + cos α |010⟩)`
    Phi,
    /// `|n-1⟩ ⊗ (sin α/√2 |001⟩ + cos α |010⟩ + sin α/√2 |100⟩)`
    Psi,
}

/// Angle at which the psi family is the W state: `arctan √2`.
pub fn w_angle() -> f64 {
    std::f64::consts::SQRT_2.atan()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStateSpec {
    pub family: Family,
    pub alpha: f64,
    pub n: usize,
}

impl InitialStateSpec {
    pub fn new(family: Family, alpha: f64, n: usize) -> Result<Self> {
        let spec = InitialStateSpec { family, alpha, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "initial states need at least one excitation (n ≥ 1)".into(),
            ));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

pub fn build_initial_state(spec: &InitialStateSpec) -> Result<SectorVector> {
    spec.validate()?;
    let basis = SectorBasis::new(spec.n);
    let mut amps = CVector::from_elem(basis.len(), ZERO);
    let (s, c) = spec.alpha.sin_cos();
    let mut set = |qubits: u8, value: f64| {
        let i = basis
            .position(qubits)
            .expect("n ≥ 1 holds all single excitations");
        amps[i] = Complex64::new(value, 0.0);
    };
    match spec.family {
        Family::Phi => {
            set(0b001, s);
            set(0b010, c);
        }
        Family::Psi => {
            set(0b001, s / std::f64::consts::SQRT_2);
            set(0b010, c);
            set(0b100, s / std::f64::consts::SQRT_2);
        }
    }
    SectorVector::new(spec.n, amps)
}
