//! Spectral time evolution inside a sector, oscillator partial trace, purity.

use ndarray::Array1;
use num_complex::Complex64;

use crate::linalg::{CMatrix, CVector, Eigh, ZERO};
use crate::model::{
    sector_order_position, ExcitationSector, HermitianMatrix, SectorBasis, SectorVector,
    SECTOR_QUBIT_ORDER,
};
use crate::{Error, Result};

/// Eigendecomposition of a sector Hamiltonian, ready to produce `e^{-iHt}`.
#[derive(Debug, Clone)]
pub struct Propagator {
    sector: ExcitationSector,
    energies: Array1<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(n: usize, h: &HermitianMatrix) -> Result<Self> {
        let sector = ExcitationSector(n);
        if h.dim() != sector.dim() {
            return Err(Error::InvalidInput(format!(
                "sector {n} has dimension {}, Hamiltonian is {}×{}",
                sector.dim(),
                h.dim(),
                h.dim()
            )));
        }
        let eig = Eigh::new(h.matrix())?;
        Ok(Propagator {
            sector,
            energies: eig.values,
            vectors: eig.vectors,
        })
    }

    pub fn sector(&self) -> ExcitationSector {
        self.sector
    }

    /// Eigenvalues in ascending order.
    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// `V e^{-iΛt} V† v0`.
    pub fn evolve(&self, v0: &SectorVector, t: f64) -> Result<SectorVector> {
        if v0.sector() != self.sector {
            return Err(Error::InvalidInput(format!(
                "state lives in sector {}, propagator in sector {}",
                v0.sector().0,
                self.sector.0
            )));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time must be finite, got {t}"
            )));
        }
        let d = self.energies.len();
        let amps = v0.amplitudes();
        let mut out = CVector::from_elem(d, ZERO);
        for k in 0..d {
            let mut proj = ZERO;
            for i in 0..d {
                proj += self.vectors[[i, k]].conj() * amps[i];
            }
            let c = proj * Complex64::from_polar(1.0, -self.energies[k] * t);
            for i in 0..d {
                out[i] += self.vectors[[i, k]] * c;
            }
        }
        Ok(SectorVector::from_parts_unchecked(self.sector, out))
    }
}

/// Convenience wrapper: eigendecompose `h` for sector `n`.
pub fn diagonalize(n: usize, h: &HermitianMatrix) -> Result<Propagator> {
    Propagator::new(n, h)
}

/// Reduced state of the three qubits, indexed in sector order
/// `000, 001, 010, 100, 110, 101, 011, 111`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensity(CMatrix);

impl QubitDensity {
    pub const TOLERANCE: f64 = 1e-10;
    /// Negative eigenvalues above `-EIGEN_FLOOR` are treated as rounding.
    pub const EIGEN_FLOOR: f64 = 1e-9;

    /// Validate an 8×8 matrix in sector order.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() != (8, 8) {
            return Err(Error::InvalidInput(format!(
                "qubit density must be 8×8, got {:?}",
                m.dim()
            )));
        }
        let herr = crate::linalg::hermiticity_error(&m);
        if !(herr <= Self::TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "density matrix is not Hermitian (deviation {herr:e})"
            )));
        }
        let tr = crate::linalg::trace(&m);
        if !((tr.re - 1.0).abs() <= Self::TOLERANCE && tr.im.abs() <= Self::TOLERANCE) {
            return Err(Error::InvalidInput(format!(
                "density matrix must have unit trace, got {tr}"
            )));
        }
        let min = Eigh::new(&m)?.values[0];
        if min < -Self::EIGEN_FLOOR {
            return Err(Error::InvalidInput(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(QubitDensity(m))
    }

    /// Validate a matrix given in the computational order (the ket string `i3 i2 i1` as a binary index).
    pub fn from_computational(m: &CMatrix) -> Result<Self> {
        if m.dim() != (8, 8) {
            return Err(Error::InvalidInput(format!(
                "qubit density must be 8×8, got {:?}",
                m.dim()
            )));
        }
        let reordered = CMatrix::from_shape_fn((8, 8), |(a, b)| {
            m[[
                SECTOR_QUBIT_ORDER[a] as usize,
                SECTOR_QUBIT_ORDER[b] as usize,
            ]]
        });
        Self::new(reordered)
    }

    /// Projector onto a pure state given in computational order.
    pub fn from_pure_computational(amps: &CVector) -> Result<Self> {
        if amps.len() != 8 {
            return Err(Error::InvalidInput(format!(
                "three-qubit state needs 8 amplitudes, got {}",
                amps.len()
            )));
        }
        let m = CMatrix::from_shape_fn((8, 8), |(i, j)| amps[i] * amps[j].conj());
        Self::from_computational(&m)
    }

    /// Matrix in sector order.
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Matrix in the computational order (the ket string `i3 i2 i1` as a binary index).
    pub fn to_computational(&self) -> CMatrix {
        CMatrix::from_shape_fn((8, 8), |(x, y)| {
            self.0[[
                sector_order_position(x as u8),
                sector_order_position(y as u8),
            ]]
        })
    }
}

/// `ρ_qubits[b, b'] = Σ_m ⟨m,b|ψ⟩⟨ψ|m,b'⟩` for a pure sector state.
///
/// Within one sector the photon number is fixed by the qubit string, so only
/// strings with equal excitation count keep a cross term.
pub fn partial_trace_oscillator(v: &SectorVector) -> QubitDensity {
    let basis = SectorBasis::new(v.sector().0);
    let amps = v.amplitudes();
    let mut rho = CMatrix::zeros((8, 8));
    for (a, sa) in basis.states().iter().enumerate() {
        let ia = sector_order_position(sa.qubits);
        for (b, sb) in basis.states().iter().enumerate() {
            if sa.photons == sb.photons {
                let ib = sector_order_position(sb.qubits);
                rho[[ia, ib]] = amps[a] * amps[b].conj();
            }
        }
    }
    QubitDensity(rho)
}

/// Partial trace of a sector density matrix (in [`SectorBasis`] order).
pub fn partial_trace_sector_density(n: usize, rho: &CMatrix) -> Result<QubitDensity> {
    let basis = SectorBasis::new(n);
    let d = basis.len();
    if rho.dim() != (d, d) {
        return Err(Error::InvalidInput(format!(
            "sector {n} density must be {d}×{d}, got {:?}",
            rho.dim()
        )));
    }
    let mut out = CMatrix::zeros((8, 8));
    for (a, sa) in basis.states().iter().enumerate() {
        for (b, sb) in basis.states().iter().enumerate() {
            if sa.photons == sb.photons {
                out[[
                    sector_order_position(sa.qubits),
                    sector_order_position(sb.qubits),
                ]] = rho[[a, b]];
            }
        }
    }
    QubitDensity::new(out)
}

/// `tr ρ²`.
pub fn purity(rho: &QubitDensity) -> f64 {
    // tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ.
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, ONE};
    use crate::model::{
        build_hamiltonian, build_initial_state, homogeneous_params, w_angle, Family,
        InitialStateSpec,
    };

    fn sqrt3() -> f64 {
        3f64.sqrt()
    }

    fn w_spec() -> InitialStateSpec {
        InitialStateSpec::new(Family::Psi, w_angle(), 1).unwrap()
    }

    #[test]
    fn free_block_spectrum() {
        let h = build_hamiltonian(&homogeneous_params(0.0, 0.0).unwrap(), 1).unwrap();
        let p = Propagator::new(1, &h).unwrap();
        let e = p.energies();
        let expected = [-sqrt3(), 0.0, 0.0, sqrt3()];
        for (a, b) in e.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn evolution_trivial_cases() {
        let v0 = build_initial_state(&w_spec()).unwrap();
        let h = build_hamiltonian(&homogeneous_params(1.0, 0.5).unwrap(), 1).unwrap();
        let p = Propagator::new(1, &h).unwrap();
        let v = p.evolve(&v0, 0.0).unwrap();
        assert!(v
            .amplitudes()
            .iter()
            .zip(v0.amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-14));

        let zero = HermitianMatrix::new(CMatrix::zeros((4, 4))).unwrap();
        let p = Propagator::new(1, &zero).unwrap();
        let v = p.evolve(&v0, 12.5).unwrap();
        assert_eq!(v.amplitudes(), v0.amplitudes());
    }

    #[test]
    fn sector_mismatch_rejected() {
        let h = build_hamiltonian(&homogeneous_params(1.0, 0.5).unwrap(), 2).unwrap();
        let p = Propagator::new(2, &h).unwrap();
        let v0 = build_initial_state(&w_spec()).unwrap();
        assert!(matches!(p.evolve(&v0, 1.0), Err(Error::InvalidInput(_))));
        assert!(Propagator::new(1, &h).is_err());
    }

    #[test]
    fn w_state_two_level_oscillation() {
        let h = build_hamiltonian(&homogeneous_params(0.0, 0.0).unwrap(), 1).unwrap();
        let p = Propagator::new(1, &h).unwrap();
        let v0 = build_initial_state(&w_spec()).unwrap();
        let third = 1.0 / sqrt3();
        for k in 0..50 {
            let t = 0.173 * k as f64;
            let (s, c) = (sqrt3() * t).sin_cos();
            let v = p.evolve(&v0, t).unwrap();
            let a = v.amplitudes();
            assert!((a[0] - Complex64::new(0.0, -s)).norm() < 1e-10);
            for i in 1..4 {
                assert!((a[i] - Complex64::new(c * third, 0.0)).norm() < 1e-10);
            }

            let rho = partial_trace_oscillator(&v);
            let mut expected = CMatrix::zeros((8, 8));
            expected[[0, 0]] = Complex64::new(s * s, 0.0);
            for i in 1..4 {
                for j in 1..4 {
                    expected[[i, j]] = Complex64::new(c * c / 3.0, 0.0);
                }
            }
            assert!(max_abs_diff(rho.matrix(), &expected) < 1e-10);
            let p4 = c.powi(4) + s.powi(4);
            assert!((purity(&rho) - p4).abs() < 1e-10);
        }
    }

    #[test]
    fn product_state_traces_to_pure_projector() {
        let v = build_initial_state(&InitialStateSpec::new(Family::Phi, 0.4, 3).unwrap()).unwrap();
        let rho = partial_trace_oscillator(&v);
        assert!((purity(&rho) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn different_photon_numbers_do_not_interfere() {
        let (c0, c1) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let v = SectorVector::new(1, CVector::from(vec![c0, c1, ZERO, ZERO])).unwrap();
        let rho = partial_trace_oscillator(&v);
        let mut expected = CMatrix::zeros((8, 8));
        expected[[0, 0]] = Complex64::new(0.36, 0.0);
        expected[[1, 1]] = Complex64::new(0.64, 0.0);
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn sector_density_partial_trace() {
        // Mixture of two sector-3 basis states with a coherence between
        // states of equal photon number.
        let mut rho = CMatrix::zeros((8, 8));
        rho[[1, 1]] = Complex64::new(0.5, 0.0);
        rho[[2, 2]] = Complex64::new(0.5, 0.0);
        rho[[1, 2]] = Complex64::new(0.0, 0.25);
        rho[[2, 1]] = Complex64::new(0.0, -0.25);
        let q = partial_trace_sector_density(3, &rho).unwrap();
        assert_eq!(q.matrix(), &rho);
        assert!((purity(&q) - 0.625).abs() < 1e-15);
        assert!(partial_trace_sector_density(2, &rho).is_err());
    }

    #[test]
    fn purity_bounds() {
        let mixed = CMatrix::eye(8).mapv(|z| z / 8.0);
        let q = QubitDensity::new(mixed).unwrap();
        assert!((purity(&q) - 0.125).abs() < 1e-15);

        let mut pure = CMatrix::zeros((8, 8));
        pure[[5, 5]] = ONE;
        assert_eq!(purity(&QubitDensity::new(pure).unwrap()), 1.0);

        let theta: f64 = 0.7;
        let (s, c) = theta.sin_cos();
        let mut m = CMatrix::zeros((8, 8));
        m[[0, 0]] = Complex64::new(s * s, 0.0);
        for i in 1..4 {
            for j in 1..4 {
                m[[i, j]] = Complex64::new(c * c / 3.0, 0.0);
            }
        }
        let q = QubitDensity::new(m).unwrap();
        assert!((purity(&q) - (c.powi(4) + s.powi(4))).abs() < 1e-14);
    }

    #[test]
    fn invalid_densities_rejected() {
        assert!(QubitDensity::new(CMatrix::eye(8)).is_err());
        let mut m = CMatrix::zeros((8, 8));
        m[[0, 0]] = Complex64::new(1.5, 0.0);
        m[[1, 1]] = Complex64::new(-0.5, 0.0);
        assert!(QubitDensity::new(m).is_err());
        assert!(QubitDensity::new(CMatrix::eye(4)).is_err());
    }

    #[test]
    fn computational_reordering_round_trip() {
        let amps = CVector::from_shape_fn(8, |i| Complex64::new(i as f64, 1.0));
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps = amps.mapv(|z| z / norm);
        let q = QubitDensity::from_pure_computational(&amps).unwrap();
        // Sector index 3 is |100⟩ = binary 4.
        assert!((q.matrix()[[3, 3]] - amps[4] * amps[4].conj()).norm() < 1e-15);
        let back = q.to_computational();
        let direct = CMatrix::from_shape_fn((8, 8), |(i, j)| amps[i] * amps[j].conj());
        assert!(max_abs_diff(&back, &direct) < 1e-15);
    }
}
