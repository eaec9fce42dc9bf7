//! Concurrence-purity trajectories, envelope comparisons and `(J, t)` scans.

use rayon::prelude::*;

use crate::dynamics::{partial_trace_oscillator, purity, Propagator, QubitDensity};
use crate::entanglement::concurrence_quasipure;
use crate::model::{
    build_hamiltonian, build_initial_state, w_angle, Family, InitialStateSpec, ModelParams, PairSum,
};
use crate::{Error, Result};

/// One sample of a concurrence-purity trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub purity: f64,
    /// Quasi-pure concurrence of the reduced qubit state.
    pub concurrence: f64,
}

/// `steps` equally spaced times from 0 to `t_max` inclusive.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "a grid needs at least 2 points, got {steps}"
        )));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| t_max * i as f64 / last).collect())
}

/// Reduced qubit states along the time grid.
fn reduced_states(
    params: &ModelParams,
    spec: &InitialStateSpec,
    times: &[f64],
) -> Result<Vec<QubitDensity>> {
    let v0 = build_initial_state(spec)?;
    let h = build_hamiltonian(params, spec.n)?;
    let prop = Propagator::new(spec.n, &h)?;
    times
        .iter()
        .map(|&t| Ok(partial_trace_oscillator(&prop.evolve(&v0, t)?)))
        .collect()
}

pub fn cp_trajectory(
    params: &ModelParams,
    spec: &InitialStateSpec,
    t_max: f64,
    steps: usize,
) -> Result<Vec<TrajectoryPoint>> {
    let times = time_grid(t_max, steps)?;
    let states = reduced_states(params, spec, &times)?;
    times
        .iter()
        .zip(&states)
        .map(|(&t, rho)| {
            Ok(TrajectoryPoint {
                t,
                purity: purity(rho),
                concurrence: concurrence_quasipure(rho)?,
            })
        })
        .collect()
}

/// Non-interacting atoms (`κ = J = 0`) starting in the W state.
pub fn red_curve(n: usize, t_max: f64, steps: usize) -> Result<Vec<TrajectoryPoint>> {
    let params = crate::model::homogeneous_params(0.0, 0.0)?;
    let spec = InitialStateSpec::new(Family::Psi, w_angle(), n)?;
    cp_trajectory(&params, &spec, t_max, steps)
}

/// Which side of the reference envelope a trajectory is expected to stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Trajectory concurrence should not exceed the reference maximum.
    Upper,
    /// Trajectory concurrence should not fall below the reference minimum.
    Lower,
}

/// Outcome of [`envelope_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeReport {
    /// Largest signed violation over covered points: `C - C_ref(P)` for an
    /// upper bound, `C_ref(P) - C` for a lower one. Non-positive means the
    /// bound holds everywhere.
    pub max_excess: f64,
    pub covered: usize,
    /// Points whose purity lies outside the reference purity range.
    pub not_covered: usize,
}

pub const ENVELOPE_BINS: usize = 200;

/// Per-bin extreme concurrence of a reference curve over its purity range.
struct Envelope {
    lo: f64,
    width: f64,
    /// `(bin centre, value)` for non-empty bins, ascending.
    nodes: Vec<(f64, f64)>,
    per_bin: Vec<Option<f64>>,
    side: Bound,
}

impl Envelope {
    fn new(reference: &[TrajectoryPoint], side: Bound) -> Self {
        let lo = reference
            .iter()
            .map(|p| p.purity)
            .fold(f64::INFINITY, f64::min);
        let hi = reference
            .iter()
            .map(|p| p.purity)
            .fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / ENVELOPE_BINS as f64;
        let mut per_bin: Vec<Option<f64>> = vec![None; ENVELOPE_BINS];
        let pick = |a: f64, b: f64| match side {
            Bound::Upper => a.max(b),
            Bound::Lower => a.min(b),
        };
        for p in reference {
            let b = Self::bin_index(lo, width, p.purity);
            per_bin[b] = Some(per_bin[b].map_or(p.concurrence, |v| pick(v, p.concurrence)));
        }
        let nodes = per_bin
            .iter()
            .enumerate()
            .filter_map(|(b, v)| v.map(|v| (lo + (b as f64 + 0.5) * width, v)))
            .collect();
        Envelope {
            lo,
            width,
            nodes,
            per_bin,
            side,
        }
    }

    fn bin_index(lo: f64, width: f64, purity: f64) -> usize {
        if width > 0.0 {
            (((purity - lo) / width) as usize).min(ENVELOPE_BINS - 1)
        } else {
            0
        }
    }

    fn covers(&self, purity: f64) -> bool {
        let hi = self.lo + self.width * ENVELOPE_BINS as f64;
        purity >= self.lo && purity <= hi
    }

    /// Interpolated envelope, never tighter than the extreme of the bin the
    /// purity falls into.
    fn value(&self, purity: f64) -> f64 {
        let own = self.per_bin[Self::bin_index(self.lo, self.width, purity)];
        let i = self.nodes.partition_point(|&(c, _)| c < purity);
        let interp = if i == 0 {
            self.nodes[0].1
        } else if i == self.nodes.len() {
            self.nodes[i - 1].1
        } else {
            let (c0, v0) = self.nodes[i - 1];
            let (c1, v1) = self.nodes[i];
            v0 + (v1 - v0) * (purity - c0) / (c1 - c0)
        };
        match (own, self.side) {
            (Some(v), Bound::Upper) => interp.max(v),
            (Some(v), Bound::Lower) => interp.min(v),
            (None, _) => interp,
        }
    }
}

/// Compare a trajectory against the purity-binned envelope of a reference
/// curve (200 bins, linear interpolation between bin centres).
pub fn envelope_check(
    trajectory: &[TrajectoryPoint],
    reference: &[TrajectoryPoint],
    side: Bound,
) -> Result<EnvelopeReport> {
    if trajectory.is_empty() || reference.is_empty() {
        return Err(Error::InvalidInput("trajectories must be nonempty".into()));
    }
    let env = Envelope::new(reference, side);
    let mut report = EnvelopeReport {
        max_excess: f64::NEG_INFINITY,
        covered: 0,
        not_covered: 0,
    };
    for p in trajectory {
        if !env.covers(p.purity) {
            report.not_covered += 1;
            continue;
        }
        report.covered += 1;
        let r = env.value(p.purity);
        let excess = match side {
            Bound::Upper => p.concurrence - r,
            Bound::Lower => r - p.concurrence,
        };
        report.max_excess = report.max_excess.max(excess);
    }
    Ok(report)
}

/// Which Hamiltonian family a scan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Homogeneous,
    QuasiHomogeneous,
}

impl ModelKind {
    pub fn params(self, kappa: f64, ising: f64, pair_sum: PairSum) -> Result<ModelParams> {
        match self {
            ModelKind::Homogeneous => ModelParams::homogeneous_with(kappa, ising, pair_sum),
            ModelKind::QuasiHomogeneous => {
                ModelParams::quasi_homogeneous_with(kappa, ising, pair_sum)
            }
        }
    }
}

/// Configuration of a `(J, t)` density scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub kappa: f64,
    pub model: ModelKind,
    pub pair_sum: PairSum,
    pub j_min: f64,
    pub j_max: f64,
    pub j_steps: usize,
    pub t_max: f64,
    pub t_steps: usize,
    pub spec: InitialStateSpec,
    /// Also fill the (more expensive) concurrence layer.
    pub concurrence: bool,
}

impl ScanConfig {
    /// Defaults: `J ∈ [0, 2]` with 201 points, `t ∈ [0, 20]` with 401 points,
    /// purity only.
    pub fn new(kappa: f64, model: ModelKind, spec: InitialStateSpec) -> Self {
        ScanConfig {
            kappa,
            model,
            pair_sum: PairSum::default(),
            j_min: 0.0,
            j_max: 2.0,
            j_steps: 201,
            t_max: 20.0,
            t_steps: 401,
            spec,
            concurrence: false,
        }
    }

    pub fn j_values(&self) -> Result<Vec<f64>> {
        if self.j_steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "J grid needs at least 2 points, got {}",
                self.j_steps
            )));
        }
        if !(self.j_min.is_finite() && self.j_max.is_finite() && self.j_max > self.j_min) {
            return Err(Error::InvalidParameter(format!(
                "J range must be finite and increasing, got [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        let last = (self.j_steps - 1) as f64;
        Ok((0..self.j_steps)
            .map(|i| self.j_min + (self.j_max - self.j_min) * i as f64 / last)
            .collect())
    }
}

/// Purity (and optionally concurrence) over a `(J, t)` grid, stored
/// row-major with `J` as the slow index: `value[j * t_values.len() + t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub j_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub purity: Vec<f64>,
    pub concurrence: Option<Vec<f64>>,
}

impl ScanGrid {
    pub fn purity_row(&self, j_index: usize) -> &[f64] {
        let nt = self.t_values.len();
        &self.purity[j_index * nt..(j_index + 1) * nt]
    }
}

/// Run one trajectory per `J`. Columns are independent and evaluated in
/// parallel on the current rayon pool; results do not depend on the order.
pub fn density_scan(config: &ScanConfig) -> Result<ScanGrid> {
    let j_values = config.j_values()?;
    let t_values = time_grid(config.t_max, config.t_steps)?;
    config.spec.validate()?;

    let columns: Vec<(Vec<f64>, Option<Vec<f64>>)> = j_values
        .par_iter()
        .map(|&j| {
            let params = config.model.params(config.kappa, j, config.pair_sum)?;
            let states = reduced_states(&params, &config.spec, &t_values)?;
            let p: Vec<f64> = states.iter().map(purity).collect();
            let c = if config.concurrence {
                Some(
                    states
                        .iter()
                        .map(concurrence_quasipure)
                        .collect::<Result<Vec<f64>>>()?,
                )
            } else {
                None
            };
            Ok((p, c))
        })
        .collect::<Result<_>>()?;

    let mut purity_layer = Vec::with_capacity(j_values.len() * t_values.len());
    let mut conc_layer = config
        .concurrence
        .then(|| Vec::with_capacity(j_values.len() * t_values.len()));
    for (p, c) in columns {
        purity_layer.extend(p);
        if let (Some(layer), Some(c)) = (conc_layer.as_mut(), c) {
            layer.extend(c);
        }
    }
    Ok(ScanGrid {
        j_values,
        t_values,
        purity: purity_layer,
        concurrence: conc_layer,
    })
}

/// Time variance of purity at each `J`, minus the mean variance over the top
/// decile of `J` values.
pub fn critical_profile(grid: &ScanGrid) -> Result<Vec<f64>> {
    let nj = grid.j_values.len();
    let nt = grid.t_values.len();
    if nj < 2 || nt < 2 || grid.purity.len() != nj * nt {
        return Err(Error::InvalidInput(format!(
            "purity layer has {} entries for a {nj}×{nt} grid",
            grid.purity.len()
        )));
    }
    let variances: Vec<f64> = (0..nj)
        .map(|j| {
            let row = grid.purity_row(j);
            let mean = row.iter().sum::<f64>() / nt as f64;
            row.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / nt as f64
        })
        .collect();
    let top = (nj / 10).max(1);
    let baseline = variances[nj - top..].iter().sum::<f64>() / top as f64;
    Ok(variances.iter().map(|v| v - baseline).collect())
}

/// `J` at which [`critical_profile`] peaks.
pub fn critical_j(grid: &ScanGrid) -> Result<f64> {
    let profile = critical_profile(grid)?;
    let (idx, peak) = argmax(&profile);
    if !(peak > 1e-12) {
        return Err(Error::NoFeature(
            "purity variance never rises above its large-J baseline".into(),
        ));
    }
    Ok(grid.j_values[idx])
}

/// Width of the `J` interval over which [`critical_profile`] exceeds half
/// its peak (from the first to the last such grid point).
pub fn critical_extent(grid: &ScanGrid) -> Result<f64> {
    let profile = critical_profile(grid)?;
    let (_, peak) = argmax(&profile);
    if !(peak > 1e-12) {
        return Err(Error::NoFeature(
            "purity variance never rises above its large-J baseline".into(),
        ));
    }
    let above: Vec<usize> = (0..profile.len())
        .filter(|&i| profile[i] > 0.5 * peak)
        .collect();
    let first = *above.first().expect("peak exceeds half of itself");
    let last = *above.last().expect("peak exceeds half of itself");
    Ok(grid.j_values[last] - grid.j_values[first])
}

fn argmax(xs: &[f64]) -> (usize, f64) {
    xs.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn point(purity: f64, concurrence: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            t: 0.0,
            purity,
            concurrence,
        }
    }

    #[test]
    fn time_grid_endpoints() {
        let t = time_grid(2.0, 5).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(time_grid(1.0, 1).is_err());
        assert!(time_grid(0.0, 3).is_err());
        assert!(time_grid(f64::NAN, 3).is_err());
    }

    #[test]
    fn red_curve_analytics() {
        let s3 = 3f64.sqrt();
        let r = red_curve(1, PI / s3, 101).unwrap();
        assert_eq!(r[0].t, 0.0);
        assert!((r[0].purity - 1.0).abs() < 1e-12);
        assert!((r[0].concurrence - 2.0 / s3).abs() < 1e-12);
        for p in &r {
            let (c, s) = ((s3 * p.t).cos(), (s3 * p.t).sin());
            assert!((p.purity - (c.powi(4) + s.powi(4))).abs() < 1e-9);
        }
        // Period π/√3: back to the W state.
        let last = r.last().unwrap();
        assert!((last.purity - 1.0).abs() < 1e-9);
        assert!((last.concurrence - 2.0 / s3).abs() < 1e-8);
        // At half period the excitation sits in the cavity.
        let mid = &r[50];
        assert!((mid.purity - 1.0).abs() < 1e-9 && mid.concurrence < 1e-8);
        let quarter = &r[25];
        assert!((quarter.purity - 0.5).abs() < 1e-9);
    }

    #[test]
    fn envelope_of_itself() {
        let r = red_curve(1, 20.0, 2001).unwrap();
        for side in [Bound::Upper, Bound::Lower] {
            let rep = envelope_check(&r, &r, side).unwrap();
            assert!(rep.max_excess <= 1e-12, "{side:?}: {}", rep.max_excess);
            assert_eq!(rep.not_covered, 0);
        }
    }

    #[test]
    fn envelope_flags_violations_and_coverage() {
        let reference = vec![point(0.5, 0.2), point(1.0, 0.4)];
        let traj = vec![point(0.75, 0.5), point(0.2, 0.0)];
        let up = envelope_check(&traj, &reference, Bound::Upper).unwrap();
        assert_eq!((up.covered, up.not_covered), (1, 1));
        assert!(up.max_excess > 0.05);
        let below = vec![point(0.75, 0.1)];
        assert!(
            envelope_check(&below, &reference, Bound::Upper)
                .unwrap()
                .max_excess
                < 0.0
        );
        assert!(
            envelope_check(&below, &reference, Bound::Lower)
                .unwrap()
                .max_excess
                > 0.0
        );
        assert!(envelope_check(&[], &reference, Bound::Upper).is_err());
    }

    fn small_config() -> ScanConfig {
        let spec = InitialStateSpec::new(Family::Phi, FRAC_PI_4, 2).unwrap();
        let mut cfg = ScanConfig::new(1.0, ModelKind::Homogeneous, spec);
        cfg.j_steps = 5;
        cfg.t_steps = 7;
        cfg.t_max = 3.0;
        cfg.concurrence = true;
        cfg
    }

    #[test]
    fn scan_shape_and_first_column() {
        let cfg = small_config();
        let grid = density_scan(&cfg).unwrap();
        assert_eq!(grid.j_values.len(), 5);
        assert_eq!(grid.t_values.len(), 7);
        assert_eq!(grid.purity.len(), 35);
        assert_eq!(grid.concurrence.as_ref().unwrap().len(), 35);

        let params = ModelParams::homogeneous_with(1.0, 0.0, cfg.pair_sum).unwrap();
        let traj = cp_trajectory(&params, &cfg.spec, cfg.t_max, cfg.t_steps).unwrap();
        let conc = grid.concurrence.as_ref().unwrap();
        for (i, p) in traj.iter().enumerate() {
            assert!((grid.purity[i] - p.purity).abs() < 1e-12);
            assert!((conc[i] - p.concurrence).abs() < 1e-12);
        }
        assert_eq!(density_scan(&cfg).unwrap(), grid);
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let mut cfg = small_config();
        cfg.j_steps = 1;
        assert!(density_scan(&cfg).is_err());
        let mut cfg = small_config();
        cfg.j_max = cfg.j_min;
        assert!(density_scan(&cfg).is_err());
    }

    fn synthetic(rows: &[&[f64]]) -> ScanGrid {
        ScanGrid {
            j_values: (0..rows.len()).map(|i| i as f64 * 0.5).collect(),
            t_values: (0..rows[0].len()).map(|i| i as f64).collect(),
            purity: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            concurrence: None,
        }
    }

    #[test]
    fn critical_statistics_on_synthetic_grid() {
        let flat: &[f64] = &[1.0, 1.0, 1.0, 1.0];
        let bump: &[f64] = &[1.0, 0.4, 1.0, 0.4];
        let half: &[f64] = &[1.0, 0.5, 1.0, 0.5];
        let small: &[f64] = &[1.0, 0.9, 1.0, 0.9];
        let grid = synthetic(&[flat, small, half, bump, half, flat, flat, flat, flat, flat]);
        assert_eq!(critical_j(&grid).unwrap(), 1.5);
        assert_eq!(critical_extent(&grid).unwrap(), 1.0);

        let constant = synthetic(&[flat; 10]);
        assert!(matches!(critical_j(&constant), Err(Error::NoFeature(_))));
        assert!(matches!(
            critical_extent(&constant),
            Err(Error::NoFeature(_))
        ));
    }
}
