//! Real-steering-vector (RSV) dictionary construction.
//!
//! An auxiliary narrowband source is swept over a uniform angular grid; the
//! spectral peak of each received sweep is stored as a dictionary column.
//! Because the columns are measured through the array front end, per-antenna
//! amplitude-phase errors are absorbed into the basis. Normalizing every
//! column by its reference-antenna entry removes the auxiliary source's
//! complex amplitude, leaving exactly the corrupted steering vectors.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::array::{corrupted_steering_unchecked, synthesize_from_steering, ArrayConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::dft_all_antennas;

/// Uniform angular grid `theta_n = -pi/2 + n*pi/N` for `n = 1..N`.
///
/// Grid indices are 1-based throughout the public API; position `i` in the
/// angle slice holds index `n = i + 1`. The last point is exactly +pi/2.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    angles: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("grid needs at least one angle".into()));
        }
        let angles = (1..=n)
            .map(|k| -PI / 2.0 + k as f64 * PI / n as f64)
            .collect();
        Ok(Self { angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angles in radians, ascending; position `i` holds grid index `i + 1`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Angle at 1-based grid index `n`.
    pub fn angle_of(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidInput(format!(
                "grid index {n} outside [1, {}]",
                self.len()
            )));
        }
        Ok(self.angles[n - 1])
    }

    /// Grid spacing pi/N in radians.
    pub fn step(&self) -> f64 {
        PI / self.len() as f64
    }

    /// 1-based index of the grid angle nearest to `theta`.
    pub fn nearest_index(&self, theta: f64) -> usize {
        let n = self.len() as f64;
        let raw = ((theta + PI / 2.0) * n / PI).round();
        (raw.clamp(1.0, n)) as usize
    }
}

/// M x N dictionary of measured (or ideal) steering vectors over a grid.
#[derive(Debug, Clone)]
pub struct RsvBasis {
    pub matrix: Array2<Complex64>,
    pub grid: AngularGrid,
    pub normalized: bool,
}

impl RsvBasis {
    pub fn num_antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_atoms(&self) -> usize {
        self.matrix.ncols()
    }

    /// Dictionary column nearest to `theta`, as an owned vector.
    pub fn steering_at(&self, theta: f64) -> Array1<Complex64> {
        let n = self.grid.nearest_index(theta);
        self.matrix.column(n - 1).to_owned()
    }
}

/// Auxiliary-sweep parameters. Defaults: peak bin 16, 512-snapshot windows,
/// 30 dB sweep SNR, one pass per angle.
#[derive(Debug, Clone)]
pub struct SweepParams {
    /// DFT bin (1-based) carrying the auxiliary tone.
    pub aux_bin: usize,
    /// Snapshot window length per sweep angle.
    pub num_snapshots: usize,
    /// Sweep SNR in dB; `f64::INFINITY` disables sweep noise.
    pub snr_db: f64,
    /// Number of sweep passes per angle; peak columns are averaged.
    pub repeats: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            aux_bin: 16,
            num_snapshots: 512,
            snr_db: 30.0,
            repeats: 1,
        }
    }
}

/// Sweeps the auxiliary source over the grid and collects the spectral-peak
/// column for each angle into an unnormalized basis. Deterministic given
/// `seed`; each grid angle draws noise from its own derived sub-stream, so
/// the sweep parallelizes without affecting results.
pub fn sweep_and_build(
    config: &ArrayConfig,
    grid: &AngularGrid,
    params: &SweepParams,
    seed: u64,
) -> Result<RsvBasis> {
    if params.aux_bin == 0 || params.aux_bin > params.num_snapshots {
        return Err(Error::InvalidInput(format!(
            "auxiliary bin {} outside [1, {}]",
            params.aux_bin, params.num_snapshots
        )));
    }
    if params.repeats == 0 {
        return Err(Error::InvalidInput("sweep repeats must be at least 1".into()));
    }
    if grid.len() < config.num_antennas() {
        log::warn!(
            "grid size {} below antenna count {}; dictionary is narrower than the measurement",
            grid.len(),
            config.num_antennas()
        );
    }

    let m = config.num_antennas();
    let amp = [Complex64::new(1.0, 0.0)];
    let bins = [params.aux_bin];
    let variance = crate::array::noise_variance_for_snr(1.0, params.snr_db);

    let columns: Vec<Array1<Complex64>> = grid
        .angles()
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let steering = [corrupted_steering_unchecked(config, theta)];
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            let mut acc = Array1::<Complex64>::zeros(m);
            for _ in 0..params.repeats {
                let data = synthesize_from_steering(
                    &steering,
                    &amp,
                    &bins,
                    params.num_snapshots,
                    variance,
                    &mut rng,
                );
                let spec = dft_all_antennas(&crate::array::SnapshotMatrix { data });
                acc += &spec.column(params.aux_bin).expect("bin validated");
            }
            acc.mapv_into(|x| x / params.repeats as f64)
        })
        .collect();

    let mut matrix = Array2::<Complex64>::zeros((m, grid.len()));
    for (i, col) in columns.iter().enumerate() {
        matrix.column_mut(i).assign(col);
    }
    Ok(RsvBasis {
        matrix,
        grid: grid.clone(),
        normalized: false,
    })
}

/// Divides every column by its reference-antenna entry, making row 1 all
/// ones. Idempotent; fails naming the grid angle whose reference entry is
/// smaller than 1e-12 in magnitude.
pub fn normalize(basis: RsvBasis) -> Result<RsvBasis> {
    if basis.normalized {
        return Ok(basis);
    }
    let mut matrix = basis.matrix;
    for (i, mut col) in matrix.columns_mut().into_iter().enumerate() {
        let first = col[0];
        if first.norm() < 1e-12 {
            return Err(Error::NormalizationFailure {
                angle_deg: basis.grid.angles()[i].to_degrees(),
                magnitude: first.norm(),
            });
        }
        col.mapv_inplace(|x| x / first);
    }
    Ok(RsvBasis {
        matrix,
        grid: basis.grid,
        normalized: true,
    })
}

/// Error-free dictionary of ideal steering vectors over the grid; the
/// uncalibrated baseline. Normalized by construction.
pub fn nominal_basis(config: &ArrayConfig, grid: &AngularGrid) -> RsvBasis {
    let ideal = config.error_free();
    let mut matrix = Array2::<Complex64>::zeros((config.num_antennas(), grid.len()));
    for (i, &theta) in grid.angles().iter().enumerate() {
        matrix
            .column_mut(i)
            .assign(&crate::array::steering_unchecked(&ideal, theta));
    }
    RsvBasis {
        matrix,
        grid: grid.clone(),
        normalized: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ErrorModel;
    use approx::assert_abs_diff_eq;

    fn random_array(m: usize, seed: u64) -> ArrayConfig {
        let mut rng = rng_from_seed(seed);
        let errors = ErrorModel::random(m, 1.0, 0.1, 10f64.to_radians(), &mut rng);
        ArrayConfig::half_wavelength(m, 1.0, errors).unwrap()
    }

    #[test]
    fn grid_spans_the_half_circle() {
        let grid = AngularGrid::new(180).unwrap();
        assert_eq!(grid.len(), 180);
        assert_abs_diff_eq!(grid.angle_of(1).unwrap(), -PI / 2.0 + PI / 180.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grid.angle_of(180).unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.step(), PI / 180.0, epsilon = 1e-15);
        for w in grid.angles().windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn nearest_index_round_trips_grid_angles() {
        let grid = AngularGrid::new(900).unwrap();
        for n in [1usize, 250, 610, 899, 900] {
            let theta = grid.angle_of(n).unwrap();
            assert_eq!(grid.nearest_index(theta), n);
        }
        // -40 deg and 20 deg land on exact indices of the 0.2-deg grid
        assert_eq!(grid.nearest_index(-40f64.to_radians()), 250);
        assert_eq!(grid.nearest_index(20f64.to_radians()), 550);
    }

    #[test]
    fn noiseless_sweep_columns_are_l_times_corrupted_steering() {
        let config = random_array(4, 8);
        let grid = AngularGrid::new(30).unwrap();
        let params = SweepParams {
            aux_bin: 5,
            num_snapshots: 64,
            snr_db: f64::INFINITY,
            repeats: 1,
        };
        let basis = sweep_and_build(&config, &grid, &params, 0).unwrap();
        for (i, &theta) in grid.angles().iter().enumerate() {
            let want = corrupted_steering_unchecked(&config, theta);
            for (got, &w) in basis.matrix.column(i).iter().zip(want.iter()) {
                let w = w * 64.0;
                assert_abs_diff_eq!(got.re, w.re, epsilon = 1e-9);
                assert_abs_diff_eq!(got.im, w.im, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_per_seed() {
        let config = random_array(4, 1);
        let grid = AngularGrid::new(16).unwrap();
        let params = SweepParams {
            aux_bin: 3,
            num_snapshots: 32,
            snr_db: 20.0,
            repeats: 2,
        };
        let a = sweep_and_build(&config, &grid, &params, 42).unwrap();
        let b = sweep_and_build(&config, &grid, &params, 42).unwrap();
        assert_eq!(a.matrix, b.matrix);
        let c = sweep_and_build(&config, &grid, &params, 43).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn sweep_rejects_out_of_range_aux_bin() {
        let config = random_array(3, 2);
        let grid = AngularGrid::new(8).unwrap();
        let params = SweepParams {
            aux_bin: 40,
            num_snapshots: 32,
            ..SweepParams::default()
        };
        assert!(sweep_and_build(&config, &grid, &params, 0).is_err());
    }

    #[test]
    fn normalized_noiseless_sweep_recovers_corrupted_steering() {
        let config = random_array(8, 33);
        let grid = AngularGrid::new(90).unwrap();
        let params = SweepParams {
            aux_bin: 7,
            num_snapshots: 128,
            snr_db: f64::INFINITY,
            repeats: 1,
        };
        let basis = normalize(sweep_and_build(&config, &grid, &params, 0).unwrap()).unwrap();
        assert!(basis.normalized);
        let mut worst: f64 = 0.0;
        for (i, &theta) in grid.angles().iter().enumerate() {
            let want = corrupted_steering_unchecked(&config, theta);
            for (got, &w) in basis.matrix.column(i).iter().zip(want.iter()) {
                worst = worst.max((got - w).norm());
            }
        }
        assert!(worst < 1e-10, "max deviation {worst}");
    }

    #[test]
    fn identity_errors_make_normalized_sweep_equal_nominal() {
        let config =
            ArrayConfig::half_wavelength(5, 1.0, ErrorModel::identity(5)).unwrap();
        let grid = AngularGrid::new(24).unwrap();
        let params = SweepParams {
            aux_bin: 4,
            num_snapshots: 64,
            snr_db: f64::INFINITY,
            repeats: 1,
        };
        let swept = normalize(sweep_and_build(&config, &grid, &params, 0).unwrap()).unwrap();
        let nominal = nominal_basis(&config, &grid);
        for (a, b) in swept.matrix.iter().zip(nominal.matrix.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalize_is_idempotent_bitwise() {
        let config = random_array(4, 3);
        let grid = AngularGrid::new(12).unwrap();
        let params = SweepParams {
            aux_bin: 3,
            num_snapshots: 32,
            snr_db: 25.0,
            repeats: 1,
        };
        let once = normalize(sweep_and_build(&config, &grid, &params, 5).unwrap()).unwrap();
        let twice = normalize(once.clone()).unwrap();
        assert_eq!(once.matrix, twice.matrix);
        // row 1 must be exactly ones
        for x in once.matrix.row(0).iter() {
            assert_eq!(*x, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn normalize_is_invariant_to_column_scale() {
        let config = random_array(4, 4);
        let grid = AngularGrid::new(12).unwrap();
        let params = SweepParams {
            aux_bin: 3,
            num_snapshots: 32,
            snr_db: 25.0,
            repeats: 1,
        };
        let raw = sweep_and_build(&config, &grid, &params, 5).unwrap();
        let scaled = RsvBasis {
            matrix: raw.matrix.mapv(|x| x * Complex64::new(-2.3, 1.7)),
            grid: raw.grid.clone(),
            normalized: false,
        };
        let a = normalize(raw).unwrap();
        let b = normalize(scaled).unwrap();
        for (x, y) in a.matrix.iter().zip(b.matrix.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_names_the_offending_angle() {
        let config = random_array(3, 6);
        let grid = AngularGrid::new(10).unwrap();
        let params = SweepParams {
            aux_bin: 2,
            num_snapshots: 16,
            snr_db: f64::INFINITY,
            repeats: 1,
        };
        let mut raw = sweep_and_build(&config, &grid, &params, 0).unwrap();
        raw.matrix[(0, 3)] = Complex64::new(0.0, 0.0);
        match normalize(raw) {
            Err(Error::NormalizationFailure { angle_deg, .. }) => {
                let expect = grid.angles()[3].to_degrees();
                assert_abs_diff_eq!(angle_deg, expect, epsilon = 1e-9);
            }
            other => panic!("expected normalization failure, got {other:?}"),
        }
    }

    #[test]
    fn noisy_sweep_stays_close_to_truth_at_high_snr() {
        // 20 dB sweep, 512-snapshot windows: per-column relative error of the
        // normalized basis stays under 5% across seeds.
        let config = random_array(8, 77);
        let grid = AngularGrid::new(60).unwrap();
        let params = SweepParams {
            aux_bin: 11,
            num_snapshots: 512,
            snr_db: 20.0,
            repeats: 1,
        };
        for seed in 0..20u64 {
            let basis = normalize(sweep_and_build(&config, &grid, &params, seed).unwrap()).unwrap();
            for (i, &theta) in grid.angles().iter().enumerate() {
                let want = corrupted_steering_unchecked(&config, theta);
                let diff: f64 = basis
                    .matrix
                    .column(i)
                    .iter()
                    .zip(want.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let norm: f64 = want.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                assert!(
                    diff / norm < 0.05,
                    "seed {seed} column {i}: relative error {}",
                    diff / norm
                );
            }
        }
    }

    #[test]
    fn nominal_basis_has_unit_modulus_entries_and_ones_row() {
        let config = random_array(8, 9);
        let grid = AngularGrid::new(900).unwrap();
        let basis = nominal_basis(&config, &grid);
        assert_eq!(basis.matrix.nrows(), 8);
        assert_eq!(basis.matrix.ncols(), 900);
        assert!(basis.normalized);
        for x in basis.matrix.row(0).iter() {
            assert_eq!(*x, Complex64::new(1.0, 0.0));
        }
        for x in basis.matrix.iter() {
            assert!((x.norm() - 1.0).abs() < 1e-12);
        }
    }
}
