//! Array and received-signal model: a uniform linear array with per-antenna
//! amplitude-phase errors, narrowband sources pinned to integer DFT bins, and
//! additive circular Gaussian noise.
//!
//! Sources are constant-envelope complex exponentials `amp * exp(j*2*pi*w*l/L)`
//! sampled at snapshots `l = 1..L`, so each source occupies exactly one DFT bin
//! and fully coherent sources are realized by sharing that bin. All operations
//! here are pure functions of their inputs (seed included).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, rng_from_seed, Rng64};

/// Per-antenna multiplicative gain/phase deviations; antenna 1 is the
/// reference and is pinned to gain 1, phase 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel {
    gains: Vec<f64>,
    phases: Vec<f64>,
}

impl ErrorModel {
    /// Error-free model: all gains 1, all phases 0.
    pub fn identity(num_antennas: usize) -> Self {
        Self {
            gains: vec![1.0; num_antennas],
            phases: vec![0.0; num_antennas],
        }
    }

    /// Builds a model from explicit gain/phase vectors.
    ///
    /// The first entries must be exactly (1, 0) and all gains positive.
    pub fn new(gains: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if gains.len() != phases.len() || gains.is_empty() {
            return Err(Error::InvalidInput(format!(
                "gain/phase lengths must match and be nonempty: {} vs {}",
                gains.len(),
                phases.len()
            )));
        }
        if gains[0] != 1.0 || phases[0] != 0.0 {
            return Err(Error::InvalidInput(
                "reference antenna must have gain 1 and phase 0".into(),
            ));
        }
        if gains.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::InvalidInput("all gains must be positive".into()));
        }
        Ok(Self { gains, phases })
    }

    /// Draws gains `N(gain_mean, gain_std^2)` and phases `N(0, phase_std^2)`
    /// for antennas 2..M, keeping antenna 1 as the reference. Non-positive
    /// gain draws are rejected and redrawn (vanishingly rare at the intended
    /// std of 0.1). Draw order is gain-then-phase per antenna.
    pub fn random(
        num_antennas: usize,
        gain_mean: f64,
        gain_std: f64,
        phase_std_rad: f64,
        rng: &mut Rng64,
    ) -> Self {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut gains = vec![1.0; num_antennas];
        let mut phases = vec![0.0; num_antennas];
        for m in 1..num_antennas {
            loop {
                let z: f64 = rng.sample(StandardNormal);
                let g = gain_mean + gain_std * z;
                if g > 0.0 {
                    gains[m] = g;
                    break;
                }
            }
            let z: f64 = rng.sample(StandardNormal);
            phases[m] = phase_std_rad * z;
        }
        Self { gains, phases }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The complex factor `g_m * exp(j*phi_m)` for 0-based antenna `m`.
    pub fn factor(&self, m: usize) -> Complex64 {
        Complex64::from_polar(self.gains[m], self.phases[m])
    }

    pub fn is_identity(&self) -> bool {
        self.gains.iter().all(|&g| g == 1.0) && self.phases.iter().all(|&p| p == 0.0)
    }
}

/// ULA geometry plus the error model baked into its front end.
#[derive(Debug, Clone)]
pub struct ArrayConfig {
    num_antennas: usize,
    spacing: f64,
    carrier_wavelength: f64,
    errors: ErrorModel,
}

impl ArrayConfig {
    pub fn new(
        num_antennas: usize,
        spacing: f64,
        carrier_wavelength: f64,
        errors: ErrorModel,
    ) -> Result<Self> {
        if num_antennas < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 antennas, got {num_antennas}"
            )));
        }
        if !(spacing > 0.0) || !(carrier_wavelength > 0.0) {
            return Err(Error::InvalidInput(
                "spacing and carrier wavelength must be positive".into(),
            ));
        }
        if errors.len() != num_antennas {
            return Err(Error::InvalidInput(format!(
                "error model covers {} antennas, array has {num_antennas}",
                errors.len()
            )));
        }
        Ok(Self {
            num_antennas,
            spacing,
            carrier_wavelength,
            errors,
        })
    }

    /// Half-wavelength spaced ULA, the default geometry.
    pub fn half_wavelength(
        num_antennas: usize,
        carrier_wavelength: f64,
        errors: ErrorModel,
    ) -> Result<Self> {
        Self::new(num_antennas, carrier_wavelength / 2.0, carrier_wavelength, errors)
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn carrier_wavelength(&self) -> f64 {
        self.carrier_wavelength
    }

    pub fn errors(&self) -> &ErrorModel {
        &self.errors
    }

    /// The same geometry with a different error model.
    pub fn with_errors(&self, errors: ErrorModel) -> Result<Self> {
        Self::new(self.num_antennas, self.spacing, self.carrier_wavelength, errors)
    }

    /// The same geometry with identity errors.
    pub fn error_free(&self) -> Self {
        Self {
            errors: ErrorModel::identity(self.num_antennas),
            ..self.clone()
        }
    }
}

/// Narrowband source set: incidence angles, per-source DFT bins (1-based,
/// in `[1, L]`), complex amplitudes, and the coherence flag.
///
/// Fully coherent sources share one bin; non-coherent sources must sit on
/// pairwise distinct bins, which makes their envelopes exactly orthogonal
/// over a full snapshot window.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    angles: Vec<f64>,
    bins: Vec<usize>,
    amplitudes: Vec<Complex64>,
    coherent: bool,
}

impl SourceSpec {
    pub fn new(
        angles: Vec<f64>,
        bins: Vec<usize>,
        amplitudes: Vec<Complex64>,
        coherent: bool,
    ) -> Result<Self> {
        let j = angles.len();
        if j == 0 {
            return Err(Error::InvalidInput("need at least one source".into()));
        }
        if bins.len() != j || amplitudes.len() != j {
            return Err(Error::InvalidInput(format!(
                "angles/bins/amplitudes lengths differ: {j}/{}/{}",
                bins.len(),
                amplitudes.len()
            )));
        }
        if angles.iter().any(|&t| !(t.abs() < PI / 2.0)) {
            return Err(Error::InvalidInput(
                "source angles must lie strictly inside (-pi/2, pi/2)".into(),
            ));
        }
        if bins.iter().any(|&b| b == 0) {
            return Err(Error::InvalidInput("DFT bins are 1-based".into()));
        }
        if coherent {
            if bins.iter().any(|&b| b != bins[0]) {
                return Err(Error::InvalidInput(
                    "coherent sources must share one DFT bin".into(),
                ));
            }
        } else {
            let mut sorted = bins.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != j {
                return Err(Error::InvalidInput(
                    "non-coherent sources must use pairwise distinct bins".into(),
                ));
            }
        }
        Ok(Self {
            angles,
            bins,
            amplitudes,
            coherent,
        })
    }

    /// Fully coherent sources with unit amplitudes on a shared bin.
    pub fn coherent(angles: Vec<f64>, bin: usize) -> Result<Self> {
        let j = angles.len();
        Self::new(angles, vec![bin; j], vec![Complex64::new(1.0, 0.0); j], true)
    }

    /// Non-coherent unit-amplitude sources on distinct bins.
    pub fn incoherent(angles: Vec<f64>, bins: Vec<usize>) -> Result<Self> {
        let j = angles.len();
        Self::new(angles, bins, vec![Complex64::new(1.0, 0.0); j], false)
    }

    pub fn num_sources(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn bins(&self) -> &[usize] {
        &self.bins
    }

    /// The distinct bins occupied by the sources, ascending.
    pub fn distinct_bins(&self) -> Vec<usize> {
        let mut bins = self.bins.clone();
        bins.sort_unstable();
        bins.dedup();
        bins
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_coherent(&self) -> bool {
        self.coherent
    }

    /// Total mean envelope power `sum_j |amp_j|^2`, the numerator of the SNR
    /// definition (exact for constant-envelope exponentials).
    pub fn signal_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// M x L complex received data; row m is antenna m, column c is snapshot
/// `l = c + 1` (snapshots are 1-based to match the DFT convention).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub data: Array2<Complex64>,
}

impl SnapshotMatrix {
    pub fn new(data: Array2<Complex64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::InvalidInput("snapshot matrix must be nonempty".into()));
        }
        Ok(Self { data })
    }

    pub fn num_antennas(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Ideal steering vector `a(theta)`: element m (1-based) is
/// `exp(j*2*pi*(m-1)*d*sin(theta)/lambda_c)`.
///
/// Rejects look directions outside the open interval `(-pi/2, pi/2)`.
pub fn steering_vector(config: &ArrayConfig, theta: f64) -> Result<Array1<Complex64>> {
    validate_look_direction(theta)?;
    Ok(steering_unchecked(config, theta))
}

/// Error-corrupted steering vector `b(theta)`: elementwise product of the
/// error factors `g_m exp(j*phi_m)` with `a(theta)`. Element 1 stays `1+0j`.
pub fn corrupted_steering_vector(config: &ArrayConfig, theta: f64) -> Result<Array1<Complex64>> {
    validate_look_direction(theta)?;
    Ok(corrupted_steering_unchecked(config, theta))
}

fn validate_look_direction(theta: f64) -> Result<()> {
    if !(theta.abs() < PI / 2.0) {
        return Err(Error::InvalidInput(format!(
            "look direction {theta} rad outside (-pi/2, pi/2)"
        )));
    }
    Ok(())
}

/// Steering formula without the open-interval check. Angular grids include
/// the +pi/2 endfire endpoint, where the formula is still well defined.
pub(crate) fn steering_unchecked(config: &ArrayConfig, theta: f64) -> Array1<Complex64> {
    let phase_step = 2.0 * PI * config.spacing * theta.sin() / config.carrier_wavelength;
    Array1::from_iter((0..config.num_antennas).map(|m| Complex64::cis(phase_step * m as f64)))
}

pub(crate) fn corrupted_steering_unchecked(config: &ArrayConfig, theta: f64) -> Array1<Complex64> {
    let mut v = steering_unchecked(config, theta);
    for (m, x) in v.iter_mut().enumerate() {
        *x *= config.errors.factor(m);
    }
    v
}

/// Synthesizes snapshots for explicit steering columns and bin-pinned
/// envelopes: `x(l) = sum_j b_j * amp_j * exp(j*2*pi*w_j*l/L) + n(l)`.
///
/// `noise_variance` of 0 disables noise. Noise is drawn row-major (antenna by
/// antenna, snapshot by snapshot) from the supplied generator.
pub(crate) fn synthesize_from_steering(
    steering: &[Array1<Complex64>],
    amplitudes: &[Complex64],
    bins: &[usize],
    num_snapshots: usize,
    noise_variance: f64,
    rng: &mut Rng64,
) -> Array2<Complex64> {
    let m = steering[0].len();
    let l = num_snapshots;
    let mut data = Array2::<Complex64>::zeros((m, l));
    for ((b, &amp), &bin) in steering.iter().zip(amplitudes).zip(bins) {
        // envelope at snapshot l (1-based): amp * exp(j*2*pi*bin*l/L)
        let envelope: Vec<Complex64> = (1..=l)
            .map(|ell| amp * Complex64::cis(2.0 * PI * bin as f64 * ell as f64 / l as f64))
            .collect();
        for (row, &bm) in data.rows_mut().into_iter().zip(b.iter()) {
            for (x, &e) in row.into_iter().zip(envelope.iter()) {
                *x += bm * e;
            }
        }
    }
    if noise_variance > 0.0 {
        for x in data.iter_mut() {
            *x += complex_gaussian(rng, noise_variance);
        }
    }
    data
}

/// Noise variance realizing the definition `SNR = 10*log10(P_s / sigma_n^2)`.
/// An infinite SNR yields zero variance (noise disabled).
pub fn noise_variance_for_snr(signal_power: f64, snr_db: f64) -> f64 {
    if snr_db.is_infinite() && snr_db > 0.0 {
        0.0
    } else {
        signal_power / 10f64.powf(snr_db / 10.0)
    }
}

/// Synthesizes an M x L snapshot matrix for the configured sources.
///
/// Each source contributes `amp_j * exp(j*2*pi*w_j*l/L)` through its corrupted
/// steering vector; circular Gaussian noise is added at the variance implied
/// by `snr_db` (pass `f64::INFINITY` for a noiseless matrix). Deterministic
/// given `seed`.
pub fn synthesize_snapshots(
    config: &ArrayConfig,
    sources: &SourceSpec,
    num_snapshots: usize,
    snr_db: f64,
    seed: u64,
) -> Result<SnapshotMatrix> {
    if num_snapshots == 0 {
        return Err(Error::InvalidInput("need at least one snapshot".into()));
    }
    if sources.num_sources() >= config.num_antennas() {
        return Err(Error::InvalidInput(format!(
            "number of sources {} must be below number of antennas {}",
            sources.num_sources(),
            config.num_antennas()
        )));
    }
    if let Some(&bad) = sources.bins().iter().find(|&&b| b > num_snapshots) {
        return Err(Error::InvalidInput(format!(
            "source bin {bad} outside DFT range [1, {num_snapshots}]"
        )));
    }
    let steering: Vec<Array1<Complex64>> = sources
        .angles()
        .iter()
        .map(|&t| corrupted_steering_vector(config, t))
        .collect::<Result<_>>()?;
    let variance = noise_variance_for_snr(sources.signal_power(), snr_db);
    let mut rng = rng_from_seed(seed);
    let data = synthesize_from_steering(
        &steering,
        sources.amplitudes(),
        sources.bins(),
        num_snapshots,
        variance,
        &mut rng,
    );
    SnapshotMatrix::new(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plain_array(m: usize) -> ArrayConfig {
        ArrayConfig::half_wavelength(m, 1.0, ErrorModel::identity(m)).unwrap()
    }

    #[test]
    fn steering_at_broadside_is_all_ones() {
        let v = steering_vector(&plain_array(6), 0.0).unwrap();
        for x in v.iter() {
            assert_eq!(*x, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_near_endfire_approaches_minus_one() {
        // M=2, d = lambda/2: element 2 tends to exp(j*pi) = -1 as theta -> pi/2.
        let v = steering_vector(&plain_array(2), PI / 2.0 - 1e-9).unwrap();
        assert_abs_diff_eq!(v[1].re, -1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v[1].im, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn steering_matches_hand_evaluation_at_30_deg() {
        // d = lambda/2, theta = 30 deg: phase step pi*sin(30 deg) = pi/2, so
        // elements are 1, j, -1, -j.
        let v = steering_vector(&plain_array(4), 30f64.to_radians()).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (got, want) in v.iter().zip(expect) {
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn steering_entries_are_unit_modulus_with_unit_reference() {
        let config = plain_array(8);
        for k in -89..=89 {
            let v = steering_vector(&config, (k as f64).to_radians()).unwrap();
            assert_eq!(v[0], Complex64::new(1.0, 0.0));
            for x in v.iter() {
                assert!((x.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn steering_rejects_out_of_range_angles() {
        assert!(steering_vector(&plain_array(4), PI / 2.0).is_err());
        assert!(steering_vector(&plain_array(4), -PI / 2.0).is_err());
        assert!(steering_vector(&plain_array(4), 2.0).is_err());
    }

    #[test]
    fn corrupted_steering_with_identity_errors_matches_ideal() {
        let config = plain_array(5);
        for k in [-70, -33, 0, 12, 84] {
            let theta = (k as f64).to_radians() / 1.2;
            let a = steering_vector(&config, theta).unwrap();
            let b = corrupted_steering_vector(&config, theta).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-15);
                assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn corrupted_steering_at_broadside_exposes_error_factors() {
        let errors = ErrorModel::new(vec![1.0, 2.0, 1.0], vec![0.0, PI / 2.0, 0.0]).unwrap();
        let config = ArrayConfig::half_wavelength(3, 1.0, errors).unwrap();
        let b = corrupted_steering_vector(&config, 0.0).unwrap();
        assert_eq!(b[0], Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(b[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1].im, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn error_model_rejects_bad_reference_and_nonpositive_gain() {
        assert!(ErrorModel::new(vec![0.9, 1.0], vec![0.0, 0.0]).is_err());
        assert!(ErrorModel::new(vec![1.0, 1.0], vec![0.1, 0.0]).is_err());
        assert!(ErrorModel::new(vec![1.0, -0.5], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn noiseless_single_source_rows_are_pure_exponentials() {
        let config = plain_array(4);
        let sources = SourceSpec::coherent(vec![0.0], 5).unwrap();
        let snaps = synthesize_snapshots(&config, &sources, 32, f64::INFINITY, 1).unwrap();
        for m in 0..4 {
            for c in 0..32 {
                let want = Complex64::cis(2.0 * PI * 5.0 * (c + 1) as f64 / 32.0);
                let got = snaps.data[(m, c)];
                assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_reproduces_snapshots() {
        let config = plain_array(4);
        let sources = SourceSpec::coherent(vec![0.3, -0.5], 7).unwrap();
        let a = synthesize_snapshots(&config, &sources, 64, 10.0, 99).unwrap();
        let b = synthesize_snapshots(&config, &sources, 64, 10.0, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coherent_equal_frequency_sources_give_rank_one_data() {
        let mut rng = rng_from_seed(5);
        let errors = ErrorModel::random(8, 1.0, 0.1, 10f64.to_radians(), &mut rng);
        let config = ArrayConfig::half_wavelength(8, 1.0, errors).unwrap();
        let sources =
            SourceSpec::coherent(vec![-40f64.to_radians(), 20f64.to_radians()], 11).unwrap();
        let snaps = synthesize_snapshots(&config, &sources, 128, f64::INFINITY, 0).unwrap();

        let na = nalgebra::DMatrix::from_fn(8, 128, |r, c| snaps.data[(r, c)]);
        let svals = na.singular_values();
        assert!(svals[1] < 1e-10 * svals[0], "s1={} s2={}", svals[0], svals[1]);
    }

    #[test]
    fn synthesize_rejects_bin_beyond_window_and_too_many_sources() {
        let config = plain_array(3);
        let sources = SourceSpec::coherent(vec![0.1], 100).unwrap();
        assert!(synthesize_snapshots(&config, &sources, 64, 20.0, 0).is_err());
        let crowded = SourceSpec::coherent(vec![0.1, 0.2, 0.3], 5).unwrap();
        assert!(synthesize_snapshots(&config, &crowded, 64, 20.0, 0).is_err());
    }

    #[test]
    fn empirical_noise_power_matches_configured_variance() {
        // Subtract the exactly-known noiseless part; the residual is the
        // injected noise. M*L = 8*2048 > 1e4 samples.
        let config = plain_array(8);
        let sources = SourceSpec::coherent(vec![0.2], 9).unwrap();
        let snr_db = 3.0;
        let noisy = synthesize_snapshots(&config, &sources, 2048, snr_db, 11).unwrap();
        let clean = synthesize_snapshots(&config, &sources, 2048, f64::INFINITY, 11).unwrap();
        let sigma2 = noise_variance_for_snr(sources.signal_power(), snr_db);
        let mean_power: f64 = (&noisy.data - &clean.data)
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            / (8.0 * 2048.0);
        assert!(
            (mean_power - sigma2).abs() / sigma2 < 0.05,
            "measured {mean_power}, expected {sigma2}"
        );
    }

    #[test]
    fn source_spec_validates_coherence_and_bins() {
        assert!(SourceSpec::new(
            vec![0.1, 0.2],
            vec![3, 4],
            vec![Complex64::new(1.0, 0.0); 2],
            true
        )
        .is_err());
        assert!(SourceSpec::incoherent(vec![0.1, 0.2], vec![3, 3]).is_err());
        assert!(SourceSpec::coherent(vec![1.6], 3).is_err());
        assert!(SourceSpec::coherent(vec![], 3).is_err());
    }
}
