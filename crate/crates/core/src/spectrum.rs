//! Per-antenna DFT spectra, spectral-peak detection, and multi-frequency
//! peak accumulation.
//!
//! DFT convention (fixed so golden files stay stable): the unnormalized
//! forward sum `X(w) = sum_{l=1..L} x(l) * exp(-j*2*pi*w*l/L)` with both the
//! snapshot index `l` and the bin index `w` running 1..L. Bin `w = L` is DC
//! under this indexing. The transform is computed with an FFT plus the 1-based
//! twiddle correction, at `O(M*L*log L)` across antennas.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use crate::array::SnapshotMatrix;
use crate::error::{Error, Result};

/// M x L frequency-domain data; column c holds bin `w = c + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatrix {
    pub data: Array2<Complex64>,
}

impl SpectrumMatrix {
    pub fn num_antennas(&self) -> usize {
        self.data.nrows()
    }

    pub fn bin_count(&self) -> usize {
        self.data.ncols()
    }

    /// Column at 1-based bin `w`.
    pub fn column(&self, bin: usize) -> Result<ArrayView1<'_, Complex64>> {
        self.check_bin(bin)?;
        Ok(self.data.column(bin - 1))
    }

    /// Antenna-summed power `P(w) = sum_m |X_m(w)|^2`.
    pub fn bin_power(&self, bin: usize) -> Result<f64> {
        Ok(self.column(bin)?.iter().map(|x| x.norm_sqr()).sum())
    }

    fn check_bin(&self, bin: usize) -> Result<()> {
        if bin == 0 || bin > self.bin_count() {
            return Err(Error::InvalidInput(format!(
                "bin {bin} outside [1, {}]",
                self.bin_count()
            )));
        }
        Ok(())
    }
}

/// Measurement vector formed by summing spectrum columns at the listed bins.
#[derive(Debug, Clone)]
pub struct PeakMeasurement {
    pub vector: Array1<Complex64>,
    /// The 1-based bins that were summed.
    pub bins: Vec<usize>,
    /// Total antenna-summed power of the listed bins.
    pub aggregate_power: f64,
}

// FFT plans are immutable once built; share them across calls and threads.
static PLAN_CACHE: LazyLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLAN_CACHE.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// L-point DFT of every antenna's snapshot sequence.
pub fn dft_all_antennas(snapshots: &SnapshotMatrix) -> SpectrumMatrix {
    let m = snapshots.num_antennas();
    let l = snapshots.num_snapshots();
    let fft = plan(l, false);

    // X(w) = exp(-j*2*pi*w/L) * F[w mod L], with the angle reduced mod L so
    // the DC bin (w = L) carries an exactly unit twiddle.
    let twiddles: Vec<Complex64> = (1..=l)
        .map(|w| Complex64::cis(-2.0 * PI * ((w % l) as f64) / l as f64))
        .collect();

    let mut out = Array2::<Complex64>::zeros((m, l));
    let mut buf = vec![Complex64::default(); l];
    for (row_in, mut row_out) in snapshots.data.rows().into_iter().zip(out.rows_mut()) {
        for (b, &x) in buf.iter_mut().zip(row_in.iter()) {
            *b = x;
        }
        fft.process(&mut buf);
        for (w, slot) in row_out.iter_mut().enumerate() {
            // slot index w holds bin w+1
            *slot = twiddles[w] * buf[(w + 1) % l];
        }
    }
    SpectrumMatrix { data: out }
}

/// Inverse of [`dft_all_antennas`]: recovers the snapshot matrix.
pub fn inverse_dft(spectrum: &SpectrumMatrix) -> SnapshotMatrix {
    let m = spectrum.num_antennas();
    let l = spectrum.bin_count();
    let ifft = plan(l, true);

    let twiddles: Vec<Complex64> = (0..l)
        .map(|k| Complex64::cis(2.0 * PI * k as f64 / l as f64))
        .collect();

    let mut out = Array2::<Complex64>::zeros((m, l));
    let mut buf = vec![Complex64::default(); l];
    for (row_in, mut row_out) in spectrum.data.rows().into_iter().zip(out.rows_mut()) {
        // Standard-order coefficients: F[k] = X(k) * exp(j*2*pi*k/L) for
        // k >= 1, F[0] = X(L).
        buf[0] = row_in[l - 1];
        for k in 1..l {
            buf[k] = row_in[k - 1] * twiddles[k];
        }
        ifft.process(&mut buf);
        let scale = 1.0 / l as f64;
        for (slot, &b) in row_out.iter_mut().zip(buf.iter()) {
            *slot = b * scale;
        }
    }
    SnapshotMatrix { data: out }
}

/// Greedily picks the `num_peaks` bins of largest antenna-summed power,
/// suppressing bins closer than `min_bin_separation` to an already-selected
/// bin. Zero-power bins are not peak candidates. Returned in
/// descending-power order, ties broken by lower bin.
pub fn detect_peaks(
    spectrum: &SpectrumMatrix,
    num_peaks: usize,
    min_bin_separation: usize,
) -> Result<Vec<usize>> {
    if num_peaks == 0 {
        return Err(Error::InvalidInput("num_peaks must be at least 1".into()));
    }
    if min_bin_separation == 0 {
        return Err(Error::InvalidInput(
            "min_bin_separation must be at least 1".into(),
        ));
    }
    let l = spectrum.bin_count();
    let powers: Vec<f64> = (1..=l)
        .map(|w| spectrum.bin_power(w).expect("bin in range"))
        .collect();
    let mut order: Vec<usize> = (1..=l).filter(|&w| powers[w - 1] > 0.0).collect();
    order.sort_by(|&a, &b| {
        powers[b - 1]
            .partial_cmp(&powers[a - 1])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut picked = Vec::with_capacity(num_peaks);
    let mut suppressed = vec![false; l + 1];
    for bin in order {
        if suppressed[bin] {
            continue;
        }
        picked.push(bin);
        if picked.len() == num_peaks {
            return Ok(picked);
        }
        let lo = bin.saturating_sub(min_bin_separation - 1).max(1);
        let hi = (bin + min_bin_separation - 1).min(l);
        for b in lo..=hi {
            suppressed[b] = true;
        }
    }
    Err(Error::InsufficientPeaks {
        requested: num_peaks,
        found: picked.len(),
    })
}

/// Sums the spectrum columns at the listed (distinct, in-range) bins into
/// one measurement vector.
pub fn accumulate_peaks(spectrum: &SpectrumMatrix, bins: &[usize]) -> Result<PeakMeasurement> {
    if bins.is_empty() {
        return Err(Error::InvalidInput("no bins to accumulate".into()));
    }
    let mut sorted = bins.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate bins in accumulation".into()));
    }
    let mut vector = Array1::<Complex64>::zeros(spectrum.num_antennas());
    let mut aggregate_power = 0.0;
    for &bin in bins {
        let col = spectrum.column(bin)?;
        vector += &col;
        aggregate_power += spectrum.bin_power(bin)?;
    }
    Ok(PeakMeasurement {
        vector,
        bins: bins.to_vec(),
        aggregate_power,
    })
}
