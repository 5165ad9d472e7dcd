//! Waveform synthesis and the figures of merit used to compare sequence designs.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interlace::SparseSpectrum;
use crate::seqcore::ComplexSequence;

/// IDFT size used for synthesis and peak cross-correlation.
pub const DEFAULT_N_IDFT: usize = 4096;

/// PAPR ceiling of a complementary sequence whose mate has equal energy, in dB.
pub fn papr_bound_db() -> f64 {
    10.0 * 2f64.log10()
}

/// Denominator of the cubic-metric formula.
pub const CM_SLOPE: f64 = 1.56;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Time-domain samples of one OFDM symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    samples: Vec<Complex64>,
}

impl Waveform {
    pub fn from_samples(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = samples.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.samples.len() as f64
    }

    pub fn peak_power(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { samples: self.samples.iter().map(|v| v * alpha).collect() }
    }
}

/// Places the spectrum on an `n_idft`-point grid and applies an unnormalized
/// inverse DFT, i.e. samples the sequence polynomial at `exp(i 2 pi t / n_idft)`.
pub fn synthesize(spec: &SparseSpectrum, n_idft: usize) -> Result<Waveform> {
    if !n_idft.is_power_of_two() {
        return invalid(format!("IDFT size {n_idft} is not a power of two"));
    }
    if n_idft < spec.grid_size() {
        return invalid(format!("IDFT size {n_idft} is smaller than the grid ({})", spec.grid_size()));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n_idft];
    for &(idx, v) in spec.entries() {
        buf[idx] = v;
    }
    inverse_plan(n_idft).process(&mut buf);
    Waveform::from_samples(buf)
}

/// `10 log10(max |w|^2 / mean |w|^2)`.
pub fn papr_db(w: &Waveform) -> Result<f64> {
    let mean = w.mean_power();
    if mean <= 0.0 {
        return invalid("PAPR of an all-zero waveform is undefined");
    }
    Ok(10.0 * (w.peak_power() / mean).log10())
}

/// Cubic metric `20 log10(rms(|v_norm|^3)) / 1.56` with `v_norm` scaled to unit
/// mean power. Computed as `10 log10(E|w|^6 / (E|w|^2)^3) / 1.56`, which is the
/// same quantity without an explicit normalization pass.
pub fn cm_db(w: &Waveform) -> Result<f64> {
    let n = w.samples.len() as f64;
    let p2 = w.mean_power();
    if p2 <= 0.0 {
        return invalid("cubic metric of an all-zero waveform is undefined");
    }
    let p6 = w.samples.iter().map(|v| v.norm_sqr().powi(3)).sum::<f64>() / n;
    Ok(10.0 * (p6 / p2.powi(3)).log10() / CM_SLOPE)
}

/// `max |IDFT_n(x_i .* conj(x_j))| / N`, with the product zero-padded to `n_idft`.
pub fn peak_xcorr(xi: &ComplexSequence, xj: &ComplexSequence, n_idft: usize) -> Result<f64> {
    if xi.len() != xj.len() {
        return Err(Error::LengthMismatch { left: xi.len(), right: xj.len() });
    }
    if n_idft < xi.len() {
        return invalid(format!("IDFT size {n_idft} is shorter than the sequences ({})", xi.len()));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n_idft];
    for (slot, (a, b)) in buf.iter_mut().zip(xi.as_slice().iter().zip(xj.as_slice())) {
        *slot = a * b.conj();
    }
    inverse_plan(n_idft).process(&mut buf);
    Ok(buf.iter().map(|v| v.norm()).fold(0.0, f64::max) / xi.len() as f64)
}

/// `max_delta |<c_i, c_j .* s(delta)>| / N` over `delta = t/u`, `t = 0..N*u`,
/// evaluated directly from the inner-product definition.
pub fn fractional_xcorr_max(ci: &ComplexSequence, cj: &ComplexSequence, u: usize) -> Result<f64> {
    if ci.len() != cj.len() {
        return Err(Error::LengthMismatch { left: ci.len(), right: cj.len() });
    }
    if u == 0 {
        return invalid("shift grid density u must be at least 1");
    }
    let n = ci.len();
    let points = n * u;
    let twiddle: Vec<Complex64> =
        (0..points).map(|p| Complex64::from_polar(1.0, 2.0 * PI * p as f64 / points as f64)).collect();
    let prod: Vec<Complex64> =
        ci.as_slice().iter().zip(cj.as_slice()).map(|(a, b)| a.conj() * b).collect();
    let best = (0..points)
        .map(|t| {
            prod.iter()
                .enumerate()
                .map(|(k, p)| p * twiddle[(k * t) % points])
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max);
    Ok(best / n as f64)
}

/// FFT-backed evaluator of the fractional-shift correlation peak for a fixed
/// sequence length and grid density; intended for repeated use in searches.
#[derive(Clone)]
pub struct FractionalCorrelator {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl FractionalCorrelator {
    pub fn new(len: usize, u: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Empty);
        }
        if u == 0 {
            return invalid("shift grid density u must be at least 1");
        }
        Ok(Self { len, fft: FftPlanner::new().plan_fft_inverse(len * u) })
    }

    pub fn peak(&self, ci: &[Complex64], cj: &[Complex64]) -> f64 {
        debug_assert!(ci.len() == self.len && cj.len() == self.len);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.len()];
        for (slot, (a, b)) in buf.iter_mut().zip(ci.iter().zip(cj)) {
            *slot = a * b.conj();
        }
        self.fft.process(&mut buf);
        buf.iter().map(|v| v.norm()).fold(0.0, f64::max) / self.len as f64
    }
}

/// Complementary CDF sampled at a set of thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub exceed_prob: Vec<f64>,
}

/// Fraction of `values` strictly above each threshold.
pub fn ccdf(values: &[f64], thresholds: &[f64]) -> Result<CcdfCurve> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let exceed_prob = thresholds
        .iter()
        .map(|t| (sorted.len() - sorted.partition_point(|v| v <= t)) as f64 / n)
        .collect();
    Ok(CcdfCurve { thresholds: thresholds.to_vec(), exceed_prob })
}

/// Evenly spaced thresholds `from, from + step, ...` up to and including `to`.
pub fn threshold_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| from + i as f64 * step).collect()
}
