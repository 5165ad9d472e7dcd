//! Monte-Carlo DTX/ACK/NACK detection for the interlaced control channel and
//! its single-RB counterparts.
//!
//! Only the occupied tones are simulated. Tone `t` of antenna `a` receives
//! `y = h[a][rb(t)] * A * x[t] + n` with `n ~ CN(0, 1)`, so the SNR axis is the
//! per-occupied-tone SNR `A^2` of the interlace (all transmitted values are
//! unimodular). Every trial draws from its own ChaCha stream keyed by
//! `(seed, stream, snr index, hypothesis, trial)`, and results are integer
//! counts, so reports do not depend on the number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fixtures;
use crate::golay::GolayPair;
use crate::interlace::{build_coherent, build_noncoherent, pilot_phasor, InterlaceConfig, SparseSpectrum, UciPayload};
use crate::seqcore::QuaternarySequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    NonCoherent,
    Coherent,
    SingleRbNonCoherent,
    SingleRbCoherent,
}

impl Scheme {
    pub fn is_single_rb(self) -> bool {
        matches!(self, Scheme::SingleRbNonCoherent | Scheme::SingleRbCoherent)
    }

    pub fn is_coherent(self) -> bool {
        matches!(self, Scheme::Coherent | Scheme::SingleRbCoherent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    /// One gain per antenna shared by all resource blocks.
    Flat,
    /// Independent unit-variance gain per resource block and antenna.
    IidPerRb,
}

/// Span of the receiver's coherent sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combining {
    /// Correlate (or estimate the channel) per resource block, then combine
    /// energies (or MRC) across blocks.
    PerRb,
    /// Treat all occupied tones as one block; matched to a flat channel.
    Joint,
}

/// Power scaling of the single-RB schemes relative to the interlace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Same total transmit energy: single-RB tones are `n_rb` times stronger.
    EqualTotalEnergy,
    /// Same energy per tone.
    EqualPerTone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Dtx,
    Ack,
    Nack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Dtx,
    Ack,
    Nack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub channel: ChannelModel,
    pub combining: Combining,
    pub normalization: Normalization,
    pub snr_grid_db: Vec<f64>,
    pub n_rx: usize,
    pub dtx_target: f64,
    /// Trials per SNR point and hypothesis.
    pub n_trials: usize,
    /// Noise-only trials used to set the threshold.
    pub calibration_trials: usize,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::NonCoherent,
            channel: ChannelModel::IidPerRb,
            combining: Combining::PerRb,
            normalization: Normalization::EqualTotalEnergy,
            snr_grid_db: default_snr_grid(),
            n_rx: 2,
            dtx_target: 0.01,
            n_trials: 10_000,
            calibration_trials: 100_000,
            rng_seed: 1,
        }
    }
}

/// -10 dB to 10 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=10).map(|i| -10.0 + 2.0 * i as f64).collect()
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtx_target > 0.0 && self.dtx_target <= 1.0) {
            return invalid(format!("DTX target must lie in (0, 1], got {}", self.dtx_target));
        }
        if self.n_rx == 0 {
            return invalid("at least one receive antenna is required");
        }
        if self.n_trials == 0 || self.calibration_trials == 0 {
            return invalid("trial counts must be positive");
        }
        if let Some(s) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return invalid(format!("SNR {s} is not finite"));
        }
        Ok(())
    }
}

/// Per-antenna, per-block complex gains.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub model: ChannelModel,
    /// `gains[antenna][rb]`.
    pub gains: Vec<Vec<Complex64>>,
}

fn cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

impl ChannelRealization {
    pub fn draw<R: Rng>(model: ChannelModel, n_rx: usize, n_rb: usize, rng: &mut R) -> Self {
        let gains = (0..n_rx)
            .map(|_| match model {
                ChannelModel::Flat => vec![cn01(rng); n_rb],
                ChannelModel::IidPerRb => (0..n_rb).map(|_| cn01(rng)).collect(),
            })
            .collect();
        Self { model, gains }
    }
}

#[derive(Clone, Debug)]
enum Detector {
    NonCoherent { ack: Vec<Complex64>, nack: Vec<Complex64> },
    Coherent { is_pilot: Vec<bool>, reference: Vec<Complex64>, ack: Complex64, nack: Complex64 },
}

/// Receiver for one scheme. Received tones are given in the order of
/// [`Receiver::positions`].
#[derive(Clone, Debug)]
pub struct Receiver {
    positions: Vec<usize>,
    block: usize,
    detector: Detector,
}

fn same_positions(a: &SparseSpectrum, b: &SparseSpectrum) -> Result<()> {
    if a.positions() != b.positions() {
        return Err(Error::Consistency("spectra occupy different tones".into()));
    }
    Ok(())
}

fn block_len(n_tones: usize, n_sc: usize, combining: Combining) -> Result<usize> {
    if n_sc == 0 || n_tones % n_sc != 0 {
        return invalid(format!("{n_tones} tones do not split into blocks of {n_sc}"));
    }
    Ok(match combining {
        Combining::PerRb => n_sc,
        Combining::Joint => n_tones,
    })
}

impl Receiver {
    /// Correlates against the ACK and NACK spectra.
    pub fn noncoherent(ack: &SparseSpectrum, nack: &SparseSpectrum, n_sc: usize, combining: Combining) -> Result<Self> {
        same_positions(ack, nack)?;
        Ok(Self {
            positions: ack.positions(),
            block: block_len(ack.len(), n_sc, combining)?,
            detector: Detector::NonCoherent { ack: ack.values(), nack: nack.values() },
        })
    }

    /// `reference` is the coherent spectrum built with data phasor 1: its even
    /// local tones are pilots, its odd ones the data spreading pattern.
    pub fn coherent(
        reference: &SparseSpectrum,
        n_sc: usize,
        ack: Complex64,
        nack: Complex64,
        combining: Combining,
    ) -> Result<Self> {
        if n_sc % 2 != 0 {
            return invalid("coherent blocks need an even number of tones");
        }
        let block = block_len(reference.len(), n_sc, combining)?;
        let is_pilot = (0..reference.len()).map(|t| (t % n_sc) % 2 == 0).collect();
        Ok(Self {
            positions: reference.positions(),
            block,
            detector: Detector::Coherent { is_pilot, reference: reference.values(), ack, nack },
        })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Tentative payload decision and its detection statistic.
    pub fn statistic(&self, y: &[Vec<Complex64>]) -> (Decision, f64) {
        match &self.detector {
            Detector::NonCoherent { ack, nack } => {
                let ma = nc_metric(ack, y, self.block);
                let mn = nc_metric(nack, y, self.block);
                if ma > mn {
                    (Decision::Ack, ma)
                } else {
                    (Decision::Nack, mn)
                }
            }
            Detector::Coherent { is_pilot, reference, ack, nack } => {
                let mut z = Complex64::new(0.0, 0.0);
                let mut energy = 0.0;
                for ya in y {
                    for ((yb, rb), pb) in
                        ya.chunks(self.block).zip(reference.chunks(self.block)).zip(is_pilot.chunks(self.block))
                    {
                        let (mut hp, mut np, mut rd, mut nd) = (Complex64::new(0.0, 0.0), 0.0, Complex64::new(0.0, 0.0), 0.0);
                        for ((yv, rv), &pilot) in yb.iter().zip(rb).zip(pb) {
                            if pilot {
                                hp += rv.conj() * yv;
                                np += 1.0;
                            } else {
                                rd += rv.conj() * yv;
                                nd += 1.0;
                            }
                        }
                        let h = hp / np;
                        let r = rd / nd;
                        z += h.conj() * r;
                        energy += np * h.norm_sqr() + nd * r.norm_sqr();
                    }
                }
                let decision = if (z * ack.conj()).re > (z * nack.conj()).re { Decision::Ack } else { Decision::Nack };
                (decision, energy)
            }
        }
    }

    /// Energy gate followed by the payload decision.
    pub fn decide(&self, y: &[Vec<Complex64>], threshold: f64) -> Decision {
        let (d, m) = self.statistic(y);
        if m < threshold {
            Decision::Dtx
        } else {
            d
        }
    }

    /// Detection from per-antenna received spectra.
    pub fn detect(&self, received: &[SparseSpectrum], threshold: f64) -> Result<Decision> {
        let y = received
            .iter()
            .map(|s| {
                if s.positions() != self.positions {
                    return Err(Error::Consistency("received spectrum does not match the receiver's tones".into()));
                }
                Ok(s.values())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.decide(&y, threshold))
    }
}

fn nc_metric(reference: &[Complex64], y: &[Vec<Complex64>], block: usize) -> f64 {
    y.iter()
        .map(|ya| {
            ya.chunks(block)
                .zip(reference.chunks(block))
                .map(|(yb, rb)| {
                    let c: Complex64 = yb.iter().zip(rb).map(|(yv, x)| x.conj() * yv).sum();
                    c.norm_sqr() / yb.len() as f64
                })
                .sum::<f64>()
        })
        .sum()
}

/// Non-coherent detection: correlate per block with each candidate, sum
/// energies over blocks and antennas, gate against `threshold`.
pub fn detect_noncoherent(
    received: &[SparseSpectrum],
    ack: &SparseSpectrum,
    nack: &SparseSpectrum,
    n_sc: usize,
    combining: Combining,
    threshold: f64,
) -> Result<Decision> {
    Receiver::noncoherent(ack, nack, n_sc, combining)?.detect(received, threshold)
}

/// Coherent detection: least-squares channel estimate from the pilot tones of
/// each block, MRC of the data tones, energy gate, nearest-phasor decision.
pub fn detect_coherent(
    received: &[SparseSpectrum],
    reference: &SparseSpectrum,
    n_sc: usize,
    combining: Combining,
    threshold: f64,
) -> Result<Decision> {
    let ack = UciPayload::new(1, 1, 0)?.coherent_symbol();
    let nack = UciPayload::new(1, 0, 0)?.coherent_symbol();
    Receiver::coherent(reference, n_sc, ack, nack, combining)?.detect(received, threshold)
}

/// Transmit spectra and matching receiver for a scheme.
#[derive(Clone, Debug)]
pub struct Link {
    pub scheme: Scheme,
    pub ack: SparseSpectrum,
    pub nack: SparseSpectrum,
    pub receiver: Receiver,
    /// Tones per resource block.
    pub n_sc: usize,
    /// Amplitude factor applied on top of the SNR.
    pub gain: f64,
}

impl Link {
    pub fn new(scheme: Scheme, combining: Combining, normalization: Normalization) -> Result<Self> {
        let lte = InterlaceConfig::lte();
        let single = InterlaceConfig::new(1, lte.n_sc, 0)?;
        let cfg = if scheme.is_single_rb() { single } else { lte };
        let ack_p = UciPayload::new(1, 1, 0)?;
        let nack_p = UciPayload::new(1, 0, 0)?;
        let rb_pair = fixtures::table1_pairs()[0].to_golay();

        let (ack, nack, receiver) = if scheme.is_coherent() {
            let (spread, half) = fixtures::coherent_quadruple();
            let spread = if scheme.is_single_rb() {
                let plus: QuaternarySequence = "+".parse()?;
                GolayPair::from_quaternary(&plus, &plus)?
            } else {
                spread.to_golay()
            };
            let half = half.to_golay();
            let w1 = pilot_phasor();
            let build = |w2| build_coherent(&cfg, &spread, &half, w1, w2);
            let reference = build(Complex64::new(1.0, 0.0))?;
            let receiver =
                Receiver::coherent(&reference, cfg.n_sc, ack_p.coherent_symbol(), nack_p.coherent_symbol(), combining)?;
            (build(ack_p.coherent_symbol())?, build(nack_p.coherent_symbol())?, receiver)
        } else {
            let build = |p: &UciPayload| -> Result<SparseSpectrum> {
                let shift = p.noncoherent_shift(cfg.n_sc)? as f64;
                if scheme.is_single_rb() {
                    SparseSpectrum::from_positions(cfg.n_sc, &cfg.occupied_indices(), rb_pair.a().cyclic_modulate(shift).as_slice())
                } else {
                    build_noncoherent(&cfg, &fixtures::noncoherent_spreading().to_golay(), &rb_pair, shift)
                }
            };
            let (ack, nack) = (build(&ack_p)?, build(&nack_p)?);
            let receiver = Receiver::noncoherent(&ack, &nack, cfg.n_sc, combining)?;
            (ack, nack, receiver)
        };
        let gain = match (scheme.is_single_rb(), normalization) {
            (true, Normalization::EqualTotalEnergy) => (lte.n_rb as f64).sqrt(),
            _ => 1.0,
        };
        Ok(Self { scheme, ack, nack, receiver, n_sc: cfg.n_sc, gain })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        Self::new(cfg.scheme, cfg.combining, cfg.normalization)
    }

    fn n_rb(&self) -> usize {
        self.ack.len() / self.n_sc
    }

    /// One received realization (per-antenna tone vectors) of `hyp`.
    pub fn receive<R: Rng>(&self, hyp: Hypothesis, channel: ChannelModel, n_rx: usize, snr_db: f64, rng: &mut R) -> Vec<Vec<Complex64>> {
        let h = ChannelRealization::draw(channel, n_rx, self.n_rb(), rng);
        let amp = self.gain * 10f64.powf(snr_db / 20.0);
        let tx: Option<Vec<Complex64>> = match hyp {
            Hypothesis::Dtx => None,
            Hypothesis::Ack => Some(self.ack.values()),
            Hypothesis::Nack => Some(self.nack.values()),
        };
        h.gains
            .iter()
            .map(|ga| {
                (0..self.ack.len())
                    .map(|t| {
                        let noise = cn01(rng);
                        match &tx {
                            Some(x) => ga[t / self.n_sc] * amp * x[t] + noise,
                            None => noise,
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// RNG streams.
const STREAM_SIM: u64 = 0;
const STREAM_CALIBRATION: u64 = 1;
const STREAM_VALIDATION: u64 = 2;

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, stream: u64, snr_index: u32, hyp: Hypothesis, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..20].copy_from_slice(&snr_index.to_le_bytes());
    key[20] = hyp as u8;
    key[24..].copy_from_slice(&trial.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Threshold at which a fraction `target` of `stats` satisfies `s >= threshold`.
/// `stats` are zero for trials whose tentative decision is not ACK.
pub fn quantile_threshold(stats: &[f64], target: f64) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::Empty);
    }
    if target >= 1.0 {
        return Ok(0.0);
    }
    let mut v = stats.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let k = (target * v.len() as f64).round() as usize;
    if k == 0 {
        return Ok(if v[0] > 0.0 { v[0] * (1.0 + 1e-12) } else { f64::MIN_POSITIVE });
    }
    if v[k - 1] <= 0.0 {
        return Err(Error::Calibration(format!(
            "only {} of {} noise-only trials can be declared ACK; target {target} is unattainable",
            v.iter().filter(|s| **s > 0.0).count(),
            v.len()
        )));
    }
    Ok(if k < v.len() { 0.5 * (v[k - 1] + v[k]) } else { v[k - 1] })
}

fn ack_statistic(link: &Link, cfg: &SimConfig, stream: u64, trial: u64) -> f64 {
    let mut rng = trial_rng(cfg.rng_seed, stream, 0, Hypothesis::Dtx, trial);
    let y = link.receive(Hypothesis::Dtx, cfg.channel, cfg.n_rx, 0.0, &mut rng);
    match link.receiver.statistic(&y) {
        (Decision::Ack, m) => m,
        _ => 0.0,
    }
}

/// Energy threshold giving an empirical DTX-to-ACK rate of `cfg.dtx_target`
/// over `cfg.calibration_trials` noise-only trials.
pub fn calibrate_dtx_threshold(cfg: &SimConfig) -> Result<f64> {
    cfg.validate()?;
    let link = Link::from_config(cfg)?;
    let stats: Vec<f64> = (0..cfg.calibration_trials as u64)
        .into_par_iter()
        .map(|t| ack_statistic(&link, cfg, STREAM_CALIBRATION, t))
        .collect();
    quantile_threshold(&stats, cfg.dtx_target)
}

/// Empirical rate with a 95 % Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959_963_984_540_054;

impl Rate {
    pub fn new(count: u64, trials: u64) -> Self {
        assert!(trials > 0 && count <= trials);
        let n = trials as f64;
        let p = count as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let ci_low = if count == 0 { 0.0 } else { (centre - half).max(0.0) };
        let ci_high = if count == trials { 1.0 } else { (centre + half).min(1.0) };
        Self { count, trials, rate: p, ci_low, ci_high }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn overlaps(&self, other: &Rate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    /// Whole interval strictly below `other`'s.
    pub fn separated_below(&self, other: &Rate) -> bool {
        self.ci_high < other.ci_low
    }
}

/// Rate of ACK declarations on fresh noise-only trials.
pub fn validate_dtx(cfg: &SimConfig, threshold: f64, trials: u64) -> Result<Rate> {
    cfg.validate()?;
    let link = Link::from_config(cfg)?;
    let count = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.rng_seed, STREAM_VALIDATION, 0, Hypothesis::Dtx, t);
            let y = link.receive(Hypothesis::Dtx, cfg.channel, cfg.n_rx, 0.0, &mut rng);
            u64::from(link.receiver.decide(&y, threshold) == Decision::Ack)
        })
        .sum();
    Ok(Rate::new(count, trials))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    pub dtx_to_ack: Rate,
    pub nack_to_ack: Rate,
    pub ack_miss: Rate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub threshold: f64,
    pub points: Vec<SimPoint>,
}

/// `[dtx, ack, nack]` decision counts.
fn count_decisions(link: &Link, cfg: &SimConfig, snr_index: u32, snr_db: f64, hyp: Hypothesis, threshold: f64) -> [u64; 3] {
    (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.rng_seed, STREAM_SIM, snr_index, hyp, t);
            let y = link.receive(hyp, cfg.channel, cfg.n_rx, snr_db, &mut rng);
            let mut c = [0u64; 3];
            c[link.receiver.decide(&y, threshold) as usize] = 1;
            c
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

/// Calibrates the threshold, then runs every hypothesis at every SNR.
pub fn run_sim(cfg: &SimConfig) -> Result<SimReport> {
    let threshold = calibrate_dtx_threshold(cfg)?;
    run_sim_with_threshold(cfg, threshold)
}

pub fn run_sim_with_threshold(cfg: &SimConfig, threshold: f64) -> Result<SimReport> {
    cfg.validate()?;
    let link = Link::from_config(cfg)?;
    let n = cfg.n_trials as u64;
    let points = cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let i = i as u32;
            let dtx = count_decisions(&link, cfg, i, snr_db, Hypothesis::Dtx, threshold);
            let ack = count_decisions(&link, cfg, i, snr_db, Hypothesis::Ack, threshold);
            let nack = count_decisions(&link, cfg, i, snr_db, Hypothesis::Nack, threshold);
            SimPoint {
                snr_db,
                dtx_to_ack: Rate::new(dtx[Decision::Ack as usize], n),
                nack_to_ack: Rate::new(nack[Decision::Ack as usize], n),
                ack_miss: Rate::new(n - ack[Decision::Ack as usize], n),
            }
        })
        .collect();
    Ok(SimReport { config: cfg.clone(), threshold, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectra(link: &Link, y: &[Vec<Complex64>]) -> Vec<SparseSpectrum> {
        y.iter()
            .map(|v| SparseSpectrum::from_positions(link.ack.grid_size(), link.receiver.positions(), v).unwrap())
            .collect()
    }

    fn all_links() -> Vec<Link> {
        let schemes = [Scheme::NonCoherent, Scheme::Coherent, Scheme::SingleRbNonCoherent, Scheme::SingleRbCoherent];
        schemes
            .iter()
            .flat_map(|&s| [Combining::PerRb, Combining::Joint].map(|c| Link::new(s, c, Normalization::EqualTotalEnergy).unwrap()))
            .collect()
    }

    #[test]
    fn noiseless_ack_and_nack_decoded() {
        for link in all_links() {
            for trial in 0..20 {
                let mut rng = trial_rng(7, 9, 0, Hypothesis::Ack, trial);
                let h = ChannelRealization::draw(ChannelModel::IidPerRb, 2, link.n_rb(), &mut rng);
                for (want, x) in [(Decision::Ack, &link.ack), (Decision::Nack, &link.nack)] {
                    let y: Vec<Vec<Complex64>> = h
                        .gains
                        .iter()
                        .map(|g| x.values().iter().enumerate().map(|(t, v)| g[t / link.n_sc] * v).collect())
                        .collect();
                    let d = link.receiver.detect(&spectra(&link, &y), 1e-9).unwrap();
                    assert_eq!(d, want, "{:?}", link.scheme);
                }
            }
        }
    }

    #[test]
    fn zero_input_is_dtx() {
        for link in all_links() {
            let y = vec![vec![Complex64::new(0.0, 0.0); link.ack.len()]; 2];
            assert_eq!(link.receiver.detect(&spectra(&link, &y), 1e-12).unwrap(), Decision::Dtx);
        }
    }

    #[test]
    fn free_detectors_match_receiver() {
        let link = Link::new(Scheme::NonCoherent, Combining::PerRb, Normalization::EqualTotalEnergy).unwrap();
        let rx = spectra(&link, &vec![link.ack.values(); 2]);
        assert_eq!(detect_noncoherent(&rx, &link.ack, &link.nack, 12, Combining::PerRb, 1.0).unwrap(), Decision::Ack);
        let coh = Link::new(Scheme::Coherent, Combining::PerRb, Normalization::EqualTotalEnergy).unwrap();
        let rx = spectra(&coh, &vec![coh.nack.values(); 2]);
        let reference = coh.ack.map_values(|i, v| if (i % 120) % 2 == 1 { v / UciPayload::new(1, 1, 0).unwrap().coherent_symbol() } else { v });
        assert_eq!(detect_coherent(&rx, &reference, 12, Combining::PerRb, 1.0).unwrap(), Decision::Nack);
        let wrong = SparseSpectrum::new(2000, vec![(5, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(link.receiver.detect(&[wrong], 1.0).is_err());
    }

    #[test]
    fn noise_statistic_is_unit_mean() {
        // Each per-block correlation energy of CN(0,1) noise is Exp(1).
        let link = Link::new(Scheme::NonCoherent, Combining::PerRb, Normalization::EqualTotalEnergy).unwrap();
        let n = 4000;
        let mean: f64 = (0..n)
            .map(|t| {
                let mut rng = trial_rng(3, 0, 0, Hypothesis::Dtx, t);
                let y = link.receive(Hypothesis::Dtx, ChannelModel::Flat, 1, 0.0, &mut rng);
                nc_metric(&link.ack.values(), &y, 12)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 10.0).abs() < 0.3, "{mean}");
    }

    #[test]
    fn quantile_threshold_cases() {
        assert_eq!(quantile_threshold(&[1.0, 2.0], 1.0).unwrap(), 0.0);
        let stats: Vec<f64> = (1..=100).map(f64::from).collect();
        let t = quantile_threshold(&stats, 0.1).unwrap();
        assert_eq!(stats.iter().filter(|s| **s >= t).count(), 10);
        let t0 = quantile_threshold(&stats, 1e-6).unwrap();
        assert!(t0 > 100.0);
        assert!(quantile_threshold(&[0.0, 0.0, 1.0, 0.0], 0.5).is_err());
        assert!(quantile_threshold(&[], 0.5).is_err());
    }

    #[test]
    fn wilson_interval() {
        let r = Rate::new(0, 100);
        assert_eq!(r.ci_low, 0.0);
        assert!((r.ci_high - 0.037).abs() < 1e-3);
        let r = Rate::new(50, 100);
        assert!((r.ci_low - 0.4038).abs() < 1e-3 && (r.ci_high - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn channel_models() {
        let mut rng = trial_rng(1, 0, 0, Hypothesis::Dtx, 0);
        let flat = ChannelRealization::draw(ChannelModel::Flat, 2, 10, &mut rng);
        assert!(flat.gains.iter().all(|g| g.iter().all(|v| *v == g[0])));
        assert_ne!(flat.gains[0][0], flat.gains[1][0]);
        let iid = ChannelRealization::draw(ChannelModel::IidPerRb, 2, 10, &mut rng);
        assert_ne!(iid.gains[0][0], iid.gains[0][1]);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = SimConfig {
            snr_grid_db: vec![-4.0, 0.0],
            n_trials: 1000,
            calibration_trials: 5000,
            ..SimConfig::default()
        };
        let a = run_sim(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_sim(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn high_snr_is_error_free() {
        for scheme in [Scheme::NonCoherent, Scheme::Coherent, Scheme::SingleRbNonCoherent, Scheme::SingleRbCoherent] {
            let cfg = SimConfig {
                scheme,
                snr_grid_db: vec![40.0],
                n_trials: 1000,
                calibration_trials: 5000,
                ..SimConfig::default()
            };
            let r = run_sim(&cfg).unwrap();
            assert_eq!(r.points[0].ack_miss.count, 0, "{scheme:?}");
            assert_eq!(r.points[0].nack_to_ack.count, 0, "{scheme:?}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut SimConfig)| {
            let mut c = SimConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.dtx_target = 0.0));
        assert!(bad(|c| c.dtx_target = 1.5));
        assert!(bad(|c| c.n_rx = 0));
        assert!(bad(|c| c.n_trials = 0));
        assert!(bad(|c| c.snr_grid_db = vec![f64::NAN]));
        assert!(SimConfig::default().validate().is_ok());
    }
}
