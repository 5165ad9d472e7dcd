//! Interlace geometry and the frequency-domain builders.
//!
//! An interlace is `n_rb` resource blocks of `n_sc` contiguous subcarriers,
//! consecutive blocks separated by `n_null` empty tones. Subcarrier index 0 is
//! the first tone of the first block.
//!
//! The complementary builders are parameterizations of
//! [`theorem1_construct`](crate::golay::theorem1_construct):
//!
//! | builder | k | l | m |
//! |---|---|---|---|
//! | non-coherent | `s` | 1 | `s * n_rb / 2` |
//! | non-coherent, adjacent | `2 s` | 1 | `s` |
//! | coherent | `s` | 2 | 1 |
//!
//! where `s = n_sc + n_null` is the block spacing.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::golay::{theorem1_construct, ConstructionParams, GolayPair};
use crate::metrics::{papr_db, synthesize, FractionalCorrelator};
use crate::seqcore::ComplexSequence;

/// Interlace geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterlaceConfig {
    pub n_rb: usize,
    pub n_sc: usize,
    pub n_null: usize,
}

impl InterlaceConfig {
    pub fn new(n_rb: usize, n_sc: usize, n_null: usize) -> Result<Self> {
        if n_rb == 0 {
            return invalid("an interlace needs at least one resource block");
        }
        if n_sc < 2 {
            return invalid("resource blocks need at least two subcarriers");
        }
        Ok(Self { n_rb, n_sc, n_null })
    }

    /// 10 blocks of 12 subcarriers, 108 null tones apart (a 20 MHz LTE interlace).
    pub const fn lte() -> Self {
        Self { n_rb: 10, n_sc: 12, n_null: 108 }
    }

    pub fn spacing(&self) -> usize {
        self.n_sc + self.n_null
    }

    /// Subcarriers from the first to the last occupied tone, inclusive.
    pub fn span(&self) -> usize {
        self.n_rb * self.n_sc + (self.n_rb - 1) * self.n_null
    }

    pub fn occupied_count(&self) -> usize {
        self.n_rb * self.n_sc
    }

    pub fn rb_start(&self, rb: usize) -> usize {
        rb * self.spacing()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        (0..self.n_rb).flat_map(|r| (0..self.n_sc).map(move |n| r * self.spacing() + n)).collect()
    }
}

/// Frequency-domain sequence stored as `(subcarrier, value)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpectrum {
    grid_size: usize,
    entries: Vec<(usize, Complex64)>,
}

impl SparseSpectrum {
    pub fn new(grid_size: usize, entries: Vec<(usize, Complex64)>) -> Result<Self> {
        for (p, &(idx, v)) in entries.iter().enumerate() {
            if idx >= grid_size {
                return invalid(format!("subcarrier {idx} outside grid of {grid_size}"));
            }
            if p > 0 && entries[p - 1].0 >= idx {
                return invalid("subcarrier indices must be strictly increasing");
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite(p));
            }
        }
        Ok(Self { grid_size, entries })
    }

    /// Keeps the nonzero coefficients of a dense sequence.
    pub fn from_dense(seq: &ComplexSequence) -> Self {
        let entries = seq
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self { grid_size: seq.len(), entries }
    }

    /// Places `values` on the given increasing positions.
    pub fn from_positions(grid_size: usize, positions: &[usize], values: &[Complex64]) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::LengthMismatch { left: positions.len(), right: values.len() });
        }
        Self::new(grid_size, positions.iter().copied().zip(values.iter().copied()).collect())
    }

    pub fn to_dense(&self) -> Result<ComplexSequence> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid_size];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        ComplexSequence::new(out)
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    /// Same positions with `f` applied to every value.
    pub fn map_values(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid_size: self.grid_size,
            entries: self.entries.iter().map(|&(i, v)| (i, f(i, v))).collect(),
        }
    }

    /// Maximal runs of consecutive occupied subcarriers as `(start, length)`.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &(idx, _) in &self.entries {
            match runs.last_mut() {
                Some((start, len)) if *start + *len == idx => *len += 1,
                _ => runs.push((idx, 1)),
            }
        }
        runs
    }

    /// Checks that the occupied tones are exactly the interlace of `cfg`.
    pub fn check_interlace(&self, cfg: &InterlaceConfig) -> Result<()> {
        let expected: Vec<(usize, usize)> = (0..cfg.n_rb).map(|r| (cfg.rb_start(r), cfg.n_sc)).collect();
        let runs = self.runs();
        // With n_null = 0 the blocks merge into a single run.
        let ok = if cfg.n_null == 0 {
            runs == vec![(0, cfg.occupied_count())]
        } else {
            runs == expected
        };
        if !ok || self.grid_size < cfg.span() {
            return Err(Error::Consistency(format!("spectrum does not match interlace {cfg:?}")));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SparseSpectrumRepr {
    grid_size: usize,
    entries: Vec<(usize, [f64; 2])>,
}

impl Serialize for SparseSpectrum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SparseSpectrumRepr {
            grid_size: self.grid_size,
            entries: self.entries.iter().map(|&(i, v)| (i, [v.re, v.im])).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseSpectrum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = SparseSpectrumRepr::deserialize(deserializer)?;
        SparseSpectrum::new(r.grid_size, r.entries.into_iter().map(|(i, [re, im])| (i, Complex64::new(re, im))).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// `e^{i pi/4}`: the phasor used for both terms of the non-coherent scheme and
/// for the reference tones of the coherent scheme.
pub fn pilot_phasor() -> Complex64 {
    Complex64::from_polar(1.0, FRAC_PI_4)
}

/// QPSK phasors `{e^{i pi/4}, e^{i 3pi/4}, e^{-i pi/4}, e^{-i 3pi/4}}`.
pub fn q2() -> [Complex64; 4] {
    [FRAC_PI_4, 3.0 * FRAC_PI_4, -FRAC_PI_4, -3.0 * FRAC_PI_4].map(|t| Complex64::from_polar(1.0, t))
}

/// Control payload of one user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UciPayload {
    /// 1 or 2 information bits.
    pub bits: u8,
    pub value: u8,
    /// Base cyclic-shift resource of the user.
    pub user_shift: usize,
}

impl UciPayload {
    pub fn new(bits: u8, value: u8, user_shift: usize) -> Result<Self> {
        if !(1..=2).contains(&bits) {
            return invalid("payload must carry 1 or 2 bits");
        }
        if value >= 1 << bits {
            return invalid(format!("value {value} does not fit in {bits} bit(s)"));
        }
        Ok(Self { bits, value, user_shift })
    }

    /// Parses a bit string such as `"1"` or `"10"`.
    pub fn from_bit_string(bits: &str, user_shift: usize) -> Result<Self> {
        if bits.is_empty() || bits.len() > 2 || !bits.chars().all(|c| c == '0' || c == '1') {
            return invalid(format!("payload bits {bits:?} must be 1 or 2 binary digits"));
        }
        let value = u8::from_str_radix(bits, 2).expect("validated binary digits");
        Self::new(bits.len() as u8, value, user_shift)
    }

    /// Cyclic shift carrying this payload in the non-coherent scheme: one bit
    /// selects between shifts `n_sc/2` apart, two bits among shifts `n_sc/4`
    /// apart, offset by the user's base shift.
    pub fn noncoherent_shift(&self, n_sc: usize) -> Result<usize> {
        let slots = 1usize << self.bits;
        if n_sc % slots != 0 {
            return invalid(format!("{n_sc} subcarriers cannot host {slots} equally spaced shifts"));
        }
        Ok((self.user_shift + self.value as usize * (n_sc / slots)) % n_sc)
    }

    /// Data phasor in the coherent scheme. With one bit, 1 (ACK) maps to
    /// `e^{i pi/4}` and 0 (NACK) to the antipodal `e^{-i 3pi/4}`.
    pub fn coherent_symbol(&self) -> Complex64 {
        let q = q2();
        match (self.bits, self.value) {
            (1, 1) => q[0],
            (1, _) => q[3],
            (_, v) => q[v as usize],
        }
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return invalid(format!("{what} has length {got}, expected {want}"));
    }
    Ok(())
}

fn finish(pair: GolayPair, cfg: &InterlaceConfig) -> Result<(SparseSpectrum, GolayPair)> {
    let spec = SparseSpectrum::from_dense(pair.a());
    spec.check_interlace(cfg)?;
    Ok((spec, pair))
}

/// Non-coherent interlace and its complementary mate. The first `n_rb/2`
/// blocks carry `c` rotated by the elements of `a`, the rest `d` rotated by `b`.
pub fn noncoherent_pair(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    rb_pair: &GolayPair,
    delta: f64,
) -> Result<(SparseSpectrum, GolayPair)> {
    if cfg.n_rb % 2 != 0 {
        return invalid("the non-coherent scheme needs an even number of resource blocks");
    }
    check_len("spreading pair", spread.len(), cfg.n_rb / 2)?;
    check_len("RB pair", rb_pair.len(), cfg.n_sc)?;
    let w = pilot_phasor();
    let s = cfg.spacing();
    let p = ConstructionParams::new(w, w, s, 1, s * cfg.n_rb / 2)?;
    finish(theorem1_construct(spread, &rb_pair.cyclic_modulate(delta)?, &p)?, cfg)
}

pub fn build_noncoherent(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    rb_pair: &GolayPair,
    delta: f64,
) -> Result<SparseSpectrum> {
    Ok(noncoherent_pair(cfg, spread, rb_pair, delta)?.0)
}

/// Variant where `c`- and `d`-bearing blocks alternate.
pub fn noncoherent_adjacent_pair(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    rb_pair: &GolayPair,
    delta: f64,
) -> Result<(SparseSpectrum, GolayPair)> {
    if cfg.n_rb % 2 != 0 {
        return invalid("the non-coherent scheme needs an even number of resource blocks");
    }
    check_len("spreading pair", spread.len(), cfg.n_rb / 2)?;
    check_len("RB pair", rb_pair.len(), cfg.n_sc)?;
    let w = pilot_phasor();
    let s = cfg.spacing();
    let p = ConstructionParams::new(w, w, 2 * s, 1, s)?;
    finish(theorem1_construct(spread, &rb_pair.cyclic_modulate(delta)?, &p)?, cfg)
}

pub fn build_noncoherent_adjacent(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    rb_pair: &GolayPair,
    delta: f64,
) -> Result<SparseSpectrum> {
    Ok(noncoherent_adjacent_pair(cfg, spread, rb_pair, delta)?.0)
}

/// Coherent interlace and its mate. Block `r` carries `omega1 a_r c` on its
/// even local tones and `omega2 b_r d` on its odd ones, so fixing `omega1`
/// turns the even tones into reference symbols.
pub fn coherent_pair(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    half_pair: &GolayPair,
    omega1: Complex64,
    omega2: Complex64,
) -> Result<(SparseSpectrum, GolayPair)> {
    if cfg.n_sc % 2 != 0 {
        return invalid("the coherent scheme needs an even number of subcarriers per block");
    }
    check_len("spreading pair", spread.len(), cfg.n_rb)?;
    check_len("half pair", half_pair.len(), cfg.n_sc / 2)?;
    let p = ConstructionParams::new(omega1, omega2, cfg.spacing(), 2, 1)?;
    finish(theorem1_construct(spread, half_pair, &p)?, cfg)
}

pub fn build_coherent(
    cfg: &InterlaceConfig,
    spread: &GolayPair,
    half_pair: &GolayPair,
    omega1: Complex64,
    omega2: Complex64,
) -> Result<SparseSpectrum> {
    Ok(coherent_pair(cfg, spread, half_pair, omega1, omega2)?.0)
}

/// Maps `values` onto the occupied tones of `cfg` in increasing order.
pub fn map_onto_interlace(cfg: &InterlaceConfig, values: &[Complex64]) -> Result<SparseSpectrum> {
    check_len("sequence", values.len(), cfg.occupied_count())?;
    SparseSpectrum::from_positions(cfg.span(), &cfg.occupied_indices(), values)
}

/// Block `r` carries `base` modulated by shift `r` (per-block cycling).
pub fn cycling_baseline(cfg: &InterlaceConfig, base: &ComplexSequence) -> Result<SparseSpectrum> {
    check_len("base sequence", base.len(), cfg.n_sc)?;
    let values: Vec<Complex64> = (0..cfg.n_rb)
        .flat_map(|r| base.cyclic_modulate(r as f64).into_vec())
        .collect();
    map_onto_interlace(cfg, &values)
}

/// One Zadoff-Chu candidate mapped onto an interlace.
#[derive(Clone, Debug)]
pub struct ZcCandidate {
    pub root: usize,
    pub papr_db: f64,
    pub sequence: ComplexSequence,
    pub spectrum: SparseSpectrum,
}

fn largest_prime_at_most(n: usize) -> Option<usize> {
    (2..=n).rev().find(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0))
}

/// Zadoff-Chu root sequence `exp(-i pi r n (n+1) / L)` cyclically extended to
/// `len` elements. The phase index is reduced mod `2L` in integers.
pub fn zadoff_chu(root: usize, zc_len: usize, len: usize) -> ComplexSequence {
    let two_l = 2 * zc_len as u64;
    let values = (0..len as u64)
        .map(|n| {
            let n = n % zc_len as u64;
            let e = (root as u64 % two_l) * ((n * (n + 1)) % two_l) % two_l;
            Complex64::from_polar(1.0, -PI * e as f64 / zc_len as f64)
        })
        .collect();
    ComplexSequence::new(values).expect("length is positive")
}

/// Zadoff-Chu baseline: every root of the longest prime-length ZC sequence that
/// fits the interlace, cyclically extended to the occupied tones, ranked by
/// PAPR (ties by root) at `n_idft`; the best `set_size` are returned.
pub fn zadoff_chu_set(cfg: &InterlaceConfig, set_size: usize, n_idft: usize) -> Result<Vec<ZcCandidate>> {
    let occupied = cfg.occupied_count();
    let zc_len = largest_prime_at_most(occupied)
        .filter(|&p| p >= 3)
        .ok_or_else(|| Error::InvalidParameter(format!("no odd prime fits {occupied} tones")))?;
    if set_size == 0 || set_size > zc_len - 1 {
        return invalid(format!("set size {set_size} outside 1..={}", zc_len - 1));
    }
    let mut all = (1..zc_len)
        .map(|root| {
            let sequence = zadoff_chu(root, zc_len, occupied);
            let spectrum = map_onto_interlace(cfg, sequence.as_slice())?;
            let papr_db = papr_db(&synthesize(&spectrum, n_idft)?)?;
            Ok(ZcCandidate { root, papr_db, sequence, spectrum })
        })
        .collect::<Result<Vec<_>>>()?;
    all.sort_by(|a, b| a.papr_db.total_cmp(&b.papr_db).then(a.root.cmp(&b.root)));
    all.truncate(set_size);
    Ok(all)
}

/// Largest fractional-shift cross-correlation between the same resource block
/// of two different sequences, over all blocks and pairs. Sequences hold the
/// values of the occupied tones in increasing order.
pub fn per_rb_xcorr(cfg: &InterlaceConfig, seqs: &[ComplexSequence], u: usize) -> Result<f64> {
    for s in seqs {
        check_len("sequence", s.len(), cfg.occupied_count())?;
    }
    let corr = FractionalCorrelator::new(cfg.n_sc, u)?;
    let mut best = 0.0f64;
    for i in 0..seqs.len() {
        for j in i + 1..seqs.len() {
            let (a, b) = (seqs[i].as_slice(), seqs[j].as_slice());
            for (sa, sb) in a.chunks(cfg.n_sc).zip(b.chunks(cfg.n_sc)) {
                best = best.max(corr.peak(sa, sb));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::golay::QuaternaryPair;
    use crate::metrics::{papr_bound_db, DEFAULT_N_IDFT};
    use crate::seqcore::{is_gcp, FLOAT_TOL};

    const SLACK: f64 = 1e-6;

    fn lte_pairs() -> (GolayPair, GolayPair) {
        let t = fixtures::table1();
        (
            fixtures::noncoherent_spreading().to_golay(),
            QuaternaryPair::new(t.c[0].clone(), t.d[0].clone()).unwrap().to_golay(),
        )
    }

    fn papr(spec: &SparseSpectrum) -> f64 {
        papr_db(&synthesize(spec, DEFAULT_N_IDFT).unwrap()).unwrap()
    }

    #[test]
    fn lte_noncoherent_example() {
        let cfg = InterlaceConfig::lte();
        let (spread, rb) = lte_pairs();
        let spec = build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap();
        assert_eq!(spec.len(), 120);
        assert_eq!(spec.runs(), (0..10).map(|r| (120 * r, 12)).collect::<Vec<_>>());
        assert!(papr(&spec) <= papr_bound_db() + SLACK);

        // First half: a_r * c (times the phasor); second half: b_r * d.
        let w = pilot_phasor();
        let (a, b) = (spread.a().as_slice(), spread.b().as_slice());
        let vals = spec.values();
        for r in 0..5 {
            for n in 0..12 {
                assert!((vals[12 * r + n] - w * a[r] * rb.a().as_slice()[n]).norm() < 1e-12);
                assert!((vals[12 * (r + 5) + n] - w * b[r] * rb.b().as_slice()[n]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shifted_noncoherent_keeps_support_and_bound() {
        let cfg = InterlaceConfig::lte();
        let (spread, rb) = lte_pairs();
        let base = build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap();
        let shifted = build_noncoherent(&cfg, &spread, &rb, 6.0).unwrap();
        assert_eq!(base.positions(), shifted.positions());
        let xi6 = |n: usize| Complex64::from_polar(1.0, 2.0 * PI * 6.0 * n as f64 / 12.0);
        for ((i, v0), (_, v6)) in base.entries().iter().zip(shifted.entries()) {
            let local = (i % 120) % 12;
            assert!((v0 * xi6(local) - v6).norm() < 1e-12);
        }
        assert!(papr(&shifted) <= papr_bound_db() + SLACK);
    }

    #[test]
    fn degenerate_concatenation() {
        let cfg = InterlaceConfig::new(2, 2, 0).unwrap();
        let spread = GolayPair::from_quaternary(&"+".parse().unwrap(), &"+".parse().unwrap()).unwrap();
        let rb = GolayPair::from_quaternary(&"++".parse().unwrap(), &"+-".parse().unwrap()).unwrap();
        let spec = build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap();
        let w = pilot_phasor();
        let expect = [1.0, 1.0, 1.0, -1.0];
        assert_eq!(spec.positions(), vec![0, 1, 2, 3]);
        for (v, e) in spec.values().iter().zip(expect) {
            assert!((v - w * e).norm() < 1e-12);
        }
    }

    #[test]
    fn geometry_errors() {
        let (spread, rb) = lte_pairs();
        let odd = InterlaceConfig::new(9, 12, 108).unwrap();
        assert!(build_noncoherent(&odd, &spread, &rb, 0.0).is_err());
        let wrong = InterlaceConfig::new(8, 12, 108).unwrap();
        assert!(build_noncoherent(&wrong, &spread, &rb, 0.0).is_err());
        let (cs, ch) = fixtures::coherent_quadruple();
        let odd_sc = InterlaceConfig::new(10, 13, 107).unwrap();
        assert!(build_coherent(&odd_sc, &cs.to_golay(), &ch.to_golay(), pilot_phasor(), pilot_phasor()).is_err());
        assert!(InterlaceConfig::new(0, 12, 0).is_err());
        assert!(InterlaceConfig::new(2, 1, 0).is_err());
    }

    #[test]
    fn adjacent_variant_matches_support() {
        let cfg = InterlaceConfig::lte();
        let (spread, rb) = lte_pairs();
        let a = build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap();
        let b = build_noncoherent_adjacent(&cfg, &spread, &rb, 0.0).unwrap();
        assert_eq!(a.positions(), b.positions());
        for pair in fixtures::table1_pairs() {
            let spec = build_noncoherent_adjacent(&cfg, &spread, &pair.to_golay(), 0.0).unwrap();
            assert!(papr(&spec) <= papr_bound_db() + SLACK);
        }
        // Blocks alternate c-bearing / d-bearing.
        let w = pilot_phasor();
        let vals = b.values();
        assert!((vals[0] - w * spread.a().as_slice()[0] * rb.a().as_slice()[0]).norm() < 1e-12);
        assert!((vals[12] - w * spread.b().as_slice()[0] * rb.b().as_slice()[0]).norm() < 1e-12);
    }

    #[test]
    fn coherent_example_and_layout() {
        let cfg = InterlaceConfig::lte();
        let (spread, half) = fixtures::coherent_quadruple();
        let (spread, half) = (spread.to_golay(), half.to_golay());
        for &w1 in &q2() {
            for &w2 in &q2() {
                let (spec, mate) = coherent_pair(&cfg, &spread, &half, w1, w2).unwrap();
                assert!(papr(&spec) <= papr_bound_db() + SLACK);
                assert!(is_gcp(&spec.to_dense().unwrap(), mate.b(), 1e-9).unwrap());
                let vals = spec.values();
                for r in 0..10 {
                    for n in 0..6 {
                        let even = w1 * spread.a().as_slice()[r] * half.a().as_slice()[n];
                        let odd = w2 * spread.b().as_slice()[r] * half.b().as_slice()[n];
                        assert!((vals[12 * r + 2 * n] - even).norm() < 1e-12);
                        assert!((vals[12 * r + 2 * n + 1] - odd).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn coherent_multiple_access_keeps_complementarity() {
        let (_, half) = fixtures::coherent_quadruple();
        let half = half.to_golay();
        for delta in -6..12 {
            let m = half.cyclic_modulate(delta as f64).unwrap();
            assert!(is_gcp(m.a(), m.b(), FLOAT_TOL).unwrap());
        }
    }

    #[test]
    fn flexibility_in_null_tones() {
        let (spread, rb) = lte_pairs();
        for n_null in [0, 1, 9 * 12, 200] {
            let cfg = InterlaceConfig::new(10, 12, n_null).unwrap();
            let spec = build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap();
            spec.check_interlace(&cfg).unwrap();
            let n_idft = cfg.span().next_power_of_two().max(DEFAULT_N_IDFT);
            assert!(papr_db(&synthesize(&spec, n_idft).unwrap()).unwrap() <= papr_bound_db() + SLACK);
        }
    }

    #[test]
    fn cycling_baseline_layout() {
        let cfg = InterlaceConfig::lte();
        let t = fixtures::table1();
        let base = t.c[0].to_complex();
        let spec = cycling_baseline(&cfg, &base).unwrap();
        assert_eq!(&spec.values()[..12], base.as_slice());
        let (spread, rb) = lte_pairs();
        assert_eq!(spec.positions(), build_noncoherent(&cfg, &spread, &rb, 0.0).unwrap().positions());
        let worst = t.c.iter()
            .map(|c| papr(&cycling_baseline(&cfg, &c.to_complex()).unwrap()))
            .fold(0.0, f64::max);
        assert!(worst > papr_bound_db(), "{worst}");
    }

    #[test]
    fn zadoff_chu_examples() {
        let cfg = InterlaceConfig::lte();
        assert_eq!(largest_prime_at_most(120), Some(113));
        let all = zadoff_chu_set(&cfg, 112, DEFAULT_N_IDFT).unwrap();
        assert_eq!(all.len(), 112);
        assert!(all.iter().all(|z| z.sequence.is_unimodular(1e-12)));
        assert!(all.windows(2).all(|w| w[0].papr_db <= w[1].papr_db));
        assert!(zadoff_chu_set(&cfg, 113, DEFAULT_N_IDFT).is_err());
        // Cyclic extension repeats the first elements.
        let z = &all[0].sequence;
        assert_eq!(z.as_slice()[113], z.as_slice()[0]);
    }

    #[test]
    fn payload_map() {
        let p = |bits, value, user| UciPayload::new(bits, value, user).unwrap();
        assert_eq!(p(1, 0, 0).noncoherent_shift(12).unwrap(), 0);
        assert_eq!(p(1, 1, 0).noncoherent_shift(12).unwrap(), 6);
        assert_eq!(p(1, 1, 5).noncoherent_shift(12).unwrap(), 11);
        let two: Vec<usize> = (0..4).map(|v| p(2, v, 0).noncoherent_shift(12).unwrap()).collect();
        assert_eq!(two, vec![0, 3, 6, 9]);
        assert!(UciPayload::new(3, 0, 0).is_err());
        assert!(UciPayload::new(1, 2, 0).is_err());
        assert_eq!(UciPayload::from_bit_string("10", 1).unwrap(), p(2, 2, 1));
        assert!(UciPayload::from_bit_string("012", 0).is_err());
        assert_eq!(p(1, 1, 0).coherent_symbol(), q2()[0]);
        assert!((p(1, 1, 0).coherent_symbol() + p(1, 0, 0).coherent_symbol()).norm() < 1e-12);
    }

    #[test]
    fn spectrum_validation_and_json() {
        assert!(SparseSpectrum::new(4, vec![(1, Complex64::new(1.0, 0.0)), (1, Complex64::new(1.0, 0.0))]).is_err());
        assert!(SparseSpectrum::new(4, vec![(4, Complex64::new(1.0, 0.0))]).is_err());
        let s = SparseSpectrum::new(4, vec![(0, Complex64::new(1.0, -0.5)), (3, Complex64::new(0.0, 2.0))]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"grid_size":4,"entries":[[0,[1.0,-0.5]],[3,[0.0,2.0]]]}"#);
        assert_eq!(serde_json::from_str::<SparseSpectrum>(&json).unwrap(), s);
    }
}
