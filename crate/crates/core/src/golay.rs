//! Golay complementary pairs: the generalized concatenation/interleaving
//! construction, equivalence orbits and exhaustive quaternary enumeration.
//!
//! Given GCPs `(a, b)` of length N and `(c, d)` of length M, unit phasors
//! `w1, w2` and integers `k, l >= 1`, `m >= 0`, the pair
//!
//! ```text
//! f(z) = w1 a(z^k) c(z^l) + w2 b(z^k) d(z^l) z^m
//! g(z) = w1 a(z^k) rc(d)(z^l) - w2 b(z^k) rc(c)(z^l) z^m
//! ```
//!
//! is again complementary (`rc` = reverse-conjugate). With `k = 1` it reduces
//! to Golay concatenation, with `l = 1, m = 1` and a length-1 `(c, d)` to
//! interleaving; larger `k` and `m` leave gaps of null subcarriers, which is
//! what the interlace builders rely on.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seqcore::{is_gcp, is_gcp_exact, ComplexSequence, QuaternarySequence, FLOAT_TOL};

/// Longest length accepted by the exhaustive enumeration (4^11 canonical sequences).
pub const MAX_ENUM_LEN: usize = 12;

/// A certified complementary pair of complex sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct GolayPair {
    a: ComplexSequence,
    b: ComplexSequence,
}

impl GolayPair {
    /// Verifies complementarity at `tol` before accepting the pair.
    pub fn new(a: ComplexSequence, b: ComplexSequence, tol: f64) -> Result<Self> {
        if !is_gcp(&a, &b, tol)? {
            return Err(Error::NotComplementary);
        }
        Ok(Self { a, b })
    }

    pub fn from_quaternary(a: &QuaternarySequence, b: &QuaternarySequence) -> Result<Self> {
        Ok(QuaternaryPair::new(a.clone(), b.clone())?.to_golay())
    }

    pub fn a(&self) -> &ComplexSequence {
        &self.a
    }

    pub fn b(&self) -> &ComplexSequence {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_parts(self) -> (ComplexSequence, ComplexSequence) {
        (self.a, self.b)
    }

    /// Applies the same cyclic-shift modulation to both members. Integer or not,
    /// the result stays complementary.
    pub fn cyclic_modulate(&self, delta: f64) -> Result<Self> {
        Self::new(self.a.cyclic_modulate(delta), self.b.cyclic_modulate(delta), FLOAT_TOL)
    }

    /// The eight equivalent pairs generated by swapping, reversing both and
    /// reverse-conjugating both members. Every output is re-certified.
    pub fn equivalence_orbit(&self) -> Result<Vec<(OrbitTransform, GolayPair)>> {
        OrbitTransform::ALL
            .iter()
            .map(|t| {
                let (a, b) = t.apply(&self.a, &self.b);
                Ok((*t, GolayPair::new(a, b, FLOAT_TOL)?))
            })
            .collect()
    }
}

/// A complementary pair over the quaternary alphabet, certified exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(QuaternarySequence, QuaternarySequence)", into = "(QuaternarySequence, QuaternarySequence)")]
pub struct QuaternaryPair {
    a: QuaternarySequence,
    b: QuaternarySequence,
}

impl TryFrom<(QuaternarySequence, QuaternarySequence)> for QuaternaryPair {
    type Error = Error;

    fn try_from((a, b): (QuaternarySequence, QuaternarySequence)) -> Result<Self> {
        Self::new(a, b)
    }
}

impl From<QuaternaryPair> for (QuaternarySequence, QuaternarySequence) {
    fn from(p: QuaternaryPair) -> Self {
        (p.a, p.b)
    }
}

impl QuaternaryPair {
    pub fn new(a: QuaternarySequence, b: QuaternarySequence) -> Result<Self> {
        if !is_gcp_exact(&a, &b)? {
            return Err(Error::NotComplementary);
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &QuaternarySequence {
        &self.a
    }

    pub fn b(&self) -> &QuaternarySequence {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_golay(&self) -> GolayPair {
        GolayPair { a: self.a.to_complex(), b: self.b.to_complex() }
    }

    /// Canonical representative: each member rotated to start with `+`, then
    /// the two members sorted.
    pub fn canonical(&self) -> Self {
        let (a, b) = (self.a.canonical(), self.b.canonical());
        if a <= b {
            Self { a, b }
        } else {
            Self { a: b, b: a }
        }
    }

    pub fn equivalence_orbit(&self) -> Vec<(OrbitTransform, QuaternaryPair)> {
        OrbitTransform::ALL
            .iter()
            .map(|t| {
                let (a, b) = t.apply(&self.a, &self.b);
                let pair = QuaternaryPair::new(a, b).expect("orbit transforms preserve complementarity");
                (*t, pair)
            })
            .collect()
    }
}

/// Operations the orbit transforms need from a sequence type.
pub trait Reflect: Clone {
    fn reversed(&self) -> Self;
    fn reverse_conjugate(&self) -> Self;
}

impl Reflect for QuaternarySequence {
    fn reversed(&self) -> Self {
        QuaternarySequence::reversed(self)
    }
    fn reverse_conjugate(&self) -> Self {
        QuaternarySequence::reverse_conjugate(self)
    }
}

impl Reflect for ComplexSequence {
    fn reversed(&self) -> Self {
        ComplexSequence::reversed(self)
    }
    fn reverse_conjugate(&self) -> Self {
        ComplexSequence::reverse_conjugate(self)
    }
}

/// One element of `{id, swap} x {id, reverse} x {id, reverse-conjugate}`.
///
/// The three generators commute and are involutions, so the eight labels form
/// a group and the orbit of any member is the same set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitTransform {
    pub swap: bool,
    pub reverse: bool,
    pub conj_reverse: bool,
}

impl OrbitTransform {
    pub const IDENTITY: OrbitTransform = OrbitTransform { swap: false, reverse: false, conj_reverse: false };

    pub const ALL: [OrbitTransform; 8] = {
        let mut out = [Self::IDENTITY; 8];
        let mut i = 0;
        while i < 8 {
            out[i] = OrbitTransform { swap: i & 4 != 0, reverse: i & 2 != 0, conj_reverse: i & 1 != 0 };
            i += 1;
        }
        out
    };

    pub fn apply<S: Reflect>(&self, a: &S, b: &S) -> (S, S) {
        let (mut x, mut y) = if self.swap { (b.clone(), a.clone()) } else { (a.clone(), b.clone()) };
        if self.reverse {
            x = x.reversed();
            y = y.reversed();
        }
        if self.conj_reverse {
            x = x.reverse_conjugate();
            y = y.reverse_conjugate();
        }
        (x, y)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.swap {
            parts.push("swap");
        }
        if self.reverse {
            parts.push("reverse");
        }
        if self.conj_reverse {
            parts.push("conj-reverse");
        }
        if parts.is_empty() {
            "identity".into()
        } else {
            parts.join("+")
        }
    }
}

/// Parameters `(w1, w2, k, l, m)` of the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructionParams {
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

impl ConstructionParams {
    pub fn new(omega1: Complex64, omega2: Complex64, k: usize, l: usize, m: usize) -> Result<Self> {
        for w in [omega1, omega2] {
            if !((w.norm() - 1.0).abs() <= 1e-12) {
                return invalid(format!("phasor {w} is not unit-modulus"));
            }
        }
        if k == 0 || l == 0 {
            return invalid("upsampling factors k and l must be at least 1");
        }
        Ok(Self { omega1, omega2, k, l, m })
    }
}

/// Builds `(f, g)` from seed pairs `ab` and `cd`; the result is certified
/// before it is returned.
pub fn theorem1_construct(ab: &GolayPair, cd: &GolayPair, p: &ConstructionParams) -> Result<GolayPair> {
    let ak = ab.a.upsample(p.k)?;
    let bk = ab.b.upsample(p.k)?;
    let c = cd.a.upsample(p.l)?;
    let d = cd.b.upsample(p.l)?;
    let rc = cd.a.reverse_conjugate().upsample(p.l)?;
    let rd = cd.b.reverse_conjugate().upsample(p.l)?;

    let f = ak
        .convolve(&c)
        .scaled(p.omega1)
        .add(&bk.convolve(&d).scaled(p.omega2).delayed(p.m));
    let g = ak
        .convolve(&rd)
        .scaled(p.omega1)
        .add(&bk.convolve(&rc).scaled(-p.omega2).delayed(p.m));

    // Certification tolerance grows with the pair energy to absorb rounding.
    let scale = (ab.a.energy() + ab.b.energy()) * (cd.a.energy() + cd.b.energy());
    let tol = FLOAT_TOL * scale.max(1.0);
    if !is_gcp(&f, &g, tol)? {
        return Err(Error::Consistency(format!("constructed pair failed certification for {p:?}")));
    }
    Ok(GolayPair { a: f, b: g })
}

/// Sorted table of canonical quaternary sequences of one length keyed by their
/// nonzero-lag APAC. Complementary mates are found by looking up the negated key.
#[derive(Clone, Debug)]
pub struct GcpLibrary {
    length: usize,
    // (key, canonical index), sorted by key then index
    table: Arc<Vec<(u128, u32)>>,
}

const FIELD_BITS: u32 = 5;
const FIELD_OFFSET: i64 = 16;
const FIELD_MASK: u128 = (1 << FIELD_BITS) - 1;

impl GcpLibrary {
    pub fn build(length: usize) -> Result<Self> {
        check_capacity(length)?;
        let count = 1u32 << (2 * (length - 1));
        let mut table: Vec<(u128, u32)> = (0..count)
            .into_par_iter()
            .map(|idx| (apac_key(&canonical_exponents(length, idx)), idx))
            .collect();
        table.par_sort_unstable();
        Ok(Self { length, table: Arc::new(table) })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// All canonical pairs `(a, b)` with `a <= b`, in lexicographic order.
    pub fn pairs(&self) -> Vec<QuaternaryPair> {
        let mut idx_pairs: Vec<(u32, u32)> = self
            .table
            .par_iter()
            .flat_map_iter(|&(key, i)| {
                self.bucket(negate_key(key, self.length))
                    .iter()
                    .filter(move |&&(_, j)| i <= j)
                    .map(move |&(_, j)| (i, j))
                    .collect::<Vec<_>>()
            })
            .collect();
        idx_pairs.par_sort_unstable();
        idx_pairs.dedup();
        idx_pairs
            .into_iter()
            .map(|(i, j)| QuaternaryPair {
                a: self.sequence(i),
                b: self.sequence(j),
            })
            .collect()
    }

    /// A canonical complementary mate of `a`, if one exists.
    pub fn mate_of(&self, a: &QuaternarySequence) -> Result<Option<QuaternarySequence>> {
        if a.len() != self.length {
            return Err(Error::LengthMismatch { left: a.len(), right: self.length });
        }
        let exps: Vec<u8> = a.symbols().iter().map(|s| s.exponent()).collect();
        let key = apac_key(&exps);
        Ok(self.bucket(negate_key(key, self.length)).first().map(|&(_, j)| self.sequence(j)))
    }

    fn bucket(&self, key: u128) -> &[(u128, u32)] {
        let lo = self.table.partition_point(|&(k, _)| k < key);
        let hi = self.table.partition_point(|&(k, _)| k <= key);
        &self.table[lo..hi]
    }

    fn sequence(&self, idx: u32) -> QuaternarySequence {
        QuaternarySequence::from_exponents(&canonical_exponents(self.length, idx))
            .expect("length is at least 1")
    }
}

fn check_capacity(length: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::Empty);
    }
    if length > MAX_ENUM_LEN {
        return Err(Error::Capacity { length, max: MAX_ENUM_LEN });
    }
    Ok(())
}

// Leading symbol is `+`; the remaining symbols are base-4 digits of `idx`,
// most significant first, so index order is lexicographic order.
fn canonical_exponents(length: usize, idx: u32) -> Vec<u8> {
    let mut out = vec![0u8; length];
    for (p, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = ((idx >> (2 * (length - 1 - p))) & 3) as u8;
    }
    out
}

// Packs the nonzero-lag APAC (re, im) values into 5-bit offset fields. For
// length <= 12 every component lies in [-11, 11].
fn apac_key(exps: &[u8]) -> u128 {
    const RE: [i64; 4] = [1, 0, -1, 0];
    const IM: [i64; 4] = [0, 1, 0, -1];
    let n = exps.len();
    let mut key = 0u128;
    for lag in 1..n {
        let (mut re, mut im) = (0i64, 0i64);
        for i in 0..n - lag {
            let e = ((4 + exps[i + lag] - exps[i]) & 3) as usize;
            re += RE[e];
            im += IM[e];
        }
        key = (key << FIELD_BITS) | (re + FIELD_OFFSET) as u128;
        key = (key << FIELD_BITS) | (im + FIELD_OFFSET) as u128;
    }
    key
}

fn negate_key(key: u128, length: usize) -> u128 {
    let fields = 2 * (length.saturating_sub(1)) as u32;
    let mut out = 0u128;
    for f in (0..fields).rev() {
        let v = (key >> (f * FIELD_BITS)) & FIELD_MASK;
        out = (out << FIELD_BITS) | (2 * FIELD_OFFSET as u128 - v);
    }
    out
}

/// Every quaternary GCP of `length`, canonicalized and deduplicated.
pub fn enumerate_gcps(length: usize) -> Result<Vec<QuaternaryPair>> {
    Ok(GcpLibrary::build(length)?.pairs())
}

/// True iff some quaternary sequence complements `a`.
pub fn is_complementary_sequence(a: &QuaternarySequence) -> Result<bool> {
    check_capacity(a.len())?;
    Ok(GcpLibrary::build(a.len())?.mate_of(a)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::seqcore::apac;
    use std::collections::BTreeSet;

    fn q(s: &str) -> QuaternarySequence {
        s.parse().unwrap()
    }

    fn qp(a: &str, b: &str) -> QuaternaryPair {
        QuaternaryPair::new(q(a), q(b)).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn concatenation_special_case() {
        let ab = qp("+", "+").to_golay();
        let cd = qp("++", "+-").to_golay();
        let p = ConstructionParams::new(one(), one(), 1, 1, 2).unwrap();
        let fg = theorem1_construct(&ab, &cd, &p).unwrap();
        assert_eq!(fg.a(), &q("+++-").to_complex());
        // g = rc(d) followed by -rc(c)
        assert_eq!(fg.b(), &q("-+--").to_complex());
        assert!(is_gcp(fg.a(), fg.b(), 0.0).unwrap());
    }

    #[test]
    fn interleaving_special_case() {
        let ab = qp("++", "+-").to_golay();
        let cd = qp("+", "+").to_golay();
        let p = ConstructionParams::new(one(), one(), 2, 1, 1).unwrap();
        let fg = theorem1_construct(&ab, &cd, &p).unwrap();
        assert_eq!(fg.a(), &q("+++-").to_complex());
        assert!(is_gcp(fg.a(), fg.b(), 0.0).unwrap());
    }

    #[test]
    fn lte_noncoherent_parameters() {
        let s = fixtures::noncoherent_spreading();
        let t = fixtures::table1();
        let rb = QuaternaryPair::new(t.c[0].clone(), t.d[0].clone()).unwrap().to_golay();
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let p = ConstructionParams::new(w, w, 120, 1, 600).unwrap();
        let fg = theorem1_construct(&s.to_golay(), &rb, &p).unwrap();
        let support: Vec<usize> = fg
            .a()
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(i, _)| i)
            .collect();
        let expected: Vec<usize> = (0..10).flat_map(|r| (0..12).map(move |n| 120 * r + n)).collect();
        assert_eq!(support, expected);
        assert!(is_gcp(fg.a(), fg.b(), 1e-9).unwrap());
        assert!((apac(fg.a(), 0).re - 120.0).abs() < 1e-9);
    }

    #[test]
    fn params_are_validated() {
        assert!(ConstructionParams::new(Complex64::new(2.0, 0.0), one(), 1, 1, 0).is_err());
        assert!(ConstructionParams::new(one(), one(), 0, 1, 0).is_err());
        assert!(ConstructionParams::new(one(), one(), 1, 0, 0).is_err());
    }

    #[test]
    fn non_complementary_pair_is_rejected() {
        assert_eq!(QuaternaryPair::new(q("++"), q("++")), Err(Error::NotComplementary));
        assert!(GolayPair::new(q("++").to_complex(), q("++").to_complex(), 1e-9).is_err());
    }

    #[test]
    fn orbit_of_length_two_pair() {
        let p = qp("++", "+-");
        let orbit = p.equivalence_orbit();
        assert_eq!(orbit.len(), 8);
        assert_eq!(orbit[0], (OrbitTransform::IDENTITY, p.clone()));
        for (_, m) in &orbit {
            assert!(is_gcp_exact(m.a(), m.b()).unwrap());
        }
        let golay = p.to_golay().equivalence_orbit().unwrap();
        assert_eq!(golay.len(), 8);
    }

    #[test]
    fn orbit_of_table_pairs_is_closed() {
        let t = fixtures::table1();
        for (c, d) in t.c.iter().zip(&t.d).take(5) {
            let p = QuaternaryPair::new(c.clone(), d.clone()).unwrap();
            let set: BTreeSet<_> = p.equivalence_orbit().into_iter().map(|(_, m)| m).collect();
            for member in &set {
                let again: BTreeSet<_> = member.equivalence_orbit().into_iter().map(|(_, m)| m).collect();
                assert_eq!(again, set);
            }
        }
    }

    #[test]
    fn enumerate_small_lengths() {
        assert_eq!(enumerate_gcps(1).unwrap(), vec![qp("+", "+")]);
        assert_eq!(enumerate_gcps(2).unwrap(), vec![qp("++", "+-"), qp("+i", "+j")]);
        assert_eq!(enumerate_gcps(0), Err(Error::Empty));
        assert!(matches!(enumerate_gcps(13), Err(Error::Capacity { length: 13, max: 12 })));
    }

    // Independent oracle: all ordered pairs of canonical sequences, checked exactly.
    fn brute_force_pairs(length: usize) -> BTreeSet<QuaternaryPair> {
        let count = 1u32 << (2 * (length - 1));
        let seqs: Vec<QuaternarySequence> = (0..count)
            .map(|idx| {
                let mut e = vec![0u8; length];
                let mut x = idx;
                for slot in e.iter_mut().skip(1).rev() {
                    *slot = (x % 4) as u8;
                    x /= 4;
                }
                QuaternarySequence::from_exponents(&e).unwrap()
            })
            .collect();
        let mut out = BTreeSet::new();
        for a in &seqs {
            for b in &seqs {
                if a <= b && is_gcp_exact(a, b).unwrap() {
                    out.insert(QuaternaryPair::new(a.clone(), b.clone()).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for length in 1..=6 {
            let fast: BTreeSet<_> = enumerate_gcps(length).unwrap().into_iter().collect();
            assert_eq!(fast, brute_force_pairs(length), "length {length}");
        }
    }

    #[test]
    fn enumeration_counts_regression() {
        // Frozen from the brute-force oracle above.
        let counts: Vec<usize> = (1..=6).map(|n| enumerate_gcps(n).unwrap().len()).collect();
        assert_eq!(counts, FROZEN_COUNTS);
    }

    const FROZEN_COUNTS: [usize; 6] = [1, 2, 4, 16, 16, 64];

    #[test]
    fn complementary_sequence_examples() {
        assert!(is_complementary_sequence(&q("++")).unwrap());
        assert!(is_complementary_sequence(&q("++-")).unwrap());
        assert!(!is_complementary_sequence(&q("+++")).unwrap());
        let lib = GcpLibrary::build(12).unwrap();
        let t = fixtures::table1();
        let mate = lib.mate_of(&t.c[0]).unwrap().unwrap();
        assert!(is_gcp_exact(&t.c[0], &mate).unwrap());
        assert!(matches!(
            is_complementary_sequence(&"+++++++++++++".parse().unwrap()),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn canonical_pair_is_idempotent() {
        let t = fixtures::table1();
        let p = QuaternaryPair::new(t.c[4].clone(), t.d[4].clone()).unwrap();
        let c = p.canonical();
        assert_eq!(c.canonical(), c);
        assert_eq!(c.a().symbols()[0], crate::seqcore::Symbol::Plus);
        assert_eq!(c.b().symbols()[0], crate::seqcore::Symbol::Plus);
    }
}
