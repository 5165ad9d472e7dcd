//! Sequence algebra shared by every other module.
//!
//! Two sequence types live here. [`QuaternarySequence`] holds symbols from
//! `{+1, -1, +i, -i}` and evaluates autocorrelations exactly over the Gaussian
//! integers. [`ComplexSequence`] is the floating-point workhorse used for
//! constructed (possibly sparse) sequences, synthesis and correlation.
//!
//! A sequence `a = (a_0, ..., a_{N-1})` is identified with the polynomial
//! `a_0 + a_1 z + ... + a_{N-1} z^{N-1}`; on the unit circle that polynomial is
//! the OFDM symbol with `a_n` on subcarrier `n`. Upsampling, convolution and
//! zero padding are polynomial substitution, multiplication and a `z^m` factor.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Gaussian integer used for exact quaternary arithmetic.
pub type GaussInt = Complex<i64>;

/// Default tolerance for floating-point complementarity checks.
pub const FLOAT_TOL: f64 = 1e-9;

/// A unit Gaussian integer, stored as the exponent of `i`.
///
/// The textual form follows the usual convention: `+` is 1, `i` is `sqrt(-1)`,
/// `-` is -1 and `j` is `-sqrt(-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Plus,
    I,
    Minus,
    J,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::Plus, Symbol::I, Symbol::Minus, Symbol::J];

    pub fn from_exponent(e: u8) -> Self {
        Self::ALL[(e & 3) as usize]
    }

    pub fn exponent(self) -> u8 {
        self as u8
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '+' => Some(Symbol::Plus),
            'i' => Some(Symbol::I),
            '-' => Some(Symbol::Minus),
            'j' => Some(Symbol::J),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        ['+', 'i', '-', 'j'][self as usize]
    }

    pub fn to_gaussian(self) -> GaussInt {
        match self {
            Symbol::Plus => GaussInt::new(1, 0),
            Symbol::I => GaussInt::new(0, 1),
            Symbol::Minus => GaussInt::new(-1, 0),
            Symbol::J => GaussInt::new(0, -1),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let g = self.to_gaussian();
        Complex64::new(g.re as f64, g.im as f64)
    }

    pub fn conj(self) -> Self {
        Self::from_exponent(4 - self.exponent())
    }

    pub fn mul(self, other: Symbol) -> Self {
        Self::from_exponent(self.exponent() + other.exponent())
    }
}

/// Sequence over the quaternary alphabet `{+, -, i, j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuaternarySequence(Vec<Symbol>);

impl QuaternarySequence {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self(symbols))
    }

    /// Builds a sequence from `i`-exponents (taken mod 4).
    pub fn from_exponents(exps: &[u8]) -> Result<Self> {
        Self::new(exps.iter().map(|&e| Symbol::from_exponent(e)).collect())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Exact aperiodic autocorrelation at lag `k`.
    pub fn apac(&self, k: isize) -> GaussInt {
        let n = self.0.len();
        let lag = k.unsigned_abs();
        if lag >= n {
            return GaussInt::new(0, 0);
        }
        let mut sum = GaussInt::new(0, 0);
        for i in 0..n - lag {
            // conj(a_i) * a_{i+lag} = i^(e_{i+lag} - e_i)
            let e = 4 + self.0[i + lag].exponent() - self.0[i].exponent();
            sum += Symbol::from_exponent(e).to_gaussian();
        }
        if k < 0 {
            sum.conj()
        } else {
            sum
        }
    }

    /// APAC values for lags `0..N`.
    pub fn apac_vector(&self) -> Vec<GaussInt> {
        (0..self.0.len() as isize).map(|k| self.apac(k)).collect()
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn conjugated(&self) -> Self {
        Self(self.0.iter().map(|s| s.conj()).collect())
    }

    pub fn reverse_conjugate(&self) -> Self {
        Self(self.0.iter().rev().map(|s| s.conj()).collect())
    }

    /// Multiplies every element by `by`.
    pub fn rotated(&self, by: Symbol) -> Self {
        Self(self.0.iter().map(|s| s.mul(by)).collect())
    }

    /// Global-phase representative whose first element is `+`.
    pub fn canonical(&self) -> Self {
        self.rotated(self.0[0].conj())
    }

    pub fn to_complex(&self) -> ComplexSequence {
        ComplexSequence(self.0.iter().map(|s| s.to_complex()).collect())
    }
}

impl fmt::Display for QuaternarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for QuaternarySequence {
    type Err = Error;

    /// Parses `"+-ij"`; commas, whitespace and parentheses are ignored so the
    /// tabulated form `(+,-,i,j)` also parses.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::with_capacity(s.len());
        for (position, c) in s.chars().enumerate() {
            if c.is_whitespace() || matches!(c, ',' | '(' | ')') {
                continue;
            }
            match Symbol::from_char(c) {
                Some(sym) => out.push(sym),
                None => return Err(Error::InvalidSymbol { symbol: c, position }),
            }
        }
        Self::new(out)
    }
}

impl Serialize for QuaternarySequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuaternarySequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Finite complex sequence of length at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSequence(Vec<Complex64>);

impl ComplexSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.0.iter().all(|v| (v.norm() - 1.0).abs() <= tol)
    }

    pub fn apac(&self, k: isize) -> Complex64 {
        let n = self.0.len();
        let lag = k.unsigned_abs();
        if lag >= n {
            return Complex64::new(0.0, 0.0);
        }
        let sum: Complex64 = self.0[..n - lag]
            .iter()
            .zip(&self.0[lag..])
            .map(|(a, b)| a.conj() * b)
            .sum();
        if k < 0 {
            sum.conj()
        } else {
            sum
        }
    }

    /// APAC for lags `0..N`, accumulated over nonzero entries only so that
    /// sparse (interlaced) sequences cost O(nnz^2).
    pub fn apac_all(&self) -> Vec<Complex64> {
        let nz: Vec<(usize, Complex64)> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len()];
        for (p, &(i, vi)) in nz.iter().enumerate() {
            let ci = vi.conj();
            for &(j, vj) in &nz[p..] {
                out[j - i] += ci * vj;
            }
        }
        out
    }

    /// Inserts `k - 1` zeros between consecutive elements (`a(z) -> a(z^k)`).
    pub fn upsample(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("upsampling factor must be at least 1");
        }
        let mut out = vec![Complex64::new(0.0, 0.0); k * (self.0.len() - 1) + 1];
        for (i, v) in self.0.iter().enumerate() {
            out[k * i] = *v;
        }
        Ok(Self(out))
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn conjugated(&self) -> Self {
        Self(self.0.iter().map(|v| v.conj()).collect())
    }

    pub fn reverse_conjugate(&self) -> Self {
        Self(self.0.iter().rev().map(|v| v.conj()).collect())
    }

    /// Linear convolution (polynomial product). Zero coefficients of `self`
    /// are skipped, which keeps upsampled operands cheap.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    /// Prepends `m` zeros (`a(z) -> a(z) z^m`).
    pub fn delayed(&self, m: usize) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        out.extend_from_slice(&self.0);
        Self(out)
    }

    pub fn scaled(&self, w: Complex64) -> Self {
        Self(self.0.iter().map(|v| v * w).collect())
    }

    /// Polynomial sum; the shorter operand is zero-extended.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let zero = Complex64::new(0.0, 0.0);
        Self(
            (0..n)
                .map(|i| *self.0.get(i).unwrap_or(&zero) + *other.0.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    /// Element-wise product with `(xi^0, xi^delta, ..., xi^((N-1) delta))`,
    /// `xi = exp(i 2 pi / N)`: a cyclic shift of the OFDM symbol by `delta`.
    pub fn cyclic_modulate(&self, delta: f64) -> Self {
        let n = self.0.len() as f64;
        Self(
            self.0
                .iter()
                .enumerate()
                .map(|(i, v)| v * Complex64::from_polar(1.0, 2.0 * PI * i as f64 * delta / n))
                .collect(),
        )
    }

    /// Evaluates the sequence polynomial at `z` (Horner).
    pub fn eval_poly(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v)
    }
}

impl Serialize for ComplexSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|v| [v.re, v.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

impl From<&QuaternarySequence> for ComplexSequence {
    fn from(q: &QuaternarySequence) -> Self {
        q.to_complex()
    }
}

/// Aperiodic autocorrelation `sum_i conj(a_i) a_{i+k}`, conjugate-symmetric in `k`.
pub fn apac(a: &ComplexSequence, k: isize) -> Complex64 {
    a.apac(k)
}

/// True iff `|A_a(k) + A_b(k)| <= tol` for every nonzero lag.
pub fn is_gcp(a: &ComplexSequence, b: &ComplexSequence, tol: f64) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if !(tol >= 0.0) {
        return invalid("tolerance must be nonnegative");
    }
    let (ra, rb) = (a.apac_all(), b.apac_all());
    Ok(ra.iter().zip(&rb).skip(1).all(|(x, y)| (x + y).norm() <= tol))
}

/// Exact complementarity test over the Gaussian integers.
pub fn is_gcp_exact(a: &QuaternarySequence, b: &QuaternarySequence) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok((1..a.len() as isize).all(|k| a.apac(k) + b.apac(k) == GaussInt::new(0, 0)))
}

/// Inner product `<a, b> = sum_n conj(a_n) b_n`.
pub fn inner_product(a: &ComplexSequence, b: &ComplexSequence) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x.conj() * y).sum())
}
