//! File formats: fixed-precision CSV output, sequence import and the on-disk
//! cache of enumerated GCP libraries.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::{self, Deserializer, IgnoredAny, MapAccess, SeqAccess, Visitor};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::golay::{enumerate_gcps, QuaternaryPair};
use crate::seqcore::{ComplexSequence, QuaternarySequence};

/// Tolerance on `|x| = 1` for imported complex sequences.
pub const UNIMODULAR_TOL: f64 = 1e-9;

/// Fixed-point decimal with 9 significant digits.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.8}", 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new leading digit (9.99999999996 -> 10.00000000).
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}

fn io_err(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Writes a header and rows as CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::LengthMismatch { left: row.len(), right: header.len() });
        }
        w.write_record(row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_csv(file, header, rows).map_err(|e| match e {
        Error::Format(m) => io_err(path, m),
        other => other,
    })
}

/// One imported sequence, either a symbol string or `[[re, im], ...]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportedSequence {
    pub sequence: ComplexSequence,
    pub quaternary: Option<QuaternarySequence>,
}

impl<'de> Deserialize<'de> for ImportedSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ImportedSequence;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a symbol string over {+,-,i,j} or an array of [re, im] pairs")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Self::Value, E> {
                let q: QuaternarySequence = s.parse().map_err(E::custom)?;
                Ok(ImportedSequence { sequence: q.to_complex(), quaternary: Some(q) })
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let mut values = Vec::new();
                while let Some([re, im]) = seq.next_element::<[f64; 2]>()? {
                    let v = Complex64::new(re, im);
                    if (v.norm() - 1.0).abs() > UNIMODULAR_TOL {
                        return Err(de::Error::custom(format!(
                            "element {} = ({re}, {im}) is not unimodular",
                            values.len()
                        )));
                    }
                    values.push(v);
                }
                let sequence = ComplexSequence::new(values).map_err(de::Error::custom)?;
                Ok(ImportedSequence { sequence, quaternary: None })
            }
        }
        d.deserialize_any(V)
    }
}

/// Array member of an imported object, or a scalar annotation that is ignored.
enum Field {
    Sequences(Vec<ImportedSequence>),
    Annotation,
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Field;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of sequences or a scalar")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Field, A::Error> {
                let mut out = Vec::new();
                while let Some(s) = seq.next_element()? {
                    out.push(s);
                }
                Ok(Field::Sequences(out))
            }

            fn visit_bool<E>(self, _: bool) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_i64<E>(self, _: i64) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_u64<E>(self, _: u64) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_f64<E>(self, _: f64) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_str<E>(self, _: &str) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_unit<E>(self) -> std::result::Result<Field, E> {
                Ok(Field::Annotation)
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Field, A::Error> {
                while map.next_entry::<IgnoredAny, IgnoredAny>()?.is_some() {}
                Ok(Field::Annotation)
            }
        }
        d.deserialize_any(V)
    }
}

/// Named groups of imported sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportedSets {
    pub sets: Vec<(String, Vec<ImportedSequence>)>,
}

impl<'de> Deserialize<'de> for ImportedSets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ImportedSets;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of sequences or an object of named sequence arrays")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(s) = seq.next_element()? {
                    out.push(s);
                }
                Ok(ImportedSets { sets: vec![("sequences".into(), out)] })
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut sets = Vec::new();
                while let Some((name, field)) = map.next_entry::<String, Field>()? {
                    if let Field::Sequences(s) = field {
                        sets.push((name, s));
                    }
                }
                Ok(ImportedSets { sets })
            }
        }
        d.deserialize_any(V)
    }
}

impl ImportedSets {
    pub fn total(&self) -> usize {
        self.sets.iter().map(|s| s.1.len()).sum()
    }

    pub fn get(&self, name: &str) -> Option<&[ImportedSequence]> {
        self.sets.iter().find(|s| s.0 == name).map(|s| s.1.as_slice())
    }
}

/// Parses and validates an import document: every entry unimodular, at least
/// one sequence, equal lengths within each set.
pub fn parse_sequences(text: &str) -> Result<ImportedSets> {
    let sets: ImportedSets = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if sets.total() == 0 {
        return Err(Error::Format("no sequences found".into()));
    }
    for (name, seqs) in &sets.sets {
        if let Some(first) = seqs.first() {
            if let Some((i, s)) = seqs.iter().enumerate().find(|(_, s)| s.sequence.len() != first.sequence.len()) {
                return Err(Error::Format(format!(
                    "set {name:?}: entry {i} has length {}, entry 0 has length {}",
                    s.sequence.len(),
                    first.sequence.len()
                )));
            }
        }
    }
    Ok(sets)
}

pub fn import_sequences(path: &Path) -> Result<ImportedSets> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_sequences(&text).map_err(|e| io_err(path, e))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Canonical GCP library of `length`, read from `dir/gcp-<length>.json` when
/// present, enumerated and stored otherwise. Cached pairs are re-certified on load.
pub fn cached_gcps(dir: &Path, length: usize) -> Result<Vec<QuaternaryPair>> {
    let path = dir.join(format!("gcp-{length}.json"));
    if path.exists() {
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let pairs: Vec<QuaternaryPair> = serde_json::from_str(&text).map_err(|e| io_err(&path, e))?;
        if pairs.iter().any(|p| p.len() != length) {
            return Err(io_err(&path, format!("cache holds pairs of the wrong length (expected {length})")));
        }
        return Ok(pairs);
    }
    let pairs = enumerate_gcps(length)?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let json = serde_json::to_vec(&pairs).map_err(|e| Error::Format(e.to_string()))?;
    write_atomic(&path, &json)?;
    Ok(pairs)
}
