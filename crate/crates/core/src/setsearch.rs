//! Greedy design of GCP sets with low fractional-shift cross-correlation.
//!
//! Seeds are visited in order. Every member of a seed's equivalence orbit is a
//! candidate; it is admitted when its first sequence correlates at most `beta`
//! with every admitted `c` and its second at most `beta` with every admitted
//! `d`. Several members of one orbit may be admitted.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::golay::{enumerate_gcps, QuaternaryPair};
use crate::metrics::FractionalCorrelator;
use crate::seqcore::{is_gcp_exact, QuaternarySequence};

/// Two aligned sets: `(c[i], d[i])` is a GCP for every `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSetPair {
    pub c: Vec<QuaternarySequence>,
    pub d: Vec<QuaternarySequence>,
    pub beta: f64,
    pub u: usize,
}

impl SequenceSetPair {
    pub fn len(&self) -> usize {
        self.c.len().min(self.d.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One admitted candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admission {
    /// Position in the admitted sets.
    pub index: usize,
    pub seed_index: usize,
    /// Orbit transform label, see [`OrbitTransform::label`](crate::golay::OrbitTransform::label).
    pub transform: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub sets: SequenceSetPair,
    pub log: Vec<Admission>,
    pub seeds_examined: usize,
    pub candidates_tested: usize,
}

impl SearchOutcome {
    pub fn reached(&self, k_target: usize) -> bool {
        self.sets.len() >= k_target
    }
}

/// The canonical length-12 quaternary GCP library in lexicographic order.
pub fn default_seeds() -> Result<Vec<QuaternaryPair>> {
    enumerate_gcps(12)
}

fn check_params(beta: f64, u: usize) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return invalid(format!("beta must lie in (0, 1], got {beta}"));
    }
    if u == 0 {
        return invalid("shift grid density u must be at least 1");
    }
    Ok(())
}

fn complex(s: &QuaternarySequence) -> Vec<Complex64> {
    s.symbols().iter().map(|x| x.to_complex()).collect()
}

/// Greedy set construction; stops once `k_target` pairs are admitted or the
/// seeds run out. A short result is a valid outcome.
pub fn build_sets(seeds: &[QuaternaryPair], beta: f64, u: usize, k_target: usize) -> Result<SearchOutcome> {
    check_params(beta, u)?;
    let mut outcome = SearchOutcome {
        sets: SequenceSetPair { c: Vec::new(), d: Vec::new(), beta, u },
        log: Vec::new(),
        seeds_examined: 0,
        candidates_tested: 0,
    };
    let Some(first) = seeds.first() else {
        return Ok(outcome);
    };
    if seeds.iter().any(|s| s.len() != first.len()) {
        return invalid("seed pairs must share one length");
    }
    let corr = FractionalCorrelator::new(first.len(), u)?;
    let mut admitted_c: Vec<Vec<Complex64>> = Vec::new();
    let mut admitted_d: Vec<Vec<Complex64>> = Vec::new();

    'seeds: for (seed_index, seed) in seeds.iter().enumerate() {
        if outcome.sets.len() >= k_target {
            break;
        }
        outcome.seeds_examined += 1;
        for (t, cand) in seed.equivalence_orbit() {
            if outcome.sets.len() >= k_target {
                break 'seeds;
            }
            let duplicate = outcome.sets.c.iter().zip(&outcome.sets.d).any(|(c, d)| c == cand.a() && d == cand.b());
            if duplicate {
                continue;
            }
            outcome.candidates_tested += 1;
            let (cc, cd) = (complex(cand.a()), complex(cand.b()));
            let fits = admitted_c
                .par_iter()
                .zip(admitted_d.par_iter())
                .all(|(ac, ad)| corr.peak(&cc, ac) <= beta && corr.peak(&cd, ad) <= beta);
            if fits {
                outcome.log.push(Admission { index: outcome.sets.len(), seed_index, transform: t.label() });
                outcome.sets.c.push(cand.a().clone());
                outcome.sets.d.push(cand.b().clone());
                admitted_c.push(cc);
                admitted_d.push(cd);
            }
        }
    }
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetName {
    C,
    D,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    CountMismatch { c: usize, d: usize },
    NotComplementary { index: usize },
    Duplicate { set: SetName, i: usize, j: usize },
    Correlation { set: SetName, i: usize, j: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pairs: usize,
    pub beta: f64,
    pub u: usize,
    pub max_corr_c: f64,
    pub max_corr_d: f64,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn max_pairwise(set: &[QuaternarySequence], name: SetName, beta: f64, u: usize) -> Result<(f64, Vec<Violation>)> {
    let Some(first) = set.first() else {
        return Ok((0.0, Vec::new()));
    };
    let corr = FractionalCorrelator::new(first.len(), u)?;
    let seqs: Vec<Vec<Complex64>> = set.iter().map(complex).collect();
    let idx: Vec<(usize, usize)> = (0..set.len()).flat_map(|i| (i + 1..set.len()).map(move |j| (i, j))).collect();
    let results: Vec<(usize, usize, Option<f64>)> = idx
        .par_iter()
        .map(|&(i, j)| {
            let v = (set[i].len() == set[j].len()).then(|| corr.peak(&seqs[i], &seqs[j]));
            (i, j, v)
        })
        .collect();
    let mut max = 0.0f64;
    let mut violations = Vec::new();
    for (i, j, v) in results {
        if set[i] == set[j] {
            violations.push(Violation::Duplicate { set: name, i, j });
        }
        match v {
            Some(value) => {
                max = max.max(value);
                if value > beta {
                    violations.push(Violation::Correlation { set: name, i, j, value });
                }
            }
            None => violations.push(Violation::Correlation { set: name, i, j, value: f64::NAN }),
        }
    }
    Ok((max, violations))
}

/// Rechecks every invariant of `sets` at its stored `(beta, u)`.
pub fn verify_sets(sets: &SequenceSetPair) -> Result<VerifyReport> {
    check_params(sets.beta, sets.u)?;
    let mut violations = Vec::new();
    if sets.c.len() != sets.d.len() {
        violations.push(Violation::CountMismatch { c: sets.c.len(), d: sets.d.len() });
    }
    for (index, (c, d)) in sets.c.iter().zip(&sets.d).enumerate() {
        if !is_gcp_exact(c, d).unwrap_or(false) {
            violations.push(Violation::NotComplementary { index });
        }
    }
    let (max_corr_c, vc) = max_pairwise(&sets.c, SetName::C, sets.beta, sets.u)?;
    let (max_corr_d, vd) = max_pairwise(&sets.d, SetName::D, sets.beta, sets.u)?;
    violations.extend(vc);
    violations.extend(vd);
    Ok(VerifyReport { pairs: sets.len(), beta: sets.beta, u: sets.u, max_corr_c, max_corr_d, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::metrics::fractional_xcorr_max;

    #[test]
    fn table1_verifies() {
        let report = verify_sets(&fixtures::table1()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.pairs, 30);
        assert!(report.max_corr_c <= 0.715 && report.max_corr_d <= 0.715);
    }

    #[test]
    fn finer_grid_reverification() {
        let mut t = fixtures::table1();
        t.u = 256;
        t.beta = 0.715 + 1e-3;
        let report = verify_sets(&t).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn duplicate_flagged() {
        let mut t = fixtures::table1();
        t.c[1] = t.c[0].clone();
        t.d[1] = t.d[0].clone();
        let report = verify_sets(&t).unwrap();
        assert!(report.violations.contains(&Violation::Duplicate { set: SetName::C, i: 0, j: 1 }));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Correlation { set: SetName::D, i: 0, j: 1, .. })));
        assert!((report.max_corr_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn broken_pair_flagged() {
        let mut t = fixtures::table1();
        t.d[3] = t.d[4].clone();
        let report = verify_sets(&t).unwrap();
        assert!(report.violations.contains(&Violation::NotComplementary { index: 3 }));
        t.d.pop();
        assert!(verify_sets(&t).unwrap().violations.contains(&Violation::CountMismatch { c: 30, d: 29 }));
    }

    #[test]
    fn beta_one_admits_two() {
        let seeds = fixtures::table1_pairs();
        let out = build_sets(&seeds[..2], 1.0, 16, 2).unwrap();
        assert_eq!(out.sets.len(), 2);
        assert_eq!(out.seeds_examined, 1);
        assert_eq!((out.log[0].seed_index, out.log[1].seed_index), (0, 0));
    }

    #[test]
    fn admitted_sets_verify_and_are_deterministic() {
        let seeds = fixtures::table1_pairs();
        let a = build_sets(&seeds, 0.715, 32, 12).unwrap();
        let b = build_sets(&seeds, 0.715, 32, 12).unwrap();
        assert_eq!(a, b);
        assert!(verify_sets(&a.sets).unwrap().passed());
        for i in 0..a.sets.len() {
            for j in 0..i {
                let v = fractional_xcorr_max(&a.sets.c[i].to_complex(), &a.sets.c[j].to_complex(), 32).unwrap();
                assert!(v <= 0.715 + 1e-9);
            }
        }
    }

    #[test]
    fn empty_seeds_and_bad_params() {
        assert!(build_sets(&[], 0.5, 8, 3).unwrap().sets.is_empty());
        assert!(build_sets(&[], 0.0, 8, 3).is_err());
        assert!(build_sets(&[], 1.5, 8, 3).is_err());
        assert!(build_sets(&[], 0.5, 0, 3).is_err());
    }
}
