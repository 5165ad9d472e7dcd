use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use cs_interlace::golay::{enumerate_gcps, QuaternaryPair};
use cs_interlace::interlace::{
    build_coherent, build_noncoherent, build_noncoherent_adjacent, cycling_baseline, map_onto_interlace, q2,
    InterlaceConfig, SparseSpectrum,
};
use cs_interlace::io::{cached_gcps, fmt_num, import_sequences as read_sequences, write_csv, write_csv_file, ImportedSets};
use cs_interlace::linksim::{run_sim, SimConfig, SimReport};
use cs_interlace::metrics::{cm_db, papr_db, synthesize, threshold_grid, FractionalCorrelator};
use cs_interlace::setsearch::{build_sets, default_seeds, verify_sets, SearchOutcome, VerifyReport};
use cs_interlace::{fixtures, Complex64};

use crate::manifest::RunManifest;
use crate::{BuildArgs, EnumArgs, EvalArgs, GeometryArgs, ImportArgs, Layout, SearchArgs, SimArgs, Status, XcorrArgs};

pub fn geometry(g: &GeometryArgs) -> Result<InterlaceConfig> {
    Ok(InterlaceConfig::new(g.n_rb, g.n_sc, g.n_null)?)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_out(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match path {
        Some(p) => Ok(write_csv_file(p, header, rows)?),
        None => Ok(write_csv(std::io::stdout().lock(), header, rows)?),
    }
}

fn finish_manifest(mut m: RunManifest, out: Option<&Path>) -> Result<()> {
    if let Some(p) = out {
        m.output(p);
        m.write_next_to(p)?;
    }
    Ok(())
}

pub fn build_spectrum(a: &BuildArgs) -> Result<SparseSpectrum> {
    let cfg = geometry(&a.geometry)?;
    let phasor = |i: usize| -> Result<Complex64> {
        q2().get(i).copied().with_context(|| format!("phasor index {i} outside 0..4"))
    };
    Ok(match a.layout {
        Layout::Noncoherent | Layout::Adjacent => {
            let pairs = fixtures::table1_pairs();
            let rb = pairs.get(a.pair).with_context(|| format!("pair index {} outside 0..{}", a.pair, pairs.len()))?;
            let spread = fixtures::noncoherent_spreading().to_golay();
            if matches!(a.layout, Layout::Adjacent) {
                build_noncoherent_adjacent(&cfg, &spread, &rb.to_golay(), a.shift)?
            } else {
                build_noncoherent(&cfg, &spread, &rb.to_golay(), a.shift)?
            }
        }
        Layout::Coherent => {
            let (spread, half) = fixtures::coherent_quadruple();
            build_coherent(&cfg, &spread.to_golay(), &half.to_golay(), phasor(a.omega1)?, phasor(a.omega2)?)?
        }
    })
}

pub fn build_interlace(a: &BuildArgs) -> Result<Status> {
    let spec = build_spectrum(a)?;
    let n_idft = spec.grid_size().next_power_of_two().max(4096);
    let papr = papr_db(&synthesize(&spec, n_idft)?)?;
    let mut json = serde_json::to_string(&spec)?;
    json.push('\n');
    write_text(a.out.as_deref(), &json)?;
    eprintln!("{} tones on a grid of {}, PAPR {} dB", spec.len(), spec.grid_size(), fmt_num(papr));
    let mut m = RunManifest::new("build-interlace", a, None)?;
    m.input_fixture("table1.json", fixtures::TABLE1_JSON);
    finish_manifest(m, a.out.as_deref())?;
    Ok(Status::Ok)
}

#[derive(Clone, Copy)]
pub enum Metric {
    Papr,
    Cm,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Papr => "papr_db",
            Metric::Cm => "cm_db",
        }
    }
}

pub fn evaluate(spec: &SparseSpectrum, n_idft: usize, metric: Metric) -> Result<f64> {
    let w = synthesize(spec, n_idft)?;
    Ok(match metric {
        Metric::Papr => papr_db(&w)?,
        Metric::Cm => cm_db(&w)?,
    })
}

/// Sequences of `sets` placed on `cfg`, labelled `(set, index)`.
pub fn spectra_from_sets(sets: &ImportedSets, cfg: &InterlaceConfig) -> Result<Vec<(String, SparseSpectrum)>> {
    let mut out = Vec::new();
    for (name, seqs) in &sets.sets {
        for (i, s) in seqs.iter().enumerate() {
            let spec = if s.sequence.len() == cfg.occupied_count() {
                map_onto_interlace(cfg, s.sequence.as_slice())?
            } else if s.sequence.len() == cfg.n_sc {
                cycling_baseline(cfg, &s.sequence)?
            } else {
                bail!(
                    "{name}[{i}] has length {}; expected {} (whole interlace) or {} (one block)",
                    s.sequence.len(),
                    cfg.occupied_count(),
                    cfg.n_sc
                );
            };
            out.push((format!("{name}[{i}]"), spec));
        }
    }
    Ok(out)
}

pub fn eval(a: &EvalArgs, metric: Metric) -> Result<Status> {
    let mut m = RunManifest::new(if matches!(metric, Metric::Papr) { "eval-papr" } else { "eval-cm" }, a, None)?;
    let mut inputs: Vec<(String, SparseSpectrum)> = Vec::new();
    for path in &a.spectra {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: SparseSpectrum = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        m.input_file(path)?;
        inputs.push((path.display().to_string(), spec));
    }
    if let Some(path) = &a.sequences {
        let sets = read_sequences(path)?;
        m.input_file(path)?;
        inputs.extend(spectra_from_sets(&sets, &geometry(&a.geometry)?)?);
    }
    ensure!(!inputs.is_empty(), "nothing to evaluate: pass spectrum files or --sequences");
    let rows = inputs
        .par_iter()
        .map(|(label, spec)| Ok(vec![label.clone(), fmt_num(evaluate(spec, a.n_idft, metric)?)]))
        .collect::<Result<Vec<_>>>()?;
    csv_out(a.out.as_deref(), &["input", metric.name()], &rows)?;
    finish_manifest(m, a.out.as_deref())?;
    Ok(Status::Ok)
}

/// `(i, j, rho)` for every pair of a set.
pub fn pairwise_xcorr(seqs: &[Vec<Complex64>], u: usize) -> Result<Vec<(usize, usize, f64)>> {
    let Some(first) = seqs.first() else {
        return Ok(Vec::new());
    };
    let corr = FractionalCorrelator::new(first.len(), u)?;
    let idx: Vec<(usize, usize)> = (0..seqs.len()).flat_map(|i| (i + 1..seqs.len()).map(move |j| (i, j))).collect();
    Ok(idx.par_iter().map(|&(i, j)| (i, j, corr.peak(&seqs[i], &seqs[j]))).collect())
}

pub fn eval_xcorr(a: &XcorrArgs) -> Result<Status> {
    let mut m = RunManifest::new("eval-xcorr", a, None)?;
    let sets = match &a.sets {
        Some(p) => {
            m.input_file(p)?;
            read_sequences(p)?
        }
        None => {
            m.input_fixture("table1.json", fixtures::TABLE1_JSON);
            cs_interlace::io::parse_sequences(fixtures::TABLE1_JSON)?
        }
    };
    let mut rows = Vec::new();
    for (name, seqs) in &sets.sets {
        let values: Vec<Vec<Complex64>> = seqs.iter().map(|s| s.sequence.as_slice().to_vec()).collect();
        let pairs = pairwise_xcorr(&values, a.u)?;
        let max = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
        eprintln!("{name}: {} sequences, max rho {}", seqs.len(), fmt_num(max));
        rows.extend(pairs.into_iter().map(|(i, j, r)| vec![name.clone(), i.to_string(), j.to_string(), fmt_num(r)]));
    }
    csv_out(a.out.as_deref(), &["set", "i", "j", "rho"], &rows)?;
    finish_manifest(m, a.out.as_deref())?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct SearchOutput<'a> {
    #[serde(flatten)]
    outcome: &'a SearchOutcome,
    certificate: &'a VerifyReport,
}

pub fn search_sets(a: &SearchArgs) -> Result<Status> {
    let mut m = RunManifest::new("search-sets", a, None)?;
    let seeds: Vec<QuaternaryPair> = match &a.seed_file {
        Some(p) => {
            m.input_file(p)?;
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => match &a.cache_dir {
            Some(dir) => cached_gcps(dir, 12)?,
            None => default_seeds()?,
        },
    };
    let outcome = build_sets(&seeds, a.beta, a.u, a.k)?;
    let certificate = verify_sets(&outcome.sets)?;
    let mut json = serde_json::to_string_pretty(&SearchOutput { outcome: &outcome, certificate: &certificate })?;
    json.push('\n');
    fs::write(&a.out, json).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!(
        "{} of {} pairs admitted from {} seeds; max rho C {}, D {}",
        outcome.sets.len(),
        a.k,
        outcome.seeds_examined,
        fmt_num(certificate.max_corr_c),
        fmt_num(certificate.max_corr_d)
    );
    finish_manifest(m, Some(&a.out))?;
    Ok(if certificate.passed() { Status::Ok } else { Status::ChecksFailed })
}

pub const SIM_HEADER: [&str; 10] = [
    "snr_db",
    "dtx_to_ack",
    "nack_to_ack",
    "ack_miss",
    "ci_low_dtx_to_ack",
    "ci_high_dtx_to_ack",
    "ci_low_nack_to_ack",
    "ci_high_nack_to_ack",
    "ci_low_ack_miss",
    "ci_high_ack_miss",
];

pub fn sim_rows(r: &SimReport) -> Vec<Vec<String>> {
    r.points
        .iter()
        .map(|p| {
            vec![
                fmt_num(p.snr_db),
                fmt_num(p.dtx_to_ack.rate),
                fmt_num(p.nack_to_ack.rate),
                fmt_num(p.ack_miss.rate),
                fmt_num(p.dtx_to_ack.ci_low),
                fmt_num(p.dtx_to_ack.ci_high),
                fmt_num(p.nack_to_ack.ci_low),
                fmt_num(p.nack_to_ack.ci_high),
                fmt_num(p.ack_miss.ci_low),
                fmt_num(p.ack_miss.ci_high),
            ]
        })
        .collect()
}

pub fn simulate_link(a: &SimArgs) -> Result<Status> {
    ensure!(a.snr_step > 0.0, "--snr-step must be positive");
    let grid = threshold_grid(a.snr_from, a.snr_to, a.snr_step);
    let cfg = SimConfig {
        scheme: a.scheme,
        channel: a.channel,
        combining: a.combining,
        normalization: a.normalization,
        snr_grid_db: grid,
        n_rx: a.n_rx,
        dtx_target: a.dtx_target,
        n_trials: a.trials,
        calibration_trials: a.calibration_trials,
        rng_seed: a.seed,
    };
    let report = run_sim(&cfg)?;
    write_csv_file(&a.out, &SIM_HEADER, &sim_rows(&report))?;
    eprintln!("threshold {}", fmt_num(report.threshold));
    let mut m = RunManifest::new("simulate-link", a, Some(a.seed))?;
    m.input_fixture("table1.json", fixtures::TABLE1_JSON);
    finish_manifest(m, Some(&a.out))?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
#[serde(untagged)]
enum ExportedSequence {
    Symbols(String),
    Complex(Vec<[f64; 2]>),
}

pub fn import_sequences(a: &ImportArgs) -> Result<Status> {
    let sets = read_sequences(&a.path)?;
    for (name, seqs) in &sets.sets {
        let len = seqs.first().map_or(0, |s| s.sequence.len());
        println!("{name}: {} sequences of length {len}", seqs.len());
    }
    if let Some(out) = &a.out {
        let doc: serde_json::Map<String, serde_json::Value> = sets
            .sets
            .iter()
            .map(|(name, seqs)| {
                let list: Vec<ExportedSequence> = seqs
                    .iter()
                    .map(|s| match &s.quaternary {
                        Some(q) => ExportedSequence::Symbols(q.to_string()),
                        None => ExportedSequence::Complex(s.sequence.as_slice().iter().map(|v| [v.re, v.im]).collect()),
                    })
                    .collect();
                Ok((name.clone(), serde_json::to_value(list)?))
            })
            .collect::<Result<_>>()?;
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
        let mut m = RunManifest::new("import-sequences", a, None)?;
        m.input_file(&a.path)?;
        finish_manifest(m, Some(out))?;
    }
    Ok(Status::Ok)
}

pub fn enumerate(a: &EnumArgs) -> Result<Status> {
    let pairs = match &a.cache_dir {
        Some(dir) => cached_gcps(dir, a.length)?,
        None => enumerate_gcps(a.length)?,
    };
    eprintln!("{} canonical pairs of length {}", pairs.len(), a.length);
    if let Some(out) = &a.out {
        let mut text = serde_json::to_string(&pairs)?;
        text.push('\n');
        fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
        finish_manifest(RunManifest::new("enumerate-gcps", a, None)?, Some(out))?;
    } else {
        for p in &pairs {
            println!("{} {}", p.a(), p.b());
        }
    }
    Ok(Status::Ok)
}
