use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use cs_interlace::interlace::{
    build_coherent, build_noncoherent, build_noncoherent_adjacent, cycling_baseline, q2, zadoff_chu_set,
    InterlaceConfig, SparseSpectrum,
};
use cs_interlace::io::{fmt_num, write_csv_file};
use cs_interlace::linksim::{run_sim, ChannelModel, Combining, Rate, Scheme, SimConfig, SimReport};
use cs_interlace::metrics::{ccdf, papr_bound_db, threshold_grid, DEFAULT_N_IDFT};
use cs_interlace::{fixtures, Complex64};

use crate::commands::{evaluate, pairwise_xcorr, sim_rows, Metric, SIM_HEADER};
use crate::manifest::RunManifest;
use crate::{Figure, ReproduceArgs, Status};

pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check { name: name.to_string(), ok, detail }
}

/// Labelled waveforms of every scheme compared in the PAPR and CM figures.
fn waveforms() -> Result<Vec<(&'static str, usize, String, SparseSpectrum)>> {
    let cfg = InterlaceConfig::lte();
    let spread = fixtures::noncoherent_spreading().to_golay();
    let t = fixtures::table1();
    let mut out = Vec::new();
    for (i, pair) in fixtures::table1_pairs().iter().enumerate() {
        let rb = pair.to_golay();
        for shift in 0..cfg.n_sc {
            let s = shift as f64;
            out.push(("noncoherent", i, format!("shift {shift}"), build_noncoherent(&cfg, &spread, &rb, s)?));
            out.push(("noncoherent-adjacent", i, format!("shift {shift}"), build_noncoherent_adjacent(&cfg, &spread, &rb, s)?));
            let base = t.c[i].to_complex().cyclic_modulate(s);
            out.push(("cycling", i, format!("shift {shift}"), cycling_baseline(&cfg, &base)?));
        }
    }
    let (cs, ch) = fixtures::coherent_quadruple();
    let (cs, ch) = (cs.to_golay(), ch.to_golay());
    for (i, w1) in q2().into_iter().enumerate() {
        for (j, w2) in q2().into_iter().enumerate() {
            out.push(("coherent", 4 * i + j, format!("omega {i} {j}"), build_coherent(&cfg, &cs, &ch, w1, w2)?));
        }
    }
    for z in zadoff_chu_set(&cfg, 30, DEFAULT_N_IDFT)? {
        out.push(("zadoff-chu", z.root, format!("root {}", z.root), z.spectrum));
    }
    Ok(out)
}

const PROPOSED: [&str; 3] = ["noncoherent", "noncoherent-adjacent", "coherent"];
const SCHEMES: [&str; 5] = ["noncoherent", "noncoherent-adjacent", "coherent", "cycling", "zadoff-chu"];

fn by_scheme(values: &[(&'static str, f64)], scheme: &str) -> Vec<f64> {
    values.iter().filter(|v| v.0 == scheme).map(|v| v.1).collect()
}

fn metric_figure(dir: &Path, metric: Metric, m: &mut RunManifest) -> Result<Vec<Check>> {
    let (stem, label) = match metric {
        Metric::Papr => ("papr", "papr_db"),
        Metric::Cm => ("cm", "cm_db"),
    };
    let wf = waveforms()?;
    let values: Vec<f64> =
        wf.par_iter().map(|(_, _, _, spec)| evaluate(spec, DEFAULT_N_IDFT, metric)).collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = wf
        .iter()
        .zip(&values)
        .map(|((s, i, v, _), x)| vec![s.to_string(), i.to_string(), v.clone(), fmt_num(*x)])
        .collect();
    let path = dir.join(format!("{stem}.csv"));
    write_csv_file(&path, &["scheme", "index", "variant", label], &rows)?;
    m.output(&path);

    let tagged: Vec<(&'static str, f64)> = wf.iter().map(|w| w.0).zip(values.iter().copied()).collect();
    let thresholds = threshold_grid(0.0, 8.0, 0.05);
    let curves = SCHEMES.iter().map(|s| ccdf(&by_scheme(&tagged, s), &thresholds)).collect::<Result<Vec<_>, _>>()?;
    let ccdf_rows: Vec<Vec<String>> = thresholds
        .iter()
        .enumerate()
        .map(|(k, t)| std::iter::once(fmt_num(*t)).chain(curves.iter().map(|c| fmt_num(c.exceed_prob[k]))).collect())
        .collect();
    let header: Vec<&str> = std::iter::once("threshold_db").chain(SCHEMES).collect();
    let ccdf_path = dir.join(format!("{stem}_ccdf.csv"));
    write_csv_file(&ccdf_path, &header, &ccdf_rows)?;
    m.output(&ccdf_path);

    let max = |s: &str| by_scheme(&tagged, s).into_iter().fold(f64::MIN, f64::max);
    let mean = |s: &str| {
        let v = by_scheme(&tagged, s);
        v.iter().sum::<f64>() / v.len() as f64
    };
    Ok(match metric {
        Metric::Papr => {
            let worst = PROPOSED.iter().map(|s| max(s)).fold(f64::MIN, f64::max);
            vec![check(
                "proposed PAPR <= 3.0103 dB",
                worst <= papr_bound_db() + 1e-6,
                format!("max {} dB (cycling {}, Zadoff-Chu {})", fmt_num(worst), fmt_num(max("cycling")), fmt_num(max("zadoff-chu"))),
            )]
        }
        Metric::Cm => {
            let (p, c) = (mean("noncoherent"), mean("cycling"));
            vec![check(
                "proposed CM below cycling baseline",
                p < c && max("noncoherent") < max("cycling"),
                format!("mean {} vs {} dB, gap {} dB", fmt_num(p), fmt_num(c), fmt_num(c - p)),
            )]
        }
    })
}

fn xcorr_figure(dir: &Path, m: &mut RunManifest) -> Result<Vec<Check>> {
    let cfg = InterlaceConfig::lte();
    let t = fixtures::table1();
    let mut rows = Vec::new();
    let mut max_proposed = 0.0f64;
    for (name, set) in [("C", &t.c), ("D", &t.d)] {
        let seqs: Vec<Vec<Complex64>> = set.iter().map(|s| s.to_complex().into_vec()).collect();
        for (i, j, r) in pairwise_xcorr(&seqs, t.u)? {
            max_proposed = max_proposed.max(r);
            rows.push(vec![name.to_string(), i.to_string(), j.to_string(), fmt_num(r)]);
        }
    }
    // Zadoff-Chu: worst resource block for each pair of roots.
    let zc = zadoff_chu_set(&cfg, 30, DEFAULT_N_IDFT)?;
    let mut max_zc = 0.0f64;
    let blocks: Vec<Vec<Vec<Complex64>>> =
        zc.iter().map(|z| z.sequence.as_slice().chunks(cfg.n_sc).map(<[Complex64]>::to_vec).collect()).collect();
    for i in 0..zc.len() {
        for j in i + 1..zc.len() {
            let r = (0..cfg.n_rb)
                .map(|b| pairwise_xcorr(&[blocks[i][b].clone(), blocks[j][b].clone()], t.u).map(|v| v[0].2))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            max_zc = max_zc.max(r);
            rows.push(vec!["zadoff-chu".into(), zc[i].root.to_string(), zc[j].root.to_string(), fmt_num(r)]);
        }
    }
    let path = dir.join("xcorr.csv");
    write_csv_file(&path, &["set", "i", "j", "rho"], &rows)?;
    m.output(&path);
    Ok(vec![
        check("proposed rho <= 0.715", max_proposed <= 0.715 + 1e-9, format!("max {}", fmt_num(max_proposed))),
        check("Zadoff-Chu rho near 0.95", (max_zc - 0.95).abs() <= 0.03, format!("max {}", fmt_num(max_zc))),
    ])
}

fn monotone(rates: &[Rate]) -> bool {
    rates.windows(2).all(|w| w[1].rate <= w[0].rate || w[1].ci_low <= w[0].ci_high)
}

fn sim_figure(dir: &Path, a: &ReproduceArgs, coherent: bool, m: &mut RunManifest) -> Result<Vec<Check>> {
    let (inter, single) = if coherent {
        (Scheme::Coherent, Scheme::SingleRbCoherent)
    } else {
        (Scheme::NonCoherent, Scheme::SingleRbNonCoherent)
    };
    let runs = [
        (inter, ChannelModel::Flat, Combining::Joint),
        (single, ChannelModel::Flat, Combining::Joint),
        (inter, ChannelModel::IidPerRb, Combining::PerRb),
        (single, ChannelModel::IidPerRb, Combining::PerRb),
    ];
    let mut header = vec!["scheme", "channel", "combining", "threshold"];
    header.extend(SIM_HEADER);
    let mut rows = Vec::new();
    let mut reports: Vec<SimReport> = Vec::new();
    for (scheme, channel, combining) in runs {
        let cfg = SimConfig {
            scheme,
            channel,
            combining,
            n_trials: a.trials,
            calibration_trials: a.calibration_trials,
            rng_seed: a.seed,
            ..SimConfig::default()
        };
        let r = run_sim(&cfg)?;
        for row in sim_rows(&r) {
            let mut full = vec![tag(&scheme), tag(&channel), tag(&combining), fmt_num(r.threshold)];
            full.extend(row);
            rows.push(full);
        }
        reports.push(r);
    }
    let path = dir.join(if coherent { "sim_coherent.csv" } else { "sim_noncoherent.csv" });
    write_csv_file(&path, &header, &rows)?;
    m.output(&path);

    let mono = reports.iter().all(|r| {
        monotone(&r.points.iter().map(|p| p.ack_miss).collect::<Vec<_>>())
            && monotone(&r.points.iter().map(|p| p.nack_to_ack).collect::<Vec<_>>())
    });
    let (ri, rs) = (&reports[2], &reports[3]);
    let diversity = ri.points.iter().zip(&rs.points).filter(|(x, _)| x.snr_db >= 0.0).all(|(x, y)| x.ack_miss.rate <= y.ack_miss.rate);
    let flat = reports[0].points.iter().zip(&reports[1].points).all(|(x, y)| x.ack_miss.overlaps(&y.ack_miss));
    Ok(vec![
        check("error rates nonincreasing in SNR", mono, String::new()),
        check("flat fading: interlace and single-RB agree", flat, "95 % intervals of ACK miss overlap".into()),
        check("per-RB fading: interlace ACK miss <= single-RB at SNR >= 0 dB", diversity, String::new()),
    ])
}

/// Kebab-case name of a serializable enum.
fn tag<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

pub fn run(a: &ReproduceArgs) -> Result<Status> {
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let seeded = matches!(a.figure, Figure::SimNoncoherent | Figure::SimCoherent);
    let mut m = RunManifest::new("reproduce", a, seeded.then_some(a.seed))?;
    m.input_fixture("table1.json", fixtures::TABLE1_JSON);
    m.input_fixture("spreading_noncoherent.json", fixtures::NONCOHERENT_JSON);
    m.input_fixture("coherent_quadruple.json", fixtures::COHERENT_JSON);
    let checks = match a.figure {
        Figure::Papr => metric_figure(&a.out_dir, Metric::Papr, &mut m)?,
        Figure::Cm => metric_figure(&a.out_dir, Metric::Cm, &mut m)?,
        Figure::Xcorr => xcorr_figure(&a.out_dir, &mut m)?,
        Figure::SimNoncoherent => sim_figure(&a.out_dir, a, false, &mut m)?,
        Figure::SimCoherent => sim_figure(&a.out_dir, a, true, &mut m)?,
    };
    m.write_next_to(&a.out_dir)?;
    let mut ok = true;
    for c in &checks {
        let line = format!("{} {}{}", if c.ok { "ok  " } else { "FAIL" }, c.name, if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) });
        if c.ok {
            println!("{line}");
        } else {
            eprintln!("{line}");
            ok = false;
        }
    }
    Ok(if ok { Status::Ok } else { Status::ChecksFailed })
}
