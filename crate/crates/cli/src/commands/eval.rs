use std::path::Path;

use mlood_core::io::{read_matrix, write_atomic, write_json};
use mlood_core::metrics::{evaluate, roc_curve, EvalReport};
use mlood_core::{labelwise_energy, Matrix, ScoreSpec, ScoreVector};

use crate::args::EvalArgs;
use crate::error::{CliError, CliResult, Context};
use crate::settings::Settings;

const DEFAULT_BINS: usize = 40;

fn read_scores(path: &Path) -> CliResult<ScoreVector> {
    let m = read_matrix(path).context(|| format!("reading {}", path.display()))?;
    ScoreVector::from_matrix(&m).context(|| format!("reading scores from {}", path.display()))
}

fn csv_bytes<R: AsRef<[u8]>>(header: &[&str], rows: impl IntoIterator<Item = Vec<R>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::new("Io", e.to_string());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| CliError::new("Io", e.to_string()))
}

pub(crate) fn report_csv(rows: &[(String, String, EvalReport)], extra: Option<(&str, &[String])>) -> CliResult<Vec<u8>> {
    let mut header = EvalReport::CSV_HEADER.to_vec();
    if let Some((name, _)) = extra {
        header.push(name);
    }
    csv_bytes(
        &header,
        rows.iter().enumerate().map(|(i, (m, a, r))| {
            let mut row = r.csv_row(m, a).to_vec();
            if let Some((_, values)) = extra {
                row.push(values[i].clone());
            }
            row
        }),
    )
}

/// Per-label histograms of label-wise energies, with bin edges shared by
/// the two sets. Rows: `label, bin, lo, hi, in_count, ood_count`.
pub fn energy_histograms(in_logits: &Matrix, ood_logits: &Matrix, bins: usize) -> CliResult<Vec<u8>> {
    if in_logits.cols() != ood_logits.cols() {
        return Err(mlood_core::Error::DimensionMismatch(format!(
            "{} in-distribution labels vs {} OOD labels",
            in_logits.cols(),
            ood_logits.cols()
        ))
        .into());
    }
    if bins == 0 {
        return Err(CliError::new("InvalidConfig", "bins must be positive"));
    }
    let e_in = labelwise_energy(in_logits).into_matrix();
    let e_ood = labelwise_energy(ood_logits).into_matrix();
    let mut rows = Vec::new();
    for label in 0..e_in.cols() {
        let a: Vec<f64> = e_in.iter_rows().map(|r| r[label]).collect();
        let b: Vec<f64> = e_ood.iter_rows().map(|r| r[label]).collect();
        let (lo, hi) = a
            .iter()
            .chain(&b)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let bin_of = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
        let mut counts = vec![(0usize, 0usize); bins];
        for &v in &a {
            counts[bin_of(v)].0 += 1;
        }
        for &v in &b {
            counts[bin_of(v)].1 += 1;
        }
        for (i, (ci, co)) in counts.into_iter().enumerate() {
            rows.push(vec![
                label.to_string(),
                i.to_string(),
                (lo + width * i as f64).to_string(),
                (lo + width * (i + 1) as f64).to_string(),
                ci.to_string(),
                co.to_string(),
            ]);
        }
    }
    csv_bytes(&["label", "bin", "lo", "hi", "in_count", "ood_count"], rows)
}

pub fn eval(a: &EvalArgs, s: &Settings) -> CliResult<()> {
    let s_in = read_scores(&s.require(a.in_scores.clone(), "in")?)?;
    let s_ood = read_scores(&s.require(a.ood_scores.clone(), "ood")?)?;
    let out = s.require(a.out.clone(), "out")?;
    let tpr = s.pick_or(a.tpr, "tpr", 0.95)?;
    let report = evaluate(s_in.values(), s_ood.values(), tpr).context(|| "evaluating".to_string())?;

    let mut outputs: Vec<(std::path::PathBuf, Vec<u8>)> = Vec::new();
    if let Some(path) = s.path(a.csv.clone(), "csv")? {
        let (method, agg) = match s.pick(a.method.clone(), "method")? {
            Some(text) => {
                let spec: ScoreSpec = text.parse()?;
                (spec.method_name().to_string(), spec.aggregation_name())
            }
            None => ("unknown".to_string(), "none".to_string()),
        };
        outputs.push((path, report_csv(&[(method, agg, report.clone())], None)?));
    }
    if let Some(path) = s.path(a.roc.clone(), "roc")? {
        let curve = roc_curve(s_in.values(), s_ood.values())?;
        let rows = curve.iter().map(|(f, t)| vec![f.to_string(), t.to_string()]);
        outputs.push((path, csv_bytes(&["fpr", "tpr"], rows)?));
    }
    if let Some(path) = s.path(a.histogram.clone(), "histogram")? {
        let read = |key: &str, flag: &Option<std::path::PathBuf>| -> CliResult<Matrix> {
            let p = s.require(flag.clone(), key)?;
            read_matrix(&p).context(|| format!("reading {}", p.display()))
        };
        let bins = s.pick_or(a.bins, "bins", DEFAULT_BINS)?;
        let bytes = energy_histograms(&read("in-logits", &a.in_logits)?, &read("ood-logits", &a.ood_logits)?, bins)?;
        outputs.push((path, bytes));
    }

    write_json(&out, &report).context(|| format!("writing {}", out.display()))?;
    for (path, bytes) in outputs {
        write_atomic(&path, &bytes).context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
