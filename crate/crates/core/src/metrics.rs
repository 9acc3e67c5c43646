//! Threshold selection and the FPR@TPR / AUROC / AUPR metrics.
//!
//! In-distribution examples are the positive class throughout. A score
//! `>= tau` is classified as in-distribution, so `tau` equal to the
//! `ceil(target * n_in)`-th largest in-distribution score always reaches the
//! requested true positive rate, ties included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    In,
    Out,
}

/// Threshold rule: in-distribution iff `score >= tau`.
pub fn detect(score: f64, tau: f64) -> Decision {
    if score >= tau {
        Decision::In
    } else {
        Decision::Out
    }
}

fn non_empty(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        Err(Error::EmptyScores)
    } else {
        Ok(())
    }
}

fn descending(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// The `ceil(tpr_target * n)`-th largest in-distribution score.
pub fn select_threshold(in_scores: &[f64], tpr_target: f64) -> Result<f64> {
    non_empty(in_scores)?;
    if !(tpr_target > 0.0 && tpr_target <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "tpr target must lie in (0, 1], got {tpr_target}"
        )));
    }
    let n = in_scores.len();
    // guard against 0.95 * n landing a hair above an integer
    let rank = ((tpr_target * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(descending(in_scores)[rank.min(n) - 1])
}

/// Fraction of OOD scores accepted at the threshold reaching `tpr_target`.
pub fn fpr_at_tpr(in_scores: &[f64], ood_scores: &[f64], tpr_target: f64) -> Result<f64> {
    non_empty(ood_scores)?;
    let tau = select_threshold(in_scores, tpr_target)?;
    let accepted = ood_scores.iter().filter(|&&s| s >= tau).count();
    Ok(accepted as f64 / ood_scores.len() as f64)
}

/// Mann-Whitney AUROC with midranks: `P(in > ood) + 0.5 P(in == ood)`.
pub fn auroc(in_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    non_empty(in_scores)?;
    non_empty(ood_scores)?;
    let mut all: Vec<(f64, bool)> = in_scores
        .iter()
        .map(|&s| (s, true))
        .chain(ood_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // ranks are 1-based; a tie group spanning ranks [lo, hi] shares (lo + hi) / 2
    let mut rank_sum_in = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0;
        let n_in_group = all[i..=j].iter().filter(|e| e.1).count();
        rank_sum_in += midrank * n_in_group as f64;
        i = j + 1;
    }
    let n_in = in_scores.len() as f64;
    let n_ood = ood_scores.len() as f64;
    let u = rank_sum_in - n_in * (n_in + 1.0) / 2.0;
    Ok(u / (n_in * n_ood))
}

/// Step-interpolated average precision of ranking `positives` above
/// `negatives`. Each distinct score is one threshold.
pub fn average_precision(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    non_empty(positives)?;
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));

    let n_pos = positives.len() as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < all.len() {
        let s = all[i].0;
        while i < all.len() && all[i].0 == s {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / n_pos;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// AUPR with in-distribution as the positive class.
pub fn aupr(in_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    non_empty(ood_scores)?;
    average_precision(in_scores, ood_scores)
}

/// ROC points `(fpr, tpr)` at every distinct threshold, from `(0, 0)` to
/// `(1, 1)`.
pub fn roc_curve(in_scores: &[f64], ood_scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    non_empty(in_scores)?;
    non_empty(ood_scores)?;
    let mut all: Vec<(f64, bool)> = in_scores
        .iter()
        .map(|&s| (s, true))
        .chain(ood_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (n_in, n_ood) = (in_scores.len() as f64, ood_scores.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let s = all[i].0;
        while i < all.len() && all[i].0 == s {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_ood, tp as f64 / n_in));
    }
    Ok(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl ScoreSummary {
    pub fn of(scores: &[f64]) -> Self {
        let n = scores.len().max(1) as f64;
        ScoreSummary {
            mean: scores.iter().sum::<f64>() / n,
            min: scores.iter().copied().fold(f64::INFINITY, f64::min),
            max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// The three OOD metrics plus the threshold they were computed at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fpr_at_tpr: f64,
    pub auroc: f64,
    pub aupr: f64,
    pub threshold: f64,
    pub tpr_target: f64,
    pub n_in: usize,
    pub n_ood: usize,
    pub in_summary: ScoreSummary,
    pub ood_summary: ScoreSummary,
}

impl EvalReport {
    /// Column order of [`csv_row`](Self::csv_row).
    pub const CSV_HEADER: [&'static str; 8] =
        ["method", "aggregation", "fpr95", "auroc", "aupr", "tau", "n_in", "n_ood"];

    pub fn csv_row(&self, method: &str, aggregation: &str) -> [String; 8] {
        [
            method.to_string(),
            aggregation.to_string(),
            self.fpr_at_tpr.to_string(),
            self.auroc.to_string(),
            self.aupr.to_string(),
            self.threshold.to_string(),
            self.n_in.to_string(),
            self.n_ood.to_string(),
        ]
    }
}

pub fn evaluate(in_scores: &[f64], ood_scores: &[f64], tpr_target: f64) -> Result<EvalReport> {
    non_empty(in_scores)?;
    non_empty(ood_scores)?;
    Ok(EvalReport {
        fpr_at_tpr: fpr_at_tpr(in_scores, ood_scores, tpr_target)?,
        auroc: auroc(in_scores, ood_scores)?,
        aupr: aupr(in_scores, ood_scores)?,
        threshold: select_threshold(in_scores, tpr_target)?,
        tpr_target,
        n_in: in_scores.len(),
        n_ood: ood_scores.len(),
        in_summary: ScoreSummary::of(in_scores),
        ood_summary: ScoreSummary::of(ood_scores),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_to_hundred() -> Vec<f64> {
        (1..=100).map(f64::from).collect()
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(select_threshold(&one_to_hundred(), 0.95).unwrap(), 6.0);
        assert_eq!(select_threshold(&[5.0], 0.95).unwrap(), 5.0);
        assert_eq!(select_threshold(&[3.0, 3.0, 3.0], 0.95).unwrap(), 3.0);
        assert_eq!(select_threshold(&[4.0, 1.0, 9.0], 1.0).unwrap(), 1.0);
        assert!(matches!(select_threshold(&[], 0.95), Err(Error::EmptyScores)));
        assert!(select_threshold(&[1.0], 0.0).is_err());
        assert!(select_threshold(&[1.0], 1.5).is_err());
    }

    #[test]
    fn threshold_reaches_target_for_awkward_sizes() {
        for n in 1..300 {
            let s: Vec<f64> = (0..n).map(f64::from).collect();
            for target in [0.95, 0.9, 0.5, 0.99, 1.0, 0.01] {
                let tau = select_threshold(&s, target).unwrap();
                let tpr = s.iter().filter(|&&v| v >= tau).count() as f64 / n as f64;
                assert!(tpr >= target - 1e-12, "n={n} target={target}");
                // and no higher threshold would also satisfy it
                let next = s.iter().filter(|&&v| v > tau).count() as f64 / n as f64;
                assert!(next < target - 1e-12 || next == tpr);
            }
        }
    }

    #[test]
    fn detect_boundary() {
        assert_eq!(detect(6.0, 6.0), Decision::In);
        assert_eq!(detect(5.9, 6.0), Decision::Out);
    }

    #[test]
    fn fpr_examples() {
        let fpr = fpr_at_tpr(&one_to_hundred(), &[5.5, 6.5, 10.0], 0.95).unwrap();
        assert_eq!(fpr, 2.0 / 3.0);
        assert_eq!(fpr_at_tpr(&[5.0, 6.0], &[1.0, 2.0], 0.95).unwrap(), 0.0);
        assert_eq!(fpr_at_tpr(&one_to_hundred(), &[6.0], 0.95).unwrap(), 1.0);
        assert!(matches!(fpr_at_tpr(&[1.0], &[], 0.95), Err(Error::EmptyScores)));
    }

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[2.0, 3.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(auroc(&[1.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(auroc(&[1.0, 3.0], &[2.0]).unwrap(), 0.5);
        assert!(auroc(&[], &[1.0]).is_err());
    }

    #[test]
    fn aupr_examples() {
        assert_eq!(aupr(&[2.0, 3.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(aupr(&[1.0], &[2.0]).unwrap(), 0.5);
        // one tie group holding everything: precision = n_in / n_total
        assert_eq!(aupr(&[1.0, 1.0, 1.0], &[1.0]).unwrap(), 0.75);
    }

    #[test]
    fn evaluate_examples() {
        let r = evaluate(&[3.0, 4.0, 5.0], &[0.0, 1.0], 0.95).unwrap();
        assert_eq!((r.fpr_at_tpr, r.auroc, r.aupr), (0.0, 1.0, 1.0));
        assert_eq!((r.n_in, r.n_ood), (3, 2));
        let same = [0.1, 0.7, 0.3, 0.9];
        assert_eq!(evaluate(&same, &same, 0.95).unwrap().auroc, 0.5);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"fpr_at_tpr\":0.0"));
    }

    #[test]
    fn roc_curve_endpoints() {
        let pts = roc_curve(&[1.0, 2.0, 2.0], &[0.0, 2.0]).unwrap();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert_eq!(pts[1], (0.5, 2.0 / 3.0));
    }
}
