//! Label-wise scores and their aggregation.
//!
//! The label-wise free energy of label `i` is `-E_i(x) = log(1 + e^{f_i(x)})`,
//! i.e. the softplus of the logit. Summing it over all labels gives the
//! JointEnergy score; taking the maximum gives MaxEnergy. The remaining
//! functions are the logit and probability baselines, all oriented so that
//! larger means more in-distribution.
//!
//! Row reductions always run in label-index order, so the top-`K` sum and the
//! full sum are bit-identical.

use crate::error::{Error, Result};
use crate::harness::model::LinearModel;
use crate::matrix::Matrix;
use crate::method::Aggregator;
use crate::scores::{LabelwiseScores, ScoreVector};

/// `log(1 + e^x)` without overflow for any finite `x`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic sigmoid, evaluated on the side that cannot overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn labelwise(logits: &Matrix, f: impl Fn(f64) -> f64) -> LabelwiseScores {
    LabelwiseScores::new(logits.map(f).expect("bounded map of finite values"))
}

fn vector(values: Vec<f64>) -> ScoreVector {
    ScoreVector::new(values).expect("finite reduction of finite values")
}

/// Entry `(n, i)` is `softplus(logit(n, i))`, always strictly positive.
pub fn labelwise_energy(logits: &Matrix) -> LabelwiseScores {
    labelwise(logits, softplus)
}

/// Sum of label-wise energies per row.
pub fn joint_energy(logits: &Matrix) -> ScoreVector {
    vector(labelwise_energy(logits).matrix().map_rows(row_sum))
}

/// Largest label-wise energy per row.
pub fn max_energy(logits: &Matrix) -> Result<ScoreVector> {
    aggregate(&labelwise_energy(logits), Aggregator::Max)
}

/// Sum of the `k` largest label-wise energies per row.
pub fn topk_joint_energy(logits: &Matrix, k: usize) -> Result<ScoreVector> {
    aggregate(&labelwise_energy(logits), Aggregator::TopK(k))
}

pub fn max_logit(logits: &Matrix) -> Result<ScoreVector> {
    non_empty_labels(logits.cols())?;
    Ok(vector(logits.map_rows(row_max)))
}

pub fn sum_logit(logits: &Matrix) -> ScoreVector {
    vector(logits.map_rows(row_sum))
}

/// Maximum softmax probability over the label logits.
pub fn msp(logits: &Matrix) -> Result<ScoreVector> {
    non_empty_labels(logits.cols())?;
    Ok(vector(logits.map_rows(|r| {
        let m = row_max(r);
        // the max term contributes exp(0) = 1, so the max probability is 1 / sum
        1.0 / r.iter().map(|&f| (f - m).exp()).sum::<f64>()
    })))
}

/// Per-label sigmoid probabilities.
pub fn sigmoid_prob(logits: &Matrix) -> LabelwiseScores {
    labelwise(logits, sigmoid)
}

/// ODIN label-wise scores from precomputed logits: `sigmoid(f / T)`.
///
/// Logits carry no input gradient, so any `epsilon > 0` is rejected.
pub fn odin_from_logits(logits: &Matrix, temperature: f64, epsilon: f64) -> Result<LabelwiseScores> {
    check_temperature(temperature)?;
    if epsilon != 0.0 {
        return Err(Error::PerturbationUnsupported("precomputed logits"));
    }
    Ok(labelwise(logits, |f| sigmoid(f / temperature)))
}

/// Perturbs each input toward higher confidence on its top label.
///
/// The top label is the first index of the largest logit. The step is
/// `x - epsilon * sign(grad_x l)` where `l` is the binary cross-entropy of the
/// top label toward target 1; `sign(0) = 0`. Inputs are not clamped.
pub fn odin_perturb(model: &LinearModel, inputs: &Matrix, epsilon: f64) -> Result<Matrix> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidConfig(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let logits = model.forward(inputs)?;
    if epsilon == 0.0 {
        return Ok(inputs.clone());
    }
    let mut data = Vec::with_capacity(inputs.rows() * inputs.cols());
    for (x, f) in inputs.iter_rows().zip(logits.iter_rows()) {
        let top = argmax(f);
        let grad = model.bce_input_grad(x, top, 1.0)?;
        data.extend(x.iter().zip(&grad).map(|(xj, gj)| xj - epsilon * sign(*gj)));
    }
    Matrix::new(inputs.rows(), inputs.cols(), data)
}

/// ODIN label-wise scores `sigmoid(f_i(x_hat) / T)` on perturbed inputs.
pub fn odin_labelwise(
    model: &LinearModel,
    inputs: &Matrix,
    temperature: f64,
    epsilon: f64,
) -> Result<LabelwiseScores> {
    check_temperature(temperature)?;
    let perturbed = odin_perturb(model, inputs, epsilon)?;
    let logits = model.forward(&perturbed)?;
    Ok(labelwise(&logits, |f| sigmoid(f / temperature)))
}

/// ODIN score under max aggregation.
pub fn odin(model: &LinearModel, inputs: &Matrix, temperature: f64, epsilon: f64) -> Result<ScoreVector> {
    aggregate(&odin_labelwise(model, inputs, temperature, epsilon)?, Aggregator::Max)
}

/// Reduces label-wise scores row by row.
pub fn aggregate(scores: &LabelwiseScores, aggregator: Aggregator) -> Result<ScoreVector> {
    let m = scores.matrix();
    let k = m.cols();
    match aggregator {
        Aggregator::Max => {
            non_empty_labels(k)?;
            Ok(vector(m.map_rows(row_max)))
        }
        Aggregator::Sum => Ok(vector(m.map_rows(row_sum))),
        Aggregator::TopK(top) => {
            if top == 0 || top > k {
                return Err(Error::InvalidK { k: top, max: k });
            }
            Ok(vector(m.map_rows(|r| row_topk_sum(r, top))))
        }
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("temperature must be > 0, got {t}")))
    }
}

fn non_empty_labels(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidK { k: 1, max: 0 })
    } else {
        Ok(())
    }
}

pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(r: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in r.iter().enumerate().skip(1) {
        if v > r[best] {
            best = i;
        }
    }
    best
}

fn row_sum(r: &[f64]) -> f64 {
    r.iter().sum()
}

fn row_max(r: &[f64]) -> f64 {
    r.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sum of the `k` largest values, accumulated in index order.
///
/// Entries strictly above the k-th largest value are always included; ties
/// at that value fill the remaining slots from the lowest index up.
fn row_topk_sum(r: &[f64], k: usize) -> f64 {
    let mut sorted = r.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let cut = sorted[k - 1];
    let above = sorted.iter().take_while(|&&v| v > cut).count();
    let mut ties_left = k - above;
    let mut acc = 0.0;
    for &v in r {
        if v > cut {
            acc += v;
        } else if v == cut && ties_left > 0 {
            acc += v;
            ties_left -= 1;
        }
    }
    acc
}
