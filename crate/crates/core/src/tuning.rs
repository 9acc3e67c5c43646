//! Synthetic validation data and grid search for ODIN and Mahalanobis.
//!
//! No real OOD data is used for tuning. The validation OOD set is the union
//! of five synthesized parts with equal row counts: Gaussian noise, uniform
//! noise on `[-1, 1]`, arithmetic and geometric means of random pairs of
//! in-distribution rows, and rows whose 16 contiguous coordinate blocks are
//! shuffled (the last block absorbs `d % 16`).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::baselines::{mahalanobis_score, FeatureSource, MahalanobisModel};
use crate::error::{Error, Result};
use crate::harness::LinearModel;
use crate::matrix::Matrix;
use crate::method::Aggregator;
use crate::metrics::fpr_at_tpr;
use crate::rng::Rng;
use crate::scoring::{aggregate, odin_labelwise};

pub const PERMUTATION_BLOCKS: usize = 16;

/// ODIN temperature grid.
pub const ODIN_TEMPERATURES: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Mahalanobis perturbation grid, in the order it is usually printed.
pub const MAHALANOBIS_EPSILONS: [f64; 6] = [0.0, 0.0005, 0.0014, 0.001, 0.002, 0.005];

const TUNING_TPR: f64 = 0.95;

/// 21 evenly spaced magnitudes from 0 to 0.004.
pub fn odin_epsilons() -> Vec<f64> {
    // i / 5000 is correctly rounded, so the endpoints are exactly 0.0002 and 0.004
    (0..=20).map(|i| f64::from(i) / 5000.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationPart {
    GaussianNoise,
    UniformNoise,
    PairArithMean,
    PairGeomMean,
    BlockPermuted,
}

impl ValidationPart {
    pub const ALL: [ValidationPart; 5] = [
        ValidationPart::GaussianNoise,
        ValidationPart::UniformNoise,
        ValidationPart::PairArithMean,
        ValidationPart::PairGeomMean,
        ValidationPart::BlockPermuted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ValidationPart::GaussianNoise => "gaussian_noise",
            ValidationPart::UniformNoise => "uniform_noise",
            ValidationPart::PairArithMean => "pair_arith_mean",
            ValidationPart::PairGeomMean => "pair_geom_mean",
            ValidationPart::BlockPermuted => "block_permuted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationSet {
    pub parts: BTreeMap<ValidationPart, Matrix>,
    pub n_per_part: usize,
    pub seed: u64,
}

impl ValidationSet {
    pub fn part(&self, p: ValidationPart) -> &Matrix {
        &self.parts[&p]
    }

    /// All parts stacked in [`ValidationPart::ALL`] order.
    pub fn union(&self) -> Matrix {
        let parts: Vec<&Matrix> = ValidationPart::ALL.iter().map(|p| &self.parts[p]).collect();
        Matrix::vstack(&parts).expect("parts share a width")
    }
}

/// Boundaries of the 16 contiguous blocks of a `d`-vector.
pub fn block_bounds(d: usize) -> Vec<(usize, usize)> {
    let size = d / PERMUTATION_BLOCKS;
    (0..PERMUTATION_BLOCKS)
        .map(|b| {
            let end = if b + 1 == PERMUTATION_BLOCKS { d } else { (b + 1) * size };
            (b * size, end)
        })
        .collect()
}

/// Reorders the blocks of `row` into `order`.
pub fn permute_blocks(row: &[f64], order: &[usize]) -> Vec<f64> {
    let bounds = block_bounds(row.len());
    order.iter().flat_map(|&b| row[bounds[b].0..bounds[b].1].iter().copied()).collect()
}

fn distinct_pair(n: usize, rng: &mut Rng) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn pairwise(in_inputs: &Matrix, n: usize, rng: &mut Rng, f: impl Fn(f64, f64) -> f64) -> Matrix {
    let d = in_inputs.cols();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let (a, b) = distinct_pair(in_inputs.rows(), rng);
        let (ra, rb) = (in_inputs.row(a).expect("in range"), in_inputs.row(b).expect("in range"));
        data.extend(ra.iter().zip(rb).map(|(&x, &y)| f(x, y)));
    }
    Matrix::new(n, d, data).expect("means of finite values")
}

/// Builds the five validation parts, `n_per_part` rows each.
pub fn synth_validation(in_inputs: &Matrix, n_per_part: usize, rng: &Rng) -> Result<ValidationSet> {
    let (rows, d) = in_inputs.shape();
    if rows < 2 {
        return Err(Error::TooFewRows { needed: 2, got: rows });
    }
    if d < PERMUTATION_BLOCKS {
        return Err(Error::InvalidConfig(format!(
            "block permutation needs at least {PERMUTATION_BLOCKS} columns, got {d}"
        )));
    }
    if let Some(&value) = in_inputs.as_slice().iter().find(|&&v| v < 0.0) {
        return Err(Error::NonNegativityViolated { value });
    }

    let mut parts = BTreeMap::new();

    let mut r = rng.split(ValidationPart::GaussianNoise.name());
    let data = (0..n_per_part * d).map(|_| StandardNormal.sample(&mut r)).collect();
    parts.insert(ValidationPart::GaussianNoise, Matrix::new(n_per_part, d, data)?);

    let mut r = rng.split(ValidationPart::UniformNoise.name());
    let data = (0..n_per_part * d).map(|_| r.random_range(-1.0..=1.0)).collect();
    parts.insert(ValidationPart::UniformNoise, Matrix::new(n_per_part, d, data)?);

    // both mean parts combine the same pairs, row for row
    let mut r = rng.split("pairs");
    parts.insert(
        ValidationPart::PairArithMean,
        pairwise(in_inputs, n_per_part, &mut r, |a, b| (a + b) / 2.0),
    );

    let mut r = rng.split("pairs");
    parts.insert(
        ValidationPart::PairGeomMean,
        pairwise(in_inputs, n_per_part, &mut r, |a, b| (a * b).sqrt()),
    );

    let mut r = rng.split(ValidationPart::BlockPermuted.name());
    let mut data = Vec::with_capacity(n_per_part * d);
    let mut order: Vec<usize> = (0..PERMUTATION_BLOCKS).collect();
    for _ in 0..n_per_part {
        let src = in_inputs.row(r.random_range(0..rows))?;
        order.shuffle(&mut r);
        data.extend(permute_blocks(src, &order));
    }
    parts.insert(ValidationPart::BlockPermuted, Matrix::new(n_per_part, d, data)?);

    Ok(ValidationSet {
        parts,
        n_per_part,
        seed: rng.seed(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: BTreeMap<String, f64>,
    pub fpr95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_params: BTreeMap<String, f64>,
    /// Validation FPR at 95% TPR of `best_params`.
    pub objective: f64,
    /// Every evaluated point, in grid order.
    pub grid_trace: Vec<GridPoint>,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Picks the lowest objective; ties go to smaller epsilon, then smaller
/// temperature.
fn select(trace: Vec<GridPoint>) -> TuneResult {
    let key = |g: &GridPoint| {
        (
            g.fpr95,
            g.params.get("epsilon").copied().unwrap_or(0.0),
            g.params.get("temperature").copied().unwrap_or(0.0),
        )
    };
    let best = (0..trace.len())
        .min_by(|&a, &b| {
            let (ka, kb) = (key(&trace[a]), key(&trace[b]));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        })
        .expect("grid is never empty");
    TuneResult {
        best_params: trace[best].params.clone(),
        objective: trace[best].fpr95,
        grid_trace: trace,
    }
}

fn check_validation(val: &ValidationSet, in_val: &Matrix) -> Result<Matrix> {
    if in_val.rows() == 0 || val.n_per_part == 0 {
        return Err(Error::EmptyValidation);
    }
    Ok(val.union())
}

/// Validation FPR95 of ODIN at one `(T, epsilon)` point.
pub fn odin_objective(
    model: &LinearModel,
    in_val: &Matrix,
    ood_val: &Matrix,
    temperature: f64,
    epsilon: f64,
    aggregator: Aggregator,
) -> Result<f64> {
    let s_in = aggregate(&odin_labelwise(model, in_val, temperature, epsilon)?, aggregator)?;
    let s_ood = aggregate(&odin_labelwise(model, ood_val, temperature, epsilon)?, aggregator)?;
    fpr_at_tpr(s_in.values(), s_ood.values(), TUNING_TPR)
}

/// Grid search over 4 temperatures x 21 perturbation magnitudes.
pub fn tune_odin(model: &LinearModel, val: &ValidationSet, in_val: &Matrix) -> Result<TuneResult> {
    let ood = check_validation(val, in_val)?;
    let mut trace = Vec::with_capacity(ODIN_TEMPERATURES.len() * 21);
    for &t in &ODIN_TEMPERATURES {
        for eps in odin_epsilons() {
            let fpr95 = odin_objective(model, in_val, &ood, t, eps, Aggregator::Max)?;
            trace.push(GridPoint {
                params: params(&[("temperature", t), ("epsilon", eps)]),
                fpr95,
            });
        }
    }
    Ok(select(trace))
}

/// Validation FPR95 of Mahalanobis at one epsilon.
pub fn mahalanobis_objective(
    fitted: &MahalanobisModel,
    in_val: &Matrix,
    ood_val: &Matrix,
    epsilon: f64,
    aggregator: Aggregator,
) -> Result<f64> {
    let s_in = mahalanobis_score(fitted, in_val, aggregator, epsilon, FeatureSource::Inputs)?;
    let s_ood = mahalanobis_score(fitted, ood_val, aggregator, epsilon, FeatureSource::Inputs)?;
    fpr_at_tpr(s_in.values(), s_ood.values(), TUNING_TPR)
}

/// Search over the six Mahalanobis perturbation magnitudes.
pub fn tune_mahalanobis(
    fitted: &MahalanobisModel,
    val: &ValidationSet,
    in_val: &Matrix,
    aggregator: Aggregator,
) -> Result<TuneResult> {
    let ood = check_validation(val, in_val)?;
    let trace = MAHALANOBIS_EPSILONS
        .iter()
        .map(|&eps| {
            Ok(GridPoint {
                params: params(&[("epsilon", eps)]),
                fpr95: mahalanobis_objective(fitted, in_val, &ood, eps, aggregator)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(select(trace))
}
