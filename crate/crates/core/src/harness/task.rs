use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{LabeledDataset, Matrix};
use crate::rng::Rng;
use crate::scoring::sigmoid;

/// Generator settings for a synthetic multi-label task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyConfig {
    /// Input dimension.
    pub d: usize,
    /// In-distribution label count.
    pub k: usize,
    /// Number of OOD prototypes.
    pub k_ood: usize,
    /// Length of the scaled prototype mean.
    pub proto_scale: f64,
    pub noise_sigma: f64,
    /// Most positive labels per in-distribution example.
    pub max_positive: usize,
    pub n_train: usize,
    pub n_test_in: usize,
    pub n_test_ood: usize,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            d: 64,
            k: 8,
            k_ood: 8,
            proto_scale: 4.0,
            noise_sigma: 1.0,
            max_positive: 3,
            n_train: 2000,
            n_test_in: 1000,
            n_test_ood: 1000,
            seed: 0,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.d < 16 {
            return fail("d must be at least 16");
        }
        if self.k < 2 {
            return fail("k must be at least 2");
        }
        if self.k_ood < 1 {
            return fail("k_ood must be at least 1");
        }
        if self.max_positive < 1 || self.max_positive > self.k {
            return fail("max_positive must lie in [1, k]");
        }
        if self.max_positive > self.k_ood {
            return fail("max_positive cannot exceed k_ood");
        }
        if !(self.proto_scale.is_finite() && self.proto_scale >= 0.0) {
            return fail("proto_scale must be finite and nonnegative");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail("noise_sigma must be finite and nonnegative");
        }
        Ok(())
    }
}

/// A generated task: in-distribution train/test sets, OOD test inputs, and
/// the prototypes everything was drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyTask {
    pub train: LabeledDataset,
    pub test_in: LabeledDataset,
    pub test_ood_inputs: Matrix,
    pub prototypes_in: Matrix,
    pub prototypes_ood: Matrix,
    pub config: ToyConfig,
}

impl ToyTask {
    /// Smallest angle (radians) between any OOD prototype and any
    /// in-distribution prototype.
    pub fn min_ood_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in self.prototypes_ood.iter_rows() {
            for b in self.prototypes_in.iter_rows() {
                let cos: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }
}

fn unit_prototypes(count: usize, d: usize, rng: &mut Rng) -> Matrix {
    let mut data = Vec::with_capacity(count * d);
    for _ in 0..count {
        let v: Vec<f64> = loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            if v.iter().any(|x| *x != 0.0) {
                break v;
            }
        };
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        data.extend(v.into_iter().map(|x| x / norm));
    }
    Matrix::new(count, d, data).expect("normalized draws are finite")
}

// largest f64 below 1; keeps squashed inputs strictly inside (0, 1)
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn draw_examples(
    prototypes: &Matrix,
    n: usize,
    cfg: &ToyConfig,
    rng: &mut Rng,
) -> (Matrix, Matrix) {
    let (d, count) = (prototypes.cols(), prototypes.rows());
    let mut inputs = Vec::with_capacity(n * d);
    let mut labels = vec![0.0; n * count];
    for row in 0..n {
        let m = rng.random_range(1..=cfg.max_positive);
        let chosen = sample(rng, count, m).into_vec();
        let mut center = vec![0.0; d];
        for &c in &chosen {
            labels[row * count + c] = 1.0;
            for (acc, p) in center.iter_mut().zip(prototypes.row(c).expect("in range")) {
                *acc += p;
            }
        }
        let scale = cfg.proto_scale / m as f64;
        for c in center {
            let noise: f64 = StandardNormal.sample(rng);
            let z = scale * c + cfg.noise_sigma * noise;
            inputs.push(sigmoid(z).clamp(f64::MIN_POSITIVE, BELOW_ONE));
        }
    }
    (
        Matrix::new(n, d, inputs).expect("squashed values are finite"),
        Matrix::new(n, count, labels).expect("indicator values"),
    )
}

/// Generates a task. Every stream is derived from `cfg.seed` by label, so
/// changing one split's size leaves the others untouched.
pub fn gen_task(cfg: &ToyConfig) -> Result<ToyTask> {
    cfg.validate()?;
    let root = Rng::new(cfg.seed);
    let prototypes_in = unit_prototypes(cfg.k, cfg.d, &mut root.split("prototypes_in"));
    let prototypes_ood = unit_prototypes(cfg.k_ood, cfg.d, &mut root.split("prototypes_ood"));

    let (x, y) = draw_examples(&prototypes_in, cfg.n_train, cfg, &mut root.split("train"));
    let train = LabeledDataset::new(x, y)?;
    let (x, y) = draw_examples(&prototypes_in, cfg.n_test_in, cfg, &mut root.split("test_in"));
    let test_in = LabeledDataset::new(x, y)?;
    let (test_ood_inputs, _) =
        draw_examples(&prototypes_ood, cfg.n_test_ood, cfg, &mut root.split("test_ood"));

    Ok(ToyTask {
        train,
        test_in,
        test_ood_inputs,
        prototypes_in,
        prototypes_ood,
        config: cfg.clone(),
    })
}
