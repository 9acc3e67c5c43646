use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::LinearModel;
use crate::error::{Error, Result};
use crate::matrix::{LabeledDataset, Matrix};
use crate::rng::Rng;

/// Adam settings for [`train`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-2,
            epochs: 200,
            batch: 64,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && self.lr.is_finite()
            && self.batch >= 1
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps_adam > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid training settings {self:?}")))
        }
    }
}

struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig, t: i32) {
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps_adam);
        }
    }
}

/// Minibatch Adam with bias correction on the mean binary cross-entropy.
///
/// Example order is reshuffled every epoch from a stream seeded by
/// `cfg.seed`.
pub fn train(init: &LinearModel, data: &LabeledDataset, cfg: &TrainConfig) -> Result<LinearModel> {
    cfg.validate()?;
    if cfg.epochs == 0 || data.is_empty() {
        return Ok(init.clone());
    }
    // surface shape errors before the loop
    init.bce_loss(&data.select(&[0])?)?;

    let (k, d) = (init.num_labels(), init.dim());
    let mut weights = init.weights().as_slice().to_vec();
    let mut bias = init.bias().to_vec();
    let mut w_moments = Moments::new(weights.len());
    let mut b_moments = Moments::new(bias.len());
    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t = 0i32;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            let model = LinearModel::new(Matrix::new(k, d, weights.clone())?, bias.clone())?;
            let (dw, db) = model.bce_param_grad(&data.select(chunk)?)?;
            t = t.saturating_add(1);
            w_moments.step(&mut weights, dw.as_slice(), cfg, t);
            b_moments.step(&mut bias, &db, cfg, t);
            if weights.iter().chain(&bias).any(|p| !p.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
        }
        let model = LinearModel::new(Matrix::new(k, d, weights.clone())?, bias.clone())?;
        if !model.bce_loss(data)?.is_finite() {
            return Err(Error::Divergence { epoch });
        }
    }
    LinearModel::new(Matrix::new(k, d, weights)?, bias)
}
