//! Linear multi-label classifier with sigmoid outputs.
//!
//! `logit_i(x) = w_i . x + b_i`. The feature map is the identity, so the
//! analytic input gradients below serve both perturbation-based detectors.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::{LabeledDataset, Matrix};
use crate::rng::Rng;
use crate::scoring::{sigmoid, softplus};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    weights: Matrix,
    bias: Vec<f64>,
}

impl LinearModel {
    /// `weights` is `K x d`, `bias` has length `K`.
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weights.rows() != bias.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weight rows vs {} biases",
                weights.rows(),
                bias.len()
            )));
        }
        if let Some(index) = bias.iter().position(|b| !b.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn zeros(num_labels: usize, dim: usize) -> Self {
        LinearModel {
            weights: Matrix::zeros(num_labels, dim),
            bias: vec![0.0; num_labels],
        }
    }

    /// Weights and biases drawn i.i.d. from `N(0, 0.01^2)`.
    pub fn random_init(num_labels: usize, dim: usize, rng: &mut Rng) -> Self {
        let normal = Normal::new(0.0, 0.01).expect("valid normal");
        let w: Vec<f64> = (0..num_labels * dim).map(|_| normal.sample(rng)).collect();
        let bias: Vec<f64> = (0..num_labels).map(|_| normal.sample(rng)).collect();
        LinearModel {
            weights: Matrix::new(num_labels, dim, w).expect("finite draws"),
            bias,
        }
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_labels(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    /// Packs the model into a `K x (d + 1)` matrix, bias in the last column.
    pub fn to_matrix(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.num_labels() * (self.dim() + 1));
        for (w, b) in self.weights.iter_rows().zip(&self.bias) {
            data.extend_from_slice(w);
            data.push(*b);
        }
        Matrix::new(self.num_labels(), self.dim() + 1, data).expect("finite parameters")
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.cols() == 0 {
            return Err(Error::DimensionMismatch("model matrix has no columns".into()));
        }
        let d = m.cols() - 1;
        let mut w = Vec::with_capacity(m.rows() * d);
        let mut bias = Vec::with_capacity(m.rows());
        for r in m.iter_rows() {
            w.extend_from_slice(&r[..d]);
            bias.push(r[d]);
        }
        LinearModel::new(Matrix::new(m.rows(), d, w)?, bias)
    }

    /// Logits of a single input row.
    pub fn logits_row(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter_rows()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} input columns, got {d}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Logits for every row of `inputs`, `N x K`.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix> {
        self.check_dim(inputs.cols())?;
        let mut data = Vec::with_capacity(inputs.rows() * self.num_labels());
        for x in inputs.iter_rows() {
            data.extend(self.logits_row(x));
        }
        Matrix::new(inputs.rows(), self.num_labels(), data)
    }

    /// Mean binary cross-entropy over all samples and labels.
    pub fn bce_loss(&self, data: &LabeledDataset) -> Result<f64> {
        self.check_dim(data.inputs().cols())?;
        self.check_labels(data)?;
        let n = data.len() * self.num_labels();
        if n == 0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (x, y) in data.inputs().iter_rows().zip(data.labels().iter_rows()) {
            for (f, &t) in self.logits_row(x).into_iter().zip(y) {
                // -[t log s(f) + (1-t) log(1-s(f))] = softplus(f) - t f
                total += softplus(f) - t * f;
            }
        }
        Ok(total / n as f64)
    }

    /// Closed-form gradient of [`bce_loss`](Self::bce_loss) with respect to
    /// weights and biases.
    pub fn bce_param_grad(&self, batch: &LabeledDataset) -> Result<(Matrix, Vec<f64>)> {
        self.check_dim(batch.inputs().cols())?;
        self.check_labels(batch)?;
        let k = self.num_labels();
        let d = self.dim();
        let mut dw = vec![0.0; k * d];
        let mut db = vec![0.0; k];
        let n = batch.len() * k;
        if n == 0 {
            return Ok((Matrix::zeros(k, d), db));
        }
        let scale = 1.0 / n as f64;
        for (x, y) in batch.inputs().iter_rows().zip(batch.labels().iter_rows()) {
            for (i, (f, &t)) in self.logits_row(x).into_iter().zip(y).enumerate() {
                let g = (sigmoid(f) - t) * scale;
                db[i] += g;
                for (acc, xj) in dw[i * d..(i + 1) * d].iter_mut().zip(x) {
                    *acc += g * xj;
                }
            }
        }
        Ok((Matrix::new(k, d, dw)?, db))
    }

    /// Gradient with respect to `x` of the single-label loss
    /// `-[t log s(f_i) + (1-t) log(1-s(f_i))]`, which is `(s(f_i) - t) w_i`.
    pub fn bce_input_grad(&self, x: &[f64], label: usize, target: f64) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let w = self.weights.row(label)?;
        let f = dot(w, x) + self.bias[label];
        let g = sigmoid(f) - target;
        Ok(w.iter().map(|wj| g * wj).collect())
    }

    fn check_labels(&self, data: &LabeledDataset) -> Result<()> {
        if data.num_labels() != self.num_labels() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} labels, data has {}",
                self.num_labels(),
                data.num_labels()
            )));
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
