//! Class-conditional Gaussian scoring with a shared covariance.
//!
//! Means are taken over the positive instances of each label. The shared
//! covariance pools every (row, positive label) pair, so a row with three
//! positive labels contributes three centred outer products.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::method::Aggregator;
use crate::scores::{LabelwiseScores, ScoreVector};
use crate::scoring::{aggregate, argmax, sign};

#[derive(Clone, Debug, PartialEq)]
pub struct MahalanobisModel {
    means: Matrix,
    precision: Matrix,
    reg: f64,
}

/// Where the scored features come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureSource {
    /// Features are the raw model inputs, so they can be perturbed.
    Inputs,
    /// Features were extracted elsewhere; no gradient path back to an input.
    Extracted,
}

impl MahalanobisModel {
    /// Reassembles a model from stored parts, checking its invariants.
    pub fn from_parts(means: Matrix, precision: Matrix, reg: f64) -> Result<Self> {
        let d = means.cols();
        if precision.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "precision is {:?}, expected {d} x {d}",
                precision.shape()
            )));
        }
        if !(reg >= 0.0 && reg.is_finite()) {
            return Err(Error::InvalidConfig(format!("reg must be >= 0, got {reg}")));
        }
        let p = to_na(&precision);
        if (&p - p.transpose()).amax() > 1e-9 || p.clone().cholesky().is_none() {
            return Err(Error::SingularCovariance);
        }
        Ok(MahalanobisModel {
            means,
            precision,
            reg,
        })
    }

    pub fn means(&self) -> &Matrix {
        &self.means
    }

    pub fn precision(&self) -> &Matrix {
        &self.precision
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    pub fn num_labels(&self) -> usize {
        self.means.rows()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} feature columns, got {d}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `-(x - mu_i)^T P (x - mu_i)` for every label `i`.
    pub fn row_scores(&self, x: &[f64]) -> Vec<f64> {
        self.means
            .iter_rows()
            .map(|mu| -self.quadratic_form(x, mu))
            .collect()
    }

    fn quadratic_form(&self, x: &[f64], mu: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        let mut q = 0.0;
        for (p_row, di) in self.precision.iter_rows().zip(&diff) {
            let pd: f64 = p_row.iter().zip(&diff).map(|(p, dj)| p * dj).sum();
            q += di * pd;
        }
        // P is positive definite; rounding must not push the distance below 0
        q.max(0.0)
    }

    /// Gradient of label `label`'s score at `x`: `-2 P (x - mu)`.
    pub fn gradient(&self, x: &[f64], label: usize) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mu = self.means.row(label)?;
        let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        Ok(self
            .precision
            .iter_rows()
            .map(|p_row| -2.0 * p_row.iter().zip(&diff).map(|(p, d)| p * d).sum::<f64>())
            .collect())
    }
}

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> Result<Matrix> {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            data.push(m[(r, c)]);
        }
    }
    Matrix::new(m.nrows(), m.ncols(), data)
}

/// Fits label means and the pooled shared precision matrix.
///
/// `reg = None` uses `1e-6 * trace(cov) / d` as the ridge.
pub fn fit_mahalanobis(features: &Matrix, labels: &Matrix, reg: Option<f64>) -> Result<MahalanobisModel> {
    if features.rows() != labels.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} label rows",
            features.rows(),
            labels.rows()
        )));
    }
    let (d, k) = (features.cols(), labels.cols());
    let mut means = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (x, y) in features.iter_rows().zip(labels.iter_rows()) {
        for (i, _) in y.iter().enumerate().filter(|(_, &v)| v == 1.0) {
            counts[i] += 1;
            for (acc, xj) in means[i * d..(i + 1) * d].iter_mut().zip(x) {
                *acc += xj;
            }
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(empty));
    }
    for (i, &c) in counts.iter().enumerate() {
        for m in &mut means[i * d..(i + 1) * d] {
            *m /= c as f64;
        }
    }

    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut pairs = 0usize;
    for (x, y) in features.iter_rows().zip(labels.iter_rows()) {
        for (i, _) in y.iter().enumerate().filter(|(_, &v)| v == 1.0) {
            let diff: Vec<f64> = x.iter().zip(&means[i * d..(i + 1) * d]).map(|(a, b)| a - b).collect();
            for r in 0..d {
                for c in 0..d {
                    cov[(r, c)] += diff[r] * diff[c];
                }
            }
            pairs += 1;
        }
    }
    cov /= pairs as f64;

    let reg = match reg {
        Some(r) if r >= 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::InvalidConfig(format!("reg must be >= 0, got {r}"))),
        None if d == 0 => 0.0,
        None => 1e-6 * cov.trace() / d as f64,
    };
    for i in 0..d {
        cov[(i, i)] += reg;
    }
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
    let inv = chol.inverse();
    let precision = (&inv + inv.transpose()) * 0.5;
    if precision.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }

    Ok(MahalanobisModel {
        means: Matrix::new(k, d, means)?,
        precision: from_na(&precision)?,
        reg,
    })
}

/// Per-label Mahalanobis scores, all `<= 0`.
pub fn mahalanobis_labelwise(model: &MahalanobisModel, features: &Matrix) -> Result<LabelwiseScores> {
    model.check_dim(features.cols())?;
    let mut data = Vec::with_capacity(features.rows() * model.num_labels());
    for x in features.iter_rows() {
        data.extend(model.row_scores(x));
    }
    Ok(LabelwiseScores::new(Matrix::new(
        features.rows(),
        model.num_labels(),
        data,
    )?))
}

/// Moves each row `epsilon` along the sign of its top label's score gradient.
pub fn mahalanobis_perturb(model: &MahalanobisModel, features: &Matrix, epsilon: f64) -> Result<Matrix> {
    model.check_dim(features.cols())?;
    if epsilon == 0.0 {
        return Ok(features.clone());
    }
    let mut data = Vec::with_capacity(features.rows() * features.cols());
    for x in features.iter_rows() {
        let top = argmax(&model.row_scores(x));
        let grad = model.gradient(x, top)?;
        data.extend(x.iter().zip(&grad).map(|(xj, g)| xj + epsilon * sign(*g)));
    }
    Matrix::new(features.rows(), features.cols(), data)
}

/// Aggregated Mahalanobis score, optionally on perturbed inputs.
pub fn mahalanobis_score(
    model: &MahalanobisModel,
    features: &Matrix,
    aggregator: Aggregator,
    epsilon: f64,
    source: FeatureSource,
) -> Result<ScoreVector> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if epsilon > 0.0 && source == FeatureSource::Extracted {
        return Err(Error::PerturbationUnsupported("extracted features"));
    }
    let x = mahalanobis_perturb(model, features, epsilon)?;
    aggregate(&mahalanobis_labelwise(model, &x)?, aggregator)
}
