use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One OOD score per example. Larger means more in-distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(ScoreVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Scores as an `n x 1` matrix, the on-disk shape of score files.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::column(self.0.clone()).expect("scores are finite")
    }

    /// Reads scores back from a single-column matrix.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.cols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "score files have one column, got {}",
                m.cols()
            )));
        }
        Ok(ScoreVector(m.as_slice().to_vec()))
    }
}

impl AsRef<[f64]> for ScoreVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-label scores, `N x K`, larger = more in-distribution for that label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelwiseScores(Matrix);

impl LabelwiseScores {
    pub fn new(values: Matrix) -> Self {
        LabelwiseScores(values)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn num_labels(&self) -> usize {
        self.0.cols()
    }
}
