//! Dense row-major matrices and labeled datasets.
//!
//! Every value stored in a [`Matrix`] is a finite `f64`; the constructors
//! reject anything else, so downstream code never has to re-check.

use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` values.
///
/// Used for logits, features, inputs and 0/1 label matrices alike.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows.checked_mul(cols).ok_or_else(|| {
            Error::DimensionMismatch(format!("{rows} x {cols} overflows usize"))
        })?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{rows} x {cols} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Single-column matrix holding `values`.
    pub fn column(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Matrix::new(n, 1, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entry at `(r, c)`.
    ///
    /// Panics when either index is out of range.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of range");
        self.data[r * self.cols + c]
    }

    /// Borrowed view of row `i`.
    pub fn row(&self, i: usize) -> Result<&[f64]> {
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.rows,
            });
        }
        Ok(&self.data[i * self.cols..(i + 1) * self.cols])
    }

    /// Iterator over the rows as slices.
    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        let cols = self.cols;
        (0..self.rows).map(move |i| &self.data[i * cols..(i + 1) * cols])
    }

    /// Applies `f` to every entry; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Matrix> {
        Matrix::new(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Reduces every row to a single value.
    pub fn map_rows(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        self.iter_rows().map(f).collect()
    }

    /// New matrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i)?);
        }
        Ok(Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        })
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            if m.cols != cols {
                return Err(Error::DimensionMismatch(format!(
                    "cannot stack {} columns onto {cols}",
                    m.cols
                )));
            }
            rows += m.rows;
            data.extend_from_slice(&m.data);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

/// Inputs paired with a binary label matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    inputs: Matrix,
    labels: Matrix,
}

impl LabeledDataset {
    pub fn new(inputs: Matrix, labels: Matrix) -> Result<Self> {
        if inputs.rows() != labels.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} input rows vs {} label rows",
                inputs.rows(),
                labels.rows()
            )));
        }
        for (row, r) in labels.iter_rows().enumerate() {
            if let Some((col, &value)) = r.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0)
            {
                return Err(Error::InvalidLabel { row, col, value });
            }
        }
        Ok(LabeledDataset { inputs, labels })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &Matrix {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    pub fn num_labels(&self) -> usize {
        self.labels.cols()
    }

    /// Subset of the dataset restricted to the given rows.
    pub fn select(&self, indices: &[usize]) -> Result<LabeledDataset> {
        Ok(LabeledDataset {
            inputs: self.inputs.select_rows(indices)?,
            labels: self.labels.select_rows(indices)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constructs_and_reads_rows() {
        let m = Matrix::new(1, 3, vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(m.shape(), (1, 3));
        assert_eq!(m.row(0).unwrap(), &[1.0, -2.0, 3.0]);

        let m = Matrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.row(1).unwrap(), &[3.0, 4.0]);
    }

    #[test]
    fn rejects_bad_shape_and_values() {
        assert!(matches!(
            Matrix::new(2, 2, vec![0.0; 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Matrix::new(1, 1, vec![f64::NAN]),
            Err(Error::NonFiniteValue { index: 0 })
        ));
        assert!(matches!(
            Matrix::new(1, 2, vec![0.0, f64::INFINITY]),
            Err(Error::NonFiniteValue { index: 1 })
        ));
    }

    #[test]
    fn row_out_of_range() {
        let m = Matrix::new(1, 3, vec![1.0, -2.0, 3.0]).unwrap();
        assert!(matches!(
            m.row(5),
            Err(Error::IndexOutOfRange { index: 5, len: 1 })
        ));
    }

    #[test]
    fn zero_column_rows_iterate() {
        let m = Matrix::new(3, 0, vec![]).unwrap();
        assert_eq!(m.iter_rows().count(), 3);
        assert!(m.iter_rows().all(|r| r.is_empty()));
    }

    #[test]
    fn labels_must_be_binary() {
        let x = Matrix::zeros(2, 2);
        let y = Matrix::new(2, 2, vec![0.0, 1.0, 0.5, 1.0]).unwrap();
        assert!(matches!(
            LabeledDataset::new(x.clone(), y),
            Err(Error::InvalidLabel { row: 1, col: 0, .. })
        ));
        let y = Matrix::zeros(3, 2);
        assert!(matches!(
            LabeledDataset::new(x, y),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn transpose_and_stack() {
        let a = Matrix::new(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let t = a.transpose();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.row(0).unwrap(), &[1., 4.]);
        let s = Matrix::vstack(&[&a, &a]).unwrap();
        assert_eq!(s.rows(), 4);
        assert_eq!(s.row(3).unwrap(), &[4., 5., 6.]);
        assert!(Matrix::vstack(&[&a, &t]).is_err());
    }

    proptest! {
        #[test]
        fn constructor_is_total_on_finite_data(
            rows in 0usize..8,
            cols in 0usize..8,
            seed in proptest::collection::vec(-1e6f64..1e6, 64),
        ) {
            let data: Vec<f64> = seed.into_iter().take(rows * cols).collect();
            let m = Matrix::new(rows, cols, data.clone()).unwrap();
            prop_assert_eq!(m.as_slice().len(), m.rows() * m.cols());
            prop_assert_eq!(m.iter_rows().count(), rows);
            let flat: Vec<f64> = m.iter_rows().flat_map(|r| r.iter().copied()).collect();
            prop_assert_eq!(flat, data);
        }
    }
}
