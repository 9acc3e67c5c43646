//! Synthetic multi-label rig: task generator, linear sigmoid classifier,
//! Adam trainer, and a mean-average-precision gauge.

pub mod model;
pub mod task;
pub mod train;

use serde::{Deserialize, Serialize};

pub use model::LinearModel;
pub use task::{gen_task, ToyConfig, ToyTask};
pub use train::{train, TrainConfig};

use crate::error::{Error, Result};
use crate::matrix::LabeledDataset;
use crate::metrics::average_precision;
use crate::scoring::sigmoid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub map: f64,
    pub per_label: Vec<Option<f64>>,
    /// Labels without both a positive and a negative example.
    pub skipped: Vec<usize>,
}

/// Mean over labels of the average precision of `sigmoid(f_i)` at ranking
/// that label's positives first.
pub fn mean_average_precision(model: &LinearModel, data: &LabeledDataset) -> Result<MapReport> {
    let logits = model.forward(data.inputs())?;
    if logits.cols() != data.num_labels() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} labels, data has {}",
            logits.cols(),
            data.num_labels()
        )));
    }
    let mut per_label = Vec::with_capacity(logits.cols());
    let mut skipped = Vec::new();
    for i in 0..logits.cols() {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (f, y) in logits.iter_rows().zip(data.labels().iter_rows()) {
            let p = sigmoid(f[i]);
            if y[i] == 1.0 {
                pos.push(p);
            } else {
                neg.push(p);
            }
        }
        if pos.is_empty() || neg.is_empty() {
            skipped.push(i);
            per_label.push(None);
        } else {
            per_label.push(Some(average_precision(&pos, &neg)?));
        }
    }
    let evaluated: Vec<f64> = per_label.iter().flatten().copied().collect();
    if evaluated.is_empty() {
        return Err(Error::NoEvaluableLabels);
    }
    Ok(MapReport {
        map: evaluated.iter().sum::<f64>() / evaluated.len() as f64,
        per_label,
        skipped,
    })
}
