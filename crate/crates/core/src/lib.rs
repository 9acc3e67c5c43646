//! Out-of-distribution detection for multi-label classifiers.
//!
//! The central score is JointEnergy: the sum over labels of the label-wise
//! free energy `log(1 + e^{f_i(x)})`. Around it sit the usual baselines
//! (MaxLogit, MSP, ODIN, Mahalanobis, LOF, isolation forest), max / sum /
//! top-k aggregation of every label-wise score, the FPR95 / AUROC / AUPR
//! metrics, validation-only hyperparameter tuning, and a synthetic
//! multi-label task with a linear classifier for end-to-end experiments.
//!
//! ```
//! use mlood_core::{joint_energy, metrics, Matrix};
//!
//! let in_logits = Matrix::from_rows(&[[4.0, 3.5, -6.0], [5.0, -4.0, -5.0]]).unwrap();
//! let ood_logits = Matrix::from_rows(&[[-3.0, -4.0, -2.5]]).unwrap();
//! let s_in = joint_energy(&in_logits);
//! let s_ood = joint_energy(&ood_logits);
//! assert_eq!(metrics::auroc(s_in.values(), s_ood.values()).unwrap(), 1.0);
//! ```
//!
//! All scores follow one orientation: larger means more in-distribution.

pub mod baselines;
pub mod detector;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod method;
pub mod metrics;
pub mod rng;
pub mod scores;
pub mod scoring;
pub mod tuning;

pub use detector::{fit_detector, score, FittedDetector, ScoreInput};
pub use error::{Error, Result};
pub use harness::{LinearModel, ToyConfig, ToyTask};
pub use matrix::{LabeledDataset, Matrix};
pub use method::{Aggregator, GlobalMethod, Hyper, LabelBase, Method, ScoreSpec};
pub use metrics::{evaluate, EvalReport};
pub use rng::Rng;
pub use scores::{LabelwiseScores, ScoreVector};
pub use scoring::{
    aggregate, joint_energy, labelwise_energy, max_energy, max_logit, msp, odin, sigmoid_prob, sum_logit,
    topk_joint_energy,
};
