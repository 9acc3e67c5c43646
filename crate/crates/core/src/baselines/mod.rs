//! Data-dependent detectors: Mahalanobis, local outlier factor, and
//! isolation forest.

pub mod iforest;
pub mod lof;
pub mod mahalanobis;

pub use iforest::{average_path_length, fit_iforest, iforest_score, IsolationForestModel};
pub use lof::{fit_lof, lof_score, LofIndex};
pub use mahalanobis::{
    fit_mahalanobis, mahalanobis_labelwise, mahalanobis_perturb, mahalanobis_score, FeatureSource,
    MahalanobisModel,
};
