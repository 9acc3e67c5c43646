//! Dispatch from a [`ScoreSpec`] to the scoring routine it names.

use log::warn;

use crate::baselines::{
    fit_iforest, fit_lof, fit_mahalanobis, iforest_score, lof_score, mahalanobis_score, FeatureSource,
    IsolationForestModel, LofIndex, MahalanobisModel,
};
use crate::error::{Error, Result};
use crate::harness::LinearModel;
use crate::matrix::Matrix;
use crate::method::{GlobalMethod, LabelBase, Method, ScoreSpec};
use crate::rng::Rng;
use crate::scores::ScoreVector;
use crate::scoring::{
    aggregate, labelwise_energy, msp, odin_from_logits, odin_labelwise, sigmoid_prob,
};

/// Fitted state of a data-dependent scorer.
#[derive(Clone, Debug, PartialEq)]
pub enum FittedDetector {
    Mahalanobis(MahalanobisModel),
    Lof(LofIndex),
    IsolationForest(IsolationForestModel),
}

/// What is available for the examples being scored.
///
/// With a `model`, `features` are its inputs: logits are derived from them
/// and both perturbation methods are supported. Without one, `logits` and
/// `features` are treated as exported arrays.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScoreInput<'a> {
    pub logits: Option<&'a Matrix>,
    pub features: Option<&'a Matrix>,
    pub model: Option<&'a LinearModel>,
}

impl<'a> ScoreInput<'a> {
    pub fn logits(logits: &'a Matrix) -> Self {
        ScoreInput {
            logits: Some(logits),
            ..Default::default()
        }
    }

    pub fn model(model: &'a LinearModel, inputs: &'a Matrix) -> Self {
        ScoreInput {
            features: Some(inputs),
            model: Some(model),
            ..Default::default()
        }
    }

    fn resolve_logits(&self) -> Result<std::borrow::Cow<'a, Matrix>> {
        match (self.logits, self.model, self.features) {
            (Some(l), _, _) => Ok(std::borrow::Cow::Borrowed(l)),
            (None, Some(m), Some(x)) => Ok(std::borrow::Cow::Owned(m.forward(x)?)),
            _ => Err(Error::MissingInput("logits (or a model with its inputs)")),
        }
    }

    fn features(&self) -> Result<&'a Matrix> {
        self.features.ok_or(Error::MissingInput("features"))
    }
}

/// Fits whatever state `spec` needs from in-distribution training data.
///
/// Returns `None` for methods that are not data dependent. `labels` is only
/// read by Mahalanobis.
pub fn fit_detector(spec: &ScoreSpec, features: &Matrix, labels: Option<&Matrix>) -> Result<Option<FittedDetector>> {
    let h = &spec.hyper;
    Ok(match spec.method {
        Method::Labelwise {
            base: LabelBase::Mahalanobis,
            ..
        } => {
            let labels = labels.ok_or(Error::MissingInput("training labels"))?;
            Some(FittedDetector::Mahalanobis(fit_mahalanobis(features, labels, h.reg)?))
        }
        Method::Global(GlobalMethod::Lof) => Some(FittedDetector::Lof(fit_lof(features, h.neighbors)?)),
        Method::Global(GlobalMethod::IForest) => {
            let subsample = h.subsample.unwrap_or_else(|| features.rows().min(256));
            Some(FittedDetector::IsolationForest(fit_iforest(
                features,
                h.trees,
                subsample,
                &Rng::new(h.seed),
            )?))
        }
        _ => None,
    })
}

/// Scores examples with the method `spec` describes. Larger is more
/// in-distribution for every method.
pub fn score(spec: &ScoreSpec, input: &ScoreInput<'_>, fitted: Option<&FittedDetector>) -> Result<ScoreVector> {
    let h = &spec.hyper;
    match spec.method {
        Method::Labelwise { base, aggregator } => {
            let labelwise = match base {
                LabelBase::Logit => crate::scores::LabelwiseScores::new(input.resolve_logits()?.into_owned()),
                LabelBase::SigmoidProb => sigmoid_prob(&*input.resolve_logits()?),
                LabelBase::Energy => labelwise_energy(&*input.resolve_logits()?),
                LabelBase::OdinProb => match (input.model, input.features) {
                    (Some(m), Some(x)) => odin_labelwise(m, x, h.temperature, h.epsilon)?,
                    _ => {
                        let logits = input.resolve_logits()?;
                        if h.epsilon != 0.0 {
                            warn!("ODIN on precomputed logits: epsilon {} forced to 0", h.epsilon);
                        }
                        odin_from_logits(&logits, h.temperature, 0.0)?
                    }
                },
                LabelBase::Mahalanobis => {
                    let Some(FittedDetector::Mahalanobis(m)) = fitted else {
                        return Err(Error::UnfittedDetector("mahalanobis"));
                    };
                    let source = if input.model.is_some() {
                        FeatureSource::Inputs
                    } else {
                        FeatureSource::Extracted
                    };
                    return mahalanobis_score(m, input.features()?, aggregator, h.epsilon, source);
                }
            };
            aggregate(&labelwise, aggregator)
        }
        Method::Global(GlobalMethod::Msp) => msp(&*input.resolve_logits()?),
        Method::Global(GlobalMethod::Lof) => match fitted {
            Some(FittedDetector::Lof(index)) => lof_score(index, input.features()?),
            _ => Err(Error::UnfittedDetector("lof")),
        },
        Method::Global(GlobalMethod::IForest) => match fitted {
            Some(FittedDetector::IsolationForest(forest)) => iforest_score(forest, input.features()?),
            _ => Err(Error::UnfittedDetector("iforest")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::joint_energy;
    use rand::Rng as _;

    fn logits() -> Matrix {
        Matrix::new(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.5, -1.0]).unwrap()
    }

    #[test]
    fn dispatches_label_wise_methods() {
        let l = logits();
        let input = ScoreInput::logits(&l);
        let s = score(&ScoreSpec::joint_energy(), &input, None).unwrap();
        assert_eq!(s, joint_energy(&l));
        let s = score(&"logit:sum".parse().unwrap(), &input, None).unwrap();
        assert_eq!(s.values()[0], 2.0);
    }

    #[test]
    fn unfitted_detectors_are_rejected() {
        let l = logits();
        let input = ScoreInput {
            logits: Some(&l),
            features: Some(&l),
            model: None,
        };
        assert!(matches!(
            score(&"lof@k=20".parse().unwrap(), &input, None),
            Err(Error::UnfittedDetector("lof"))
        ));
        assert!(matches!(
            score(&"mahalanobis:max".parse().unwrap(), &input, None),
            Err(Error::UnfittedDetector("mahalanobis"))
        ));
    }

    #[test]
    fn missing_inputs_are_reported() {
        let input = ScoreInput::default();
        assert!(matches!(
            score(&ScoreSpec::joint_energy(), &input, None),
            Err(Error::MissingInput(_))
        ));
    }

    #[test]
    fn odin_on_logits_forces_zero_epsilon() {
        let l = logits();
        let spec: ScoreSpec = "odin:max@epsilon=0.002".parse().unwrap();
        let s = score(&spec, &ScoreInput::logits(&l), None).unwrap();
        let plain = score(&"odin:max".parse().unwrap(), &ScoreInput::logits(&l), None).unwrap();
        assert_eq!(s, plain);
    }

    #[test]
    fn model_input_matches_logit_input() {
        let mut rng = Rng::new(1);
        let model = LinearModel::random_init(3, 4, &mut rng);
        let x = Matrix::new(2, 4, vec![0.1, 0.2, 0.3, 0.4, 0.9, 0.8, 0.7, 0.6]).unwrap();
        let l = model.forward(&x).unwrap();
        for spec in ["energy:sum", "logit:max", "sigmoid_prob:sum", "msp", "odin:max"] {
            let spec: ScoreSpec = spec.parse().unwrap();
            assert_eq!(
                score(&spec, &ScoreInput::model(&model, &x), None).unwrap(),
                score(&spec, &ScoreInput::logits(&l), None).unwrap()
            );
        }
    }

    #[test]
    fn fits_and_scores_every_detector() {
        let mut rng = Rng::new(2);
        let x: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin() + rng.random_range(0.0..0.01)).collect();
        let x = Matrix::new(30, 2, x).unwrap();
        let y = Matrix::new(30, 2, (0..60).map(|i| ((i / 2 + i) % 2) as f64).collect()).unwrap();
        for text in ["mahalanobis:sum", "lof@k=5", "iforest@trees=10,subsample=16"] {
            let spec: ScoreSpec = text.parse().unwrap();
            let fitted = fit_detector(&spec, &x, Some(&y)).unwrap();
            assert!(fitted.is_some());
            let input = ScoreInput {
                features: Some(&x),
                ..Default::default()
            };
            assert_eq!(score(&spec, &input, fitted.as_ref()).unwrap().len(), 30);
        }
        assert!(fit_detector(&ScoreSpec::joint_energy(), &x, None).unwrap().is_none());
    }

}
