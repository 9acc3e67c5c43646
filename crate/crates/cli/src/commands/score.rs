use mlood_core::io::{read_matrix, save_matrix};
use mlood_core::{fit_detector, Matrix, ScoreInput, ScoreSpec};

use super::{open_model, open_task};
use crate::args::ScoreArgs;
use crate::error::{CliError, CliResult, Context};
use crate::settings::Settings;

fn read(path: &std::path::Path) -> CliResult<Matrix> {
    read_matrix(path).context(|| format!("reading {}", path.display()))
}

pub fn score(a: &ScoreArgs, s: &Settings) -> CliResult<()> {
    let spec: ScoreSpec = s.require(a.method.clone(), "method")?.parse()?;
    let out = s.require(a.out.clone(), "out")?;
    let task_dir = s.path(a.task.clone(), "task")?;
    let logits_path = s.path(a.logits.clone(), "logits")?;
    let features_path = s.path(a.features.clone(), "features")?;
    if task_dir.is_some() == (logits_path.is_some() || features_path.is_some()) {
        return Err(CliError::new(
            "InvalidConfig",
            "give exactly one input source: --task (with --model) or --logits/--features",
        ));
    }

    let scores = if let Some(dir) = task_dir {
        let task = open_task(&dir)?;
        let model = open_model(&s.require(a.model.clone(), "model")?)?;
        let split = s.pick_or(a.split.clone(), "split", "test_in".to_string())?;
        let inputs = match split.as_str() {
            "test_in" => task.test_in.inputs(),
            "test_ood" => &task.test_ood_inputs,
            "train" => task.train.inputs(),
            other => {
                return Err(CliError::new(
                    "InvalidConfig",
                    format!("unknown split `{other}` (test_in, test_ood, train)"),
                ))
            }
        };
        let fitted = fit_detector(&spec, task.train.inputs(), Some(task.train.labels()))
            .context(|| format!("fitting {spec}"))?;
        mlood_core::score(&spec, &ScoreInput::model(&model, inputs), fitted.as_ref())
    } else {
        let logits = logits_path.as_deref().map(read).transpose()?;
        let features = features_path.as_deref().map(read).transpose()?;
        let fit_features = s.path(a.fit_features.clone(), "fit-features")?;
        let fit_labels = s.path(a.fit_labels.clone(), "fit-labels")?;
        let fitted = match fit_features {
            Some(p) => {
                let labels = fit_labels.as_deref().map(read).transpose()?;
                fit_detector(&spec, &read(&p)?, labels.as_ref()).context(|| format!("fitting {spec}"))?
            }
            None => None,
        };
        let input = ScoreInput {
            logits: logits.as_ref(),
            features: features.as_ref(),
            model: None,
        };
        mlood_core::score(&spec, &input, fitted.as_ref())
    }
    .context(|| format!("scoring with {spec}"))?;

    save_matrix(&out, &scores.to_matrix()).context(|| format!("writing {}", out.display()))?;
    Ok(())
}
