use mlood_core::baselines::fit_mahalanobis;
use mlood_core::io::write_json;
use mlood_core::method::Aggregator;
use mlood_core::tuning::{tune_mahalanobis, tune_odin};

use super::{open_model, open_task, validation, DEFAULT_N_PER_PART};
use crate::args::TuneArgs;
use crate::error::{CliError, CliResult, Context};
use crate::settings::Settings;

pub fn tune(a: &TuneArgs, s: &Settings) -> CliResult<()> {
    let method = s.require(a.method.clone(), "method")?;
    let task = open_task(&s.require(a.task.clone(), "task")?)?;
    let out = s.require(a.out.clone(), "out")?;
    let n_per_part = s.pick_or(a.n_per_part, "n-per-part", DEFAULT_N_PER_PART)?;
    let val = validation(&task, n_per_part, s.pick_or(a.seed, "seed", 0)?)?;
    let in_val = task.train.inputs();

    let result = match method.as_str() {
        "odin" | "odin_prob" => {
            let model = open_model(&s.require(a.model.clone(), "model")?)?;
            tune_odin(&model, &val, in_val).context(|| "tuning ODIN".to_string())?
        }
        "mahalanobis" => {
            let agg: Aggregator = s.pick_or(a.aggregation.clone(), "aggregation", "max".to_string())?.parse()?;
            let fitted = fit_mahalanobis(task.train.inputs(), task.train.labels(), None)
                .context(|| "fitting Mahalanobis".to_string())?;
            tune_mahalanobis(&fitted, &val, in_val, agg).context(|| "tuning Mahalanobis".to_string())?
        }
        other => {
            return Err(CliError::new(
                "InvalidSpec",
                format!("cannot tune `{other}` (odin or mahalanobis)"),
            ))
        }
    };
    write_json(&out, &result).context(|| format!("writing {}", out.display()))?;
    Ok(())
}
