use std::path::PathBuf;

use log::info;
use mlood_core::harness::{mean_average_precision, MapReport, TrainConfig};
use mlood_core::io::{save_model, write_json};
use mlood_core::{LinearModel, Rng};
use serde::{Deserialize, Serialize};

use super::open_task;
use crate::args::TrainArgs;
use crate::error::{CliResult, Context};
use crate::settings::Settings;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Mean average precision on the in-distribution test split.
    pub test_in: MapReport,
}

pub fn train(a: &TrainArgs, s: &Settings) -> CliResult<()> {
    let task_dir = s.require(a.task.clone(), "task")?;
    let out = s.require(a.out.clone(), "out")?;
    let report_path = match s.path(a.report.clone(), "report")? {
        Some(p) => p,
        None => out
            .parent()
            .map(|p| p.join("train_report.json"))
            .unwrap_or_else(|| PathBuf::from("train_report.json")),
    };
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        lr: s.pick_or(a.lr, "lr", d.lr)?,
        epochs: s.pick_or(a.epochs, "epochs", d.epochs)?,
        batch: s.pick_or(a.batch, "batch", d.batch)?,
        seed: s.pick_or(a.seed, "seed", d.seed)?,
        ..d
    };

    let task = open_task(&task_dir)?;
    let init = LinearModel::random_init(task.config.k, task.config.d, &mut Rng::new(cfg.seed).split("init"));
    let model = mlood_core::harness::train(&init, &task.train, &cfg).context(|| "training".to_string())?;
    let report = TrainReport {
        initial_loss: init.bce_loss(&task.train)?,
        final_loss: model.bce_loss(&task.train)?,
        test_in: mean_average_precision(&model, &task.test_in).context(|| "computing mAP".to_string())?,
        config: cfg,
    };

    save_model(&out, &model).context(|| format!("writing {}", out.display()))?;
    write_json(&report_path, &report).context(|| format!("writing {}", report_path.display()))?;
    info!("trained: loss {:.4} -> {:.4}, test mAP {:.4}", report.initial_loss, report.final_loss, report.test_in.map);
    Ok(())
}
