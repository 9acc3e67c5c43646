use log::info;
use mlood_core::baselines::fit_mahalanobis;
use mlood_core::io::{write_atomic, write_json};
use mlood_core::metrics::{evaluate, EvalReport};
use mlood_core::method::{Aggregator, GlobalMethod, Hyper, LabelBase};
use mlood_core::tuning::{tune_mahalanobis, tune_odin, TuneResult};
use mlood_core::{fit_detector, score, FittedDetector, LinearModel, ScoreInput, ScoreSpec, ToyTask};

use super::eval::report_csv;
use super::{open_model, open_task, validation, DEFAULT_N_PER_PART};
use crate::args::BenchArgs;
use crate::error::{CliResult, Context};
use crate::settings::Settings;

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub tpr: f64,
    pub n_per_part: usize,
    pub neighbors: usize,
    pub trees: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        let h = Hyper::default();
        BenchOptions {
            tpr: 0.95,
            n_per_part: DEFAULT_N_PER_PART,
            neighbors: h.neighbors,
            trees: h.trees,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub spec: ScoreSpec,
    pub report: EvalReport,
}

/// Bench rows in report order plus the tuning results they used.
#[derive(Clone, Debug)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub tuned: Vec<(String, TuneResult)>,
}

fn param(t: &TuneResult, key: &str) -> f64 {
    t.best_params.get(key).copied().unwrap_or(0.0)
}

/// Scores both test splits with every method and aggregation.
pub fn bench_rows(task: &ToyTask, model: &LinearModel, opts: &BenchOptions) -> CliResult<BenchOutput> {
    let val = validation(task, opts.n_per_part, opts.seed)?;
    let in_val = task.train.inputs();
    let odin = tune_odin(model, &val, in_val).context(|| "tuning ODIN".to_string())?;
    let mahalanobis =
        fit_mahalanobis(task.train.inputs(), task.train.labels(), None).context(|| "fitting Mahalanobis".to_string())?;
    let mut tuned = vec![("odin".to_string(), odin.clone())];

    let base = Hyper {
        neighbors: opts.neighbors,
        trees: opts.trees,
        seed: opts.seed,
        ..Hyper::default()
    };
    let mut specs = Vec::new();
    for agg in [Aggregator::Max, Aggregator::Sum] {
        for b in [LabelBase::Logit, LabelBase::SigmoidProb, LabelBase::Energy] {
            specs.push(ScoreSpec::labelwise(b, agg));
        }
        specs.push(ScoreSpec::labelwise(LabelBase::OdinProb, agg).with_hyper(Hyper {
            temperature: param(&odin, "temperature"),
            epsilon: param(&odin, "epsilon"),
            ..Hyper::default()
        }));
        let t = tune_mahalanobis(&mahalanobis, &val, in_val, agg).context(|| format!("tuning Mahalanobis ({agg})"))?;
        specs.push(ScoreSpec::labelwise(LabelBase::Mahalanobis, agg).with_hyper(Hyper {
            epsilon: param(&t, "epsilon"),
            ..Hyper::default()
        }));
        tuned.push((format!("mahalanobis_{agg}"), t));
    }
    for k in 1..=task.config.k {
        specs.push(ScoreSpec::labelwise(LabelBase::Energy, Aggregator::TopK(k)));
    }
    for g in GlobalMethod::ALL {
        specs.push(ScoreSpec::global(g).with_hyper(base));
    }
    specs.sort_by_key(ScoreSpec::report_order);

    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let fitted = match spec.method {
            mlood_core::Method::Labelwise {
                base: LabelBase::Mahalanobis,
                ..
            } => Some(FittedDetector::Mahalanobis(mahalanobis.clone())),
            _ => fit_detector(&spec, task.train.inputs(), Some(task.train.labels()))
                .context(|| format!("fitting {spec}"))?,
        };
        let run = |inputs| score(&spec, &ScoreInput::model(model, inputs), fitted.as_ref());
        let s_in = run(task.test_in.inputs()).context(|| format!("scoring {spec}"))?;
        let s_ood = run(&task.test_ood_inputs).context(|| format!("scoring {spec}"))?;
        let report = evaluate(s_in.values(), s_ood.values(), opts.tpr).context(|| format!("evaluating {spec}"))?;
        rows.push(BenchRow { spec, report });
    }
    Ok(BenchOutput { rows, tuned })
}

pub fn bench(a: &BenchArgs, s: &Settings) -> CliResult<()> {
    let task = open_task(&s.require(a.task.clone(), "task")?)?;
    let model = open_model(&s.require(a.model.clone(), "model")?)?;
    let out = s.require(a.out.clone(), "out")?;
    let d = BenchOptions::default();
    let opts = BenchOptions {
        tpr: s.pick_or(a.tpr, "tpr", d.tpr)?,
        n_per_part: s.pick_or(a.n_per_part, "n-per-part", d.n_per_part)?,
        neighbors: s.pick_or(a.neighbors, "neighbors", d.neighbors)?,
        trees: s.pick_or(a.trees, "trees", d.trees)?,
        seed: s.pick_or(a.seed, "seed", d.seed)?,
    };
    let BenchOutput { rows, tuned } = bench_rows(&task, &model, &opts)?;

    let table: Vec<(String, String, EvalReport)> = rows
        .iter()
        .map(|r| (r.spec.method_name().to_string(), r.spec.aggregation_name(), r.report.clone()))
        .collect();
    let specs: Vec<String> = rows.iter().map(|r| r.spec.to_string()).collect();
    let bytes = report_csv(&table, Some(("spec", &specs)))?;

    if let Some(dir) = s.path(a.tune_dir.clone(), "tune-dir")? {
        std::fs::create_dir_all(&dir).map_err(mlood_core::Error::from)?;
        for (name, result) in &tuned {
            let path = dir.join(format!("{name}.json"));
            write_json(&path, result).context(|| format!("writing {}", path.display()))?;
        }
    }
    write_atomic(&out, &bytes).context(|| format!("writing {}", out.display()))?;
    info!("{} rows written to {}", rows.len(), out.display());
    Ok(())
}
