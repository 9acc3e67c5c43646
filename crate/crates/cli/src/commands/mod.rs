//! One function per subcommand. Each computes everything it needs before
//! writing, and every file is written atomically.

mod bench;
mod eval;
mod score;
mod synth;
mod train;
mod tune;

use std::path::Path;

use mlood_core::io::{load_model, load_task};
use mlood_core::tuning::{synth_validation, ValidationSet};
use mlood_core::{LinearModel, Rng, ToyTask};

pub use bench::{bench, bench_rows, BenchOptions, BenchOutput, BenchRow};
pub use eval::{energy_histograms, eval};
pub use score::score;
pub use synth::synth;
pub use train::{train, TrainReport};
pub use tune::tune;

use crate::args::{Cli, Command};
use crate::error::{CliResult, Context};
use crate::settings::Settings;

pub fn run(cli: &Cli) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth(a) => synth(a, &settings),
        Command::Train(a) => train(a, &settings),
        Command::Score(a) => score(a, &settings),
        Command::Tune(a) => tune(a, &settings),
        Command::Eval(a) => eval(a, &settings),
        Command::Bench(a) => bench(a, &settings),
    }
}

fn open_task(dir: &Path) -> CliResult<ToyTask> {
    load_task(dir).context(|| format!("loading task {}", dir.display()))
}

fn open_model(path: &Path) -> CliResult<LinearModel> {
    load_model(path).context(|| format!("loading model {}", path.display()))
}

/// Validation OOD parts synthesized from the training inputs.
fn validation(task: &ToyTask, n_per_part: usize, seed: u64) -> CliResult<ValidationSet> {
    synth_validation(task.train.inputs(), n_per_part, &Rng::new(seed).split("validation"))
        .context(|| "synthesizing validation data".to_string())
}

const DEFAULT_N_PER_PART: usize = 200;
