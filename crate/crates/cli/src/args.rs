use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Multi-label out-of-distribution detection experiments.
///
/// Every option except `--config` may also be set in a key=value config
/// file, keyed by its long name; command-line flags take precedence.
#[derive(Debug, Parser)]
#[command(name = "mlood", version)]
pub struct Cli {
    /// key=value config file
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-label task and write it to a directory
    Synth(SynthArgs),
    /// Train the linear classifier on a task's training split
    Train(TrainArgs),
    /// Score examples with one method and write a one-column matrix
    Score(ScoreArgs),
    /// Grid-search ODIN or Mahalanobis hyperparameters on synthetic validation data
    Tune(TuneArgs),
    /// Compare in-distribution and OOD score files
    Eval(EvalArgs),
    /// Evaluate every method on a task's test splits and write one CSV
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input dimension
    #[arg(long)]
    pub d: Option<usize>,
    /// In-distribution label count
    #[arg(long)]
    pub k: Option<usize>,
    /// OOD prototype count
    #[arg(long)]
    pub k_ood: Option<usize>,
    #[arg(long)]
    pub proto_scale: Option<f64>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Largest number of positive labels per example
    #[arg(long)]
    pub max_positive: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test_in: Option<usize>,
    #[arg(long)]
    pub n_test_ood: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Task directory written by `synth`
    #[arg(long, value_name = "DIR")]
    pub task: Option<PathBuf>,
    /// Model file (K x (d+1) matrix, bias in the last column)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// mAP report (JSON); defaults to train_report.json next to the model
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Seeds both the initialization and the shuffling
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Score spec, e.g. `energy:sum`, `odin:max@temperature=1000,epsilon=0.002`, `lof@k=20`
    #[arg(long)]
    pub method: Option<String>,
    /// Task directory (use with --model)
    #[arg(long, value_name = "DIR", conflicts_with_all = ["logits", "features"])]
    pub task: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Task split to score: test_in, test_ood or train
    #[arg(long)]
    pub split: Option<String>,
    /// Precomputed logits (file mode)
    #[arg(long, value_name = "FILE")]
    pub logits: Option<PathBuf>,
    /// Precomputed features (file mode)
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,
    /// Training features for data-dependent methods (file mode)
    #[arg(long, value_name = "FILE")]
    pub fit_features: Option<PathBuf>,
    /// Training labels for Mahalanobis (file mode)
    #[arg(long, value_name = "FILE")]
    pub fit_labels: Option<PathBuf>,
    /// Output score file (n x 1)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// `odin` or `mahalanobis`
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub task: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Mahalanobis aggregator (max or sum)
    #[arg(long)]
    pub aggregation: Option<String>,
    /// Rows per synthetic validation part
    #[arg(long)]
    pub n_per_part: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// TuneResult JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// In-distribution scores (n x 1)
    #[arg(long = "in", value_name = "FILE")]
    pub in_scores: Option<PathBuf>,
    /// OOD scores (n x 1)
    #[arg(long = "ood", value_name = "FILE")]
    pub ood_scores: Option<PathBuf>,
    /// Fraction of in-distribution data to accept
    #[arg(long)]
    pub tpr: Option<f64>,
    /// EvalReport JSON
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the report as a one-row CSV
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Spec whose method and aggregation name the CSV row
    #[arg(long)]
    pub method: Option<String>,
    /// Dump the ROC curve as fpr,tpr rows
    #[arg(long, value_name = "FILE")]
    pub roc: Option<PathBuf>,
    /// Per-label energy histograms (needs --in-logits and --ood-logits)
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub in_logits: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub ood_logits: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_name = "DIR")]
    pub task: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Combined results CSV
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write the ODIN and Mahalanobis TuneResults here
    #[arg(long, value_name = "DIR")]
    pub tune_dir: Option<PathBuf>,
    #[arg(long)]
    pub tpr: Option<f64>,
    /// Rows per synthetic validation part
    #[arg(long)]
    pub n_per_part: Option<usize>,
    /// LOF neighbor count
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Isolation forest size
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}
