use log::info;
use mlood_core::harness::{gen_task, ToyConfig};
use mlood_core::io::save_task;

use crate::args::SynthArgs;
use crate::error::{CliResult, Context};
use crate::settings::Settings;

pub fn synth(a: &SynthArgs, s: &Settings) -> CliResult<()> {
    let out = s.require(a.out.clone(), "out")?;
    let d = ToyConfig::default();
    let cfg = ToyConfig {
        d: s.pick_or(a.d, "d", d.d)?,
        k: s.pick_or(a.k, "k", d.k)?,
        k_ood: s.pick_or(a.k_ood, "k-ood", d.k_ood)?,
        proto_scale: s.pick_or(a.proto_scale, "proto-scale", d.proto_scale)?,
        noise_sigma: s.pick_or(a.noise_sigma, "noise-sigma", d.noise_sigma)?,
        max_positive: s.pick_or(a.max_positive, "max-positive", d.max_positive)?,
        n_train: s.pick_or(a.n_train, "n-train", d.n_train)?,
        n_test_in: s.pick_or(a.n_test_in, "n-test-in", d.n_test_in)?,
        n_test_ood: s.pick_or(a.n_test_ood, "n-test-ood", d.n_test_ood)?,
        seed: s.pick_or(a.seed, "seed", d.seed)?,
    };
    let task = gen_task(&cfg).context(|| "generating task".to_string())?;
    save_task(&out, &task).context(|| format!("writing task to {}", out.display()))?;
    info!("task written to {} (min OOD angle {:.3} rad)", out.display(), task.min_ood_angle());
    Ok(())
}
