//! `impactnorm synth`: deterministic synthetic dataset files.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use impactnorm_core::synth::{generate, write_outputs, SynthConfig};

use crate::manifest::RunManifest;

use super::{ensure_out_dir, Outcome};

#[derive(Debug, Clone)]
pub struct SynthOptions {
    /// JSON file deserializing into a [`SynthConfig`]; missing fields take
    /// their defaults. Without a file the default config is used.
    pub config: Option<PathBuf>,
    /// Overrides the config's seed when set.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

pub fn run_synth(options: &SynthOptions) -> anyhow::Result<Outcome> {
    let mut config = match &options.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SynthConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = options.seed {
        config.seed = seed;
    }

    let (dataset, ground_truth) = generate(&config)?;
    ensure_out_dir(&options.out_dir)?;
    write_outputs(&dataset, &ground_truth, &options.out_dir)?;

    let mut manifest = RunManifest::new("synth", serde_json::to_value(&config)?);
    if let Some(path) = &options.config {
        manifest.add_input(path)?;
    }
    manifest.write(&options.out_dir)?;
    Ok(Outcome::Success)
}
