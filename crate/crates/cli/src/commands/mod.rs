//! The five subcommands: ingest, mhq, correlate, meta, synth.

use std::fs;
use std::path::Path;

use anyhow::Context;
use impactnorm_core::record::Dataset;

mod correlate;
mod ingest;
mod meta;
mod mhq;
mod synth;

pub use correlate::{run_correlate, CorrRow, CorrelateOptions};
pub use ingest::{run_ingest, IngestOptions};
pub use meta::{run_meta, MetaMode, MetaOptions, MetaRow};
pub use mhq::{mhq_report_rows, run_mhq, GroupsMode, MhqOptions, MhqRow};
pub use synth::{run_synth, SynthOptions};

/// Environment variable capping the worker count; unset or `0` means let the
/// runtime decide.
pub const THREADS_ENV: &str = "IMPACTNORM_THREADS";

/// How a finished command wants the process to exit. Fatal errors travel as
/// `Err` and exit with code 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Everything computed cleanly: exit 0.
    Success,
    /// The run finished but some rows are degenerate or some input rows were
    /// rejected: exit 1.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 1,
        }
    }
}

/// Worker pool honoring [`THREADS_ENV`].
fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .map(|v| {
            v.parse::<usize>()
                .with_context(|| format!("{THREADS_ENV} must be an integer, got {v:?}"))
        })
        .transpose()?
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cap)
        .build()
        .context("building worker pool")
}

fn load_archive(path: &Path) -> anyhow::Result<Dataset> {
    let bytes = fs::read(path).with_context(|| format!("reading archive {}", path.display()))?;
    serde_json::from_slice(&bytes)
        .with_context(|| format!("archive {} is not a valid dataset", path.display()))
}

fn ensure_out_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output dir {}", dir.display()))
}
