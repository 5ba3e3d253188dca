//! `impactnorm ingest`: parse, join, validate, archive.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use impactnorm_core::ingest::{build_dataset, parse_tables, InputPaths};

use crate::manifest::RunManifest;

use super::{ensure_out_dir, Outcome};

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Directory holding the conventionally named input files.
    pub input_dir: PathBuf,
    /// Config file location; defaults to `config.txt` in the input dir.
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
}

pub fn run_ingest(options: &IngestOptions) -> anyhow::Result<Outcome> {
    let mut paths = InputPaths::in_dir(&options.input_dir);
    if let Some(config) = &options.config {
        paths.config = config.clone();
    }

    let (tables, config) = parse_tables(&paths)?;
    let (dataset, report) = build_dataset(&tables, &config)?;

    ensure_out_dir(&options.out_dir)?;
    let archive = serde_json::to_vec(&dataset).context("serializing dataset")?;
    fs::write(options.out_dir.join("dataset.json"), archive)?;
    let report_json = serde_json::to_string_pretty(&serde_json::json!({
        "manifest": crate::manifest::MANIFEST_FILE,
        "report": report,
    }))
    .context("serializing ingest report")?;
    fs::write(options.out_dir.join("ingest_report.json"), report_json)?;

    let mut manifest = RunManifest::new(
        "ingest",
        serde_json::to_value(&config).context("echoing config")?,
    );
    for path in [
        &paths.publications,
        &paths.links,
        &paths.mentions,
        &paths.units,
        &paths.config,
    ] {
        manifest.add_input(path)?;
    }
    manifest.warnings = report.warnings.clone();
    for row_error in &report.row_errors {
        manifest.warnings.push(row_error.to_string());
    }
    manifest.write(&options.out_dir)?;

    if report.row_errors.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}
