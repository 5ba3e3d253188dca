//! `impactnorm meta`: random-effects pooling of study coefficients.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::Serialize;

use impactnorm_core::meta::{collapse_clusters, pool_random_effects, StudyCoefficient};

use crate::manifest::RunManifest;
use crate::report::{fmt_sig, write_tsv};

use super::{ensure_out_dir, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaMode {
    /// Every coefficient pooled directly.
    Direct,
    /// One aggregate per study, then pooled.
    Collapsed,
    /// Both of the above, one report row each.
    Both,
}

#[derive(Debug, Clone)]
pub struct MetaOptions {
    pub coefficients: PathBuf,
    pub mode: MetaMode,
    pub level: f64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetaRow {
    pub mode: &'static str,
    pub k: usize,
    pub r_pooled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tau_sq: f64,
}

/// Parse `coefficients.csv` (`study_id,r,n`). Malformed rows are fatal: the
/// file is an analysis input, not a bulk feed.
pub fn parse_coefficients(path: &PathBuf) -> anyhow::Result<Vec<StudyCoefficient>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers: Vec<&str> = reader.headers().context("reading header")?.iter().collect();
    if headers != ["study_id", "r", "n"] {
        bail!(
            "{}: expected header study_id,r,n, found {}",
            path.display(),
            headers.join(",")
        );
    }
    let mut coefficients = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("row {}", index + 2))?;
        let study_id = record.get(0).unwrap_or_default().to_string();
        let r: f64 = record
            .get(1)
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("row {}: bad r", index + 2))?;
        let n: f64 = record
            .get(2)
            .unwrap_or_default()
            .parse()
            .with_context(|| format!("row {}: bad n", index + 2))?;
        coefficients.push(
            StudyCoefficient::new(study_id, r, n)
                .with_context(|| format!("row {}", index + 2))?,
        );
    }
    if coefficients.is_empty() {
        bail!("{}: no coefficients to pool", path.display());
    }
    Ok(coefficients)
}

pub fn run_meta(options: &MetaOptions) -> anyhow::Result<Outcome> {
    let coefficients = parse_coefficients(&options.coefficients)?;

    let mut rows: Vec<MetaRow> = Vec::new();
    let mut add_row = |mode: &'static str, coeffs: &[StudyCoefficient]| -> anyhow::Result<()> {
        let pooled = pool_random_effects(coeffs, options.level)?;
        rows.push(MetaRow {
            mode,
            k: pooled.k,
            r_pooled: pooled.r_pooled,
            ci_low: pooled.ci_low,
            ci_high: pooled.ci_high,
            tau_sq: pooled.tau_sq,
        });
        Ok(())
    };
    if matches!(options.mode, MetaMode::Direct | MetaMode::Both) {
        add_row("direct", &coefficients)?;
    }
    if matches!(options.mode, MetaMode::Collapsed | MetaMode::Both) {
        let collapsed = collapse_clusters(&coefficients)?;
        add_row("collapsed", &collapsed)?;
    }

    ensure_out_dir(&options.out_dir)?;
    let tsv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.mode.to_string(),
                r.k.to_string(),
                fmt_sig(r.r_pooled, 6),
                fmt_sig(r.ci_low, 6),
                fmt_sig(r.ci_high, 6),
                fmt_sig(r.tau_sq, 6),
            ]
        })
        .collect();
    write_tsv(
        &options.out_dir.join("meta_report.tsv"),
        &["mode", "k", "r_pooled", "ci_low", "ci_high", "tau_sq"],
        &tsv_rows,
    )?;
    let sidecar = serde_json::json!({
        "manifest": crate::manifest::MANIFEST_FILE,
        "rows": rows,
    });
    std::fs::write(
        options.out_dir.join("meta_report.json"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;

    let mut manifest = RunManifest::new(
        "meta",
        serde_json::json!({
            "mode": match options.mode {
                MetaMode::Direct => "direct",
                MetaMode::Collapsed => "collapsed",
                MetaMode::Both => "both",
            },
            "level": options.level,
        }),
    );
    manifest.add_input(&options.coefficients)?;
    manifest.write(&options.out_dir)?;

    Ok(Outcome::Success)
}
