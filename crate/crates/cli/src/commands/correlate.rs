//! `impactnorm correlate`: Spearman correlation between per-unit quotients
//! and peer scores, over the metric × dimension grid (output scores pair
//! with output groups, impact scores with case-study groups).

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use impactnorm_core::assess::{correlate_units, AssessError};
use impactnorm_core::record::{Dataset, Dimension, Role, Source};

use crate::manifest::RunManifest;
use crate::report::{opt_sig, write_tsv};

use super::{ensure_out_dir, load_archive, thread_pool, Outcome};

#[derive(Debug, Clone)]
pub struct CorrelateOptions {
    pub archive: PathBuf,
    pub metrics: Vec<Source>,
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrRow {
    pub metric: Source,
    pub dimension: Dimension,
    pub status: String,
    pub n_units: usize,
    pub r_s: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub units_dropped: Option<usize>,
}

fn role_for(dimension: Dimension) -> Role {
    match dimension {
        Dimension::Output => Role::Output,
        Dimension::Impact => Role::CaseRef,
    }
}

fn evaluate(dataset: &Dataset, metric: Source, dimension: Dimension) -> CorrRow {
    let threshold = dataset.config.mention_threshold;
    let level = dataset.config.ci_level;
    match correlate_units(dataset, metric, role_for(dimension), dimension, threshold, level) {
        Ok(result) => CorrRow {
            metric,
            dimension,
            status: if result.ci_degenerate {
                "ok-degenerate-ci".into()
            } else {
                "ok".into()
            },
            n_units: result.n_units,
            r_s: Some(result.r_s),
            ci_low: Some(result.ci_low),
            ci_high: Some(result.ci_high),
            units_dropped: Some(result.units_dropped),
        },
        Err(error) => {
            let status = match &error {
                AssessError::TooFewUnits { .. } => "too-few-units",
                AssessError::ConstantInput(_) => "constant-input",
                AssessError::LengthMismatch { .. } => "length-mismatch",
                AssessError::ProfileSumViolation { .. } => "profile-sum-violation",
            };
            let n_units = match error {
                AssessError::TooFewUnits { n } => n,
                _ => 0,
            };
            CorrRow {
                metric,
                dimension,
                status: status.into(),
                n_units,
                r_s: None,
                ci_low: None,
                ci_high: None,
                units_dropped: None,
            }
        }
    }
}

/// Rows over the metric × dimension grid, in input metric order.
pub fn correlate_report_rows(
    dataset: &Dataset,
    metrics: &[Source],
) -> anyhow::Result<Vec<CorrRow>> {
    let pool = thread_pool()?;
    let jobs: Vec<(Source, Dimension)> = metrics
        .iter()
        .flat_map(|m| [(*m, Dimension::Output), (*m, Dimension::Impact)])
        .collect();
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(metric, dimension)| evaluate(dataset, *metric, *dimension))
            .collect()
    }))
}

pub fn run_correlate(options: &CorrelateOptions) -> anyhow::Result<Outcome> {
    let mut dataset = load_archive(&options.archive)?;
    if let Some(config_path) = &options.config {
        dataset.config = impactnorm_core::ingest::parse_config(config_path)?;
    }
    let rows = correlate_report_rows(&dataset, &options.metrics)?;

    ensure_out_dir(&options.out_dir)?;
    let tsv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.metric.to_string(),
                r.dimension.to_string(),
                r.n_units.to_string(),
                opt_sig(r.r_s),
                opt_sig(r.ci_low),
                opt_sig(r.ci_high),
                r.status.clone(),
            ]
        })
        .collect();
    write_tsv(
        &options.out_dir.join("corr_report.tsv"),
        &["metric", "dimension", "n_units", "r_s", "ci_low", "ci_high", "status"],
        &tsv_rows,
    )?;
    let sidecar = serde_json::json!({
        "manifest": crate::manifest::MANIFEST_FILE,
        "rows": rows,
    });
    std::fs::write(
        options.out_dir.join("corr_report.json"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;

    let mut manifest = RunManifest::new(
        "correlate",
        serde_json::json!({
            "metrics": options.metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
            "analysis": serde_json::to_value(&dataset.config)?,
        }),
    );
    manifest.add_input(&options.archive)?;
    if let Some(config) = &options.config {
        manifest.add_input(config)?;
    }
    manifest.write(&options.out_dir)?;

    if rows.iter().all(|r| r.status.starts_with("ok")) {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}
