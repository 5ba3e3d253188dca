//! `impactnorm mhq`: pooled quotient per (group, metric).
//!
//! Three-group mode evaluates the disjoint case-study/output/both groups;
//! metric blocks are ordered by the difference between the case-study and
//! output values, largest first, so the report reads like the reference
//! figure. Per-unit mode evaluates one group per unit for a chosen role.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use impactnorm_core::ingest::partition_groups;
use impactnorm_core::mhq::{compute_mhq, MhqError};
use impactnorm_core::record::{Dataset, GroupSpec, Role, Source};
use impactnorm_core::unit_groups;

use crate::manifest::RunManifest;
use crate::report::{opt_sig, write_tsv};

use super::{ensure_out_dir, load_archive, thread_pool, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupsMode {
    ThreeGroup,
    PerUnit,
}

#[derive(Debug, Clone)]
pub struct MhqOptions {
    pub archive: PathBuf,
    pub mode: GroupsMode,
    /// Role defining per-unit groups; ignored in three-group mode.
    pub role: Role,
    pub metrics: Vec<Source>,
    /// Config file overriding the archive's embedded analysis settings.
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// One report row. Float fields are `None` when the comparison was
/// degenerate; the `status` column says why.
#[derive(Debug, Clone, Serialize)]
pub struct MhqRow {
    pub group: String,
    pub metric: Source,
    pub status: String,
    pub mhq: Option<f64>,
    pub var_log: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub n_group: u64,
    pub n_world: u64,
    pub strata_used: usize,
    pub strata_skipped: usize,
    pub strata_uninformative: usize,
}

pub fn status_of(error: &MhqError) -> &'static str {
    match error {
        MhqError::NoInformativeStrata => "no-informative-strata",
        MhqError::DegenerateDenominator { .. } => "degenerate-denominator",
        MhqError::EmptyGroup(_) => "empty-group",
    }
}

fn evaluate(dataset: &Dataset, group: &GroupSpec, metric: Source) -> MhqRow {
    let threshold = dataset.config.mention_threshold;
    let level = dataset.config.ci_level;
    match compute_mhq(dataset, group, metric, threshold, level) {
        Ok(result) => MhqRow {
            group: group.label.clone(),
            metric,
            status: "ok".into(),
            mhq: Some(result.value),
            var_log: Some(result.var_log),
            ci_low: Some(result.ci_low),
            ci_high: Some(result.ci_high),
            n_group: result.n_group,
            n_world: result.n_world,
            strata_used: result.strata_used,
            strata_skipped: result.strata_skipped,
            strata_uninformative: result.strata_uninformative,
        },
        Err(error) => MhqRow {
            group: group.label.clone(),
            metric,
            status: status_of(&error).into(),
            mhq: None,
            var_log: None,
            ci_low: None,
            ci_high: None,
            n_group: group.len() as u64,
            n_world: (dataset.n_papers() - group.len()) as u64,
            strata_used: 0,
            strata_skipped: 0,
            strata_uninformative: 0,
        },
    }
}

/// Compute the report rows for a dataset, already sorted for output.
pub fn mhq_report_rows(
    dataset: &Dataset,
    mode: GroupsMode,
    role: Role,
    metrics: &[Source],
) -> anyhow::Result<Vec<MhqRow>> {
    let pool = thread_pool()?;
    let groups: Vec<GroupSpec> = match mode {
        GroupsMode::ThreeGroup => partition_groups(dataset).iter().cloned().collect(),
        GroupsMode::PerUnit => unit_groups(dataset, role).into_values().collect(),
    };

    let jobs: Vec<(&GroupSpec, Source)> = metrics
        .iter()
        .flat_map(|metric| groups.iter().map(move |group| (group, *metric)))
        .collect();
    let mut rows: Vec<MhqRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(group, metric)| evaluate(dataset, group, *metric))
            .collect()
    });

    match mode {
        GroupsMode::ThreeGroup => {
            // Metric blocks ordered by the case-study minus output
            // difference, descending; metrics with a degenerate side go
            // last, alphabetically.
            let difference = |metric: Source| -> Option<f64> {
                let value = |label: &str| {
                    rows.iter()
                        .find(|r| r.metric == metric && r.group == label)
                        .and_then(|r| r.mhq)
                };
                Some(value(impactnorm_core::ingest::LABEL_PCS)? - value(impactnorm_core::ingest::LABEL_PRO)?)
            };
            let mut metric_order: Vec<(Source, Option<f64>)> =
                metrics.iter().map(|m| (*m, difference(*m))).collect();
            metric_order.sort_by(|(ma, da), (mb, db)| match (da, db) {
                (Some(a), Some(b)) => b
                    .partial_cmp(a)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| ma.as_str().cmp(mb.as_str())),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => ma.as_str().cmp(mb.as_str()),
            });
            let group_rank = |label: &str| match label {
                impactnorm_core::ingest::LABEL_PCS => 0,
                impactnorm_core::ingest::LABEL_PRO => 1,
                _ => 2,
            };
            let metric_rank = |metric: Source| {
                metric_order
                    .iter()
                    .position(|(m, _)| *m == metric)
                    .unwrap_or(usize::MAX)
            };
            rows.sort_by_key(|r| (metric_rank(r.metric), group_rank(&r.group)));
        }
        GroupsMode::PerUnit => {
            let metric_rank = |metric: Source| {
                metrics.iter().position(|m| *m == metric).unwrap_or(usize::MAX)
            };
            rows.sort_by(|a, b| {
                a.group
                    .cmp(&b.group)
                    .then_with(|| metric_rank(a.metric).cmp(&metric_rank(b.metric)))
            });
        }
    }
    Ok(rows)
}

pub fn run_mhq(options: &MhqOptions) -> anyhow::Result<Outcome> {
    let mut dataset = load_archive(&options.archive)?;
    if let Some(config_path) = &options.config {
        dataset.config = impactnorm_core::ingest::parse_config(config_path)?;
    }
    let rows = mhq_report_rows(&dataset, options.mode, options.role, &options.metrics)?;

    ensure_out_dir(&options.out_dir)?;
    let tsv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.metric.to_string(),
                opt_sig(r.mhq),
                opt_sig(r.ci_low),
                opt_sig(r.ci_high),
                r.n_group.to_string(),
                r.strata_used.to_string(),
                r.strata_skipped.to_string(),
                r.status.clone(),
            ]
        })
        .collect();
    write_tsv(
        &options.out_dir.join("mhq_report.tsv"),
        &[
            "group",
            "metric",
            "mhq",
            "ci_low",
            "ci_high",
            "n_group",
            "strata_used",
            "strata_skipped",
            "status",
        ],
        &tsv_rows,
    )?;
    let sidecar = serde_json::json!({
        "manifest": crate::manifest::MANIFEST_FILE,
        "rows": rows,
    });
    std::fs::write(
        options.out_dir.join("mhq_report.json"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;

    let mut manifest = RunManifest::new(
        "mhq",
        serde_json::json!({
            "mode": match options.mode {
                GroupsMode::ThreeGroup => "three-group",
                GroupsMode::PerUnit => "per-unit",
            },
            "role": options.role.as_str(),
            "metrics": options.metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
            "analysis": serde_json::to_value(&dataset.config)?,
        }),
    );
    manifest.add_input(&options.archive)?;
    if let Some(config) = &options.config {
        manifest.add_input(config)?;
    }
    manifest.write(&options.out_dir)?;

    if rows.iter().all(|r| r.status == "ok") {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}
