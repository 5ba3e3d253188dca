//! Browser bindings for the interactive demo page.
//!
//! Every export takes and returns plain strings or numbers (JSON payloads),
//! so the same functions compile and unit-test on the host. Errors come
//! back as `{"error": "..."}` objects instead of exceptions.
//!
//! Build for the web with `wasm-pack build crates/wasm-demo --target web`
//! and serve `crates/wasm-demo/www/`.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

use impactnorm_core::assess::spearman_ci;
use impactnorm_core::ingest::partition_groups;
use impactnorm_core::meta::{collapse_clusters, pool_random_effects, StudyCoefficient};
use impactnorm_core::mhq::{compute_mhq, mhq_ci, mhq_point, mhq_variance};
use impactnorm_core::record::Source;
use impactnorm_core::stratify::FourfoldTable;
use impactnorm_core::synth::{generate, SynthConfig};

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_else(|e| error_json(&e.to_string()))
}

fn error_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

#[derive(Serialize)]
struct MhqOut {
    value: f64,
    var_log: f64,
    ci_low: f64,
    ci_high: f64,
    strata_used: usize,
    strata_skipped: usize,
}

/// Pooled quotient from hand-edited tables.
///
/// Input: JSON array of `[a, b, c_prime, d_prime]` rows, one per stratum.
#[wasm_bindgen]
pub fn mhq_from_tables(tables_json: &str, level: f64) -> String {
    let cells: Vec<[u64; 4]> = match serde_json::from_str(tables_json) {
        Ok(cells) => cells,
        Err(e) => return error_json(&format!("bad tables: {e}")),
    };
    let tables: Vec<FourfoldTable> = cells
        .iter()
        .map(|[a, b, c, d]| FourfoldTable::new(*a, *b, *c, *d))
        .collect();
    let (acc, value) = match mhq_point(&tables) {
        Ok(ok) => ok,
        Err(e) => return error_json(&e.to_string()),
    };
    let var_log = match mhq_variance(&acc) {
        Ok(var) => var,
        Err(e) => return error_json(&e.to_string()),
    };
    if !(level > 0.0 && level < 1.0) {
        return error_json("level must be in (0, 1)");
    }
    let (ci_low, ci_high) = mhq_ci(value, var_log, level);
    to_json(&MhqOut {
        value,
        var_log,
        ci_low,
        ci_high,
        strata_used: acc.strata_used,
        strata_skipped: acc.strata_skipped,
    })
}

#[derive(Serialize)]
struct DemoRow {
    group: String,
    n_group: u64,
    status: String,
    mhq: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

/// Three-group indicator comparison on a synthetic dataset with a planted
/// case-study odds ratio — the parameter-explorable end of the pipeline.
#[wasm_bindgen]
pub fn indicator_demo(seed: u64, odds_ratio: f64, papers_per_unit: u32) -> String {
    if !odds_ratio.is_finite() || odds_ratio < 0.0 {
        return error_json("odds ratio must be a non-negative number");
    }
    let papers = papers_per_unit.clamp(10, 5_000) as usize;
    let config = SynthConfig {
        seed,
        n_units: 12,
        papers_per_unit: papers,
        n_cells: 2,
        year_range: (2010, 2012),
        base_mention_prob: [(Source::Policy, 0.05)].into_iter().collect(),
        group_odds_ratio: [(Source::Policy, odds_ratio)].into_iter().collect(),
        score_noise_sd: 0.0,
        pcs_only_fraction: 0.2,
        both_fraction: 0.05,
        unit_odds_log_spread: 0.0,
    };
    let (dataset, _) = match generate(&config) {
        Ok(ok) => ok,
        Err(e) => return error_json(&e.to_string()),
    };
    let groups = partition_groups(&dataset);
    let rows: Vec<DemoRow> = groups
        .iter()
        .map(|group| match compute_mhq(&dataset, group, Source::Policy, 1, 0.95) {
            Ok(result) => DemoRow {
                group: group.label.clone(),
                n_group: result.n_group,
                status: "ok".into(),
                mhq: Some(result.value),
                ci_low: Some(result.ci_low),
                ci_high: Some(result.ci_high),
            },
            Err(e) => DemoRow {
                group: group.label.clone(),
                n_group: group.len() as u64,
                status: e.to_string(),
                mhq: None,
                ci_low: None,
                ci_high: None,
            },
        })
        .collect();
    to_json(&rows)
}

#[derive(Serialize)]
struct SpearmanCiOut {
    r_s: f64,
    n: usize,
    ci_low: f64,
    ci_high: f64,
    degenerate: bool,
}

/// Fisher-transform confidence interval for a rank correlation.
#[wasm_bindgen]
pub fn spearman_ci_json(r_s: f64, n: u32, level: f64) -> String {
    if !(-1.0..=1.0).contains(&r_s) {
        return error_json("coefficient must be in [-1, 1]");
    }
    if !(level > 0.0 && level < 1.0) {
        return error_json("level must be in (0, 1)");
    }
    match spearman_ci(r_s, n as usize, level) {
        Ok(ci) => to_json(&SpearmanCiOut {
            r_s,
            n: n as usize,
            ci_low: ci.low,
            ci_high: ci.high,
            degenerate: ci.degenerate,
        }),
        Err(e) => error_json(&e.to_string()),
    }
}

#[derive(Deserialize)]
struct CoefficientIn {
    study_id: String,
    r: f64,
    n: f64,
}

#[derive(Serialize)]
struct PooledOut {
    mode: &'static str,
    k: usize,
    r_pooled: f64,
    ci_low: f64,
    ci_high: f64,
    tau_sq: f64,
}

/// Random-effects pooling of pasted coefficients.
///
/// Input: JSON array of `{study_id, r, n}`; `collapse` aggregates each
/// study's coefficients first.
#[wasm_bindgen]
pub fn meta_pool_json(coefficients_json: &str, collapse: bool, level: f64) -> String {
    let raw: Vec<CoefficientIn> = match serde_json::from_str(coefficients_json) {
        Ok(rows) => rows,
        Err(e) => return error_json(&format!("bad coefficients: {e}")),
    };
    if !(level > 0.0 && level < 1.0) {
        return error_json("level must be in (0, 1)");
    }
    let mut coefficients = Vec::with_capacity(raw.len());
    for row in raw {
        match StudyCoefficient::new(row.study_id, row.r, row.n) {
            Ok(c) => coefficients.push(c),
            Err(e) => return error_json(&e.to_string()),
        }
    }
    let (mode, pooled) = if collapse {
        let collapsed = match collapse_clusters(&coefficients) {
            Ok(c) => c,
            Err(e) => return error_json(&e.to_string()),
        };
        ("collapsed", pool_random_effects(&collapsed, level))
    } else {
        ("direct", pool_random_effects(&coefficients, level))
    };
    match pooled {
        Ok(result) => to_json(&PooledOut {
            mode,
            k: result.k,
            r_pooled: result.r_pooled,
            ci_low: result.ci_low,
            ci_high: result.ci_high,
            tau_sq: result.tau_sq,
        }),
        Err(e) => error_json(&e.to_string()),
    }
}
