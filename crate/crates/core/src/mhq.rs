//! Pooled Mantel-Haenszel quotient over stratified fourfold tables.
//!
//! For each stratum the table contributes a numerator term `a·d'/n` and a
//! denominator term `b·c'/n`; the pooled quotient is the ratio of the two
//! compensated sums. The variance of the log quotient follows the
//! Fleiss/Levin/Paik estimator, and confidence bounds are exponentiated
//! normal-quantile offsets in log space.
//!
//! Degeneracy is reported, never silently turned into infinities:
//! a vanishing denominator sum is an explicit error carrying the reason,
//! and strata that cannot inform the comparison are counted and surfaced.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{z_for_level, KahanSum};
use crate::record::{Dataset, GroupSpec, Source};
use crate::stratify::{build_strata, cross_table, FourfoldTable};

#[derive(Debug, Error, PartialEq)]
pub enum MhqError {
    /// Every stratum was empty or one-sided: no table had papers on both
    /// the group side and the world side, so the comparison carries no
    /// information at all.
    #[error("no informative strata: no stratum contains both group and world papers")]
    NoInformativeStrata,
    /// One of the pooled sums vanished, so the quotient (or the variance of
    /// its log) is undefined.
    #[error("{}", degenerate_message(*numer, *denom))]
    DegenerateDenominator { numer: f64, denom: f64 },
    /// The group under evaluation has no members.
    #[error("group {0:?} has no members")]
    EmptyGroup(String),
}

fn degenerate_message(numer: f64, denom: f64) -> String {
    if denom == 0.0 {
        format!(
            "degenerate denominator sum (numerator {numer}): in every stratum either \
             every group paper was mentioned or every world paper was unmentioned"
        )
    } else {
        format!(
            "degenerate numerator sum (denominator {denom}): in every stratum either \
             no group paper was mentioned or every world paper was mentioned"
        )
    }
}

/// Per-stratum terms of the pooled estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratumTerms {
    /// Numerator contribution `a·d'/n`.
    pub numer_term: f64,
    /// Denominator contribution `b·c'/n`.
    pub denom_term: f64,
    /// Share of the stratum on the agreement diagonal, `(a + d')/n`.
    pub diag_frac: f64,
    /// Complement of `diag_frac`; the two sum to one exactly.
    pub off_frac: f64,
    /// Stratum size after group exclusion.
    pub size: f64,
}

/// Accumulated per-stratum terms plus the pooled sums and bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MhqAccumulator {
    pub strata: Vec<StratumTerms>,
    /// Pooled numerator sum.
    pub numer: f64,
    /// Pooled denominator sum.
    pub denom: f64,
    /// Strata with at least one paper.
    pub strata_used: usize,
    /// Strata skipped because they were empty.
    pub strata_skipped: usize,
    /// Used strata with papers on only one side of the comparison (no group
    /// papers, or a group covering the whole cell); they contribute zero to
    /// both sums and are surfaced rather than dropped.
    pub strata_uninformative: usize,
    /// Group papers across all strata.
    pub n_group: u64,
    /// World papers across all strata.
    pub n_world: u64,
}

/// Pooled quotient with its log-variance and confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhqResult {
    pub value: f64,
    pub var_log: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub strata_used: usize,
    pub strata_skipped: usize,
    pub strata_uninformative: usize,
    pub n_group: u64,
    pub n_world: u64,
}

/// Accumulate the tables and form the pooled point estimate.
///
/// Empty strata are skipped and counted. Fails with
/// [`MhqError::NoInformativeStrata`] when no stratum has papers on both
/// sides, and with [`MhqError::DegenerateDenominator`] when the denominator
/// sum is zero.
pub fn mhq_point(tables: &[FourfoldTable]) -> Result<(MhqAccumulator, f64), MhqError> {
    let mut acc = MhqAccumulator::default();
    let mut numer = KahanSum::new();
    let mut denom = KahanSum::new();
    let mut any_two_sided = false;

    for t in tables {
        let n = t.n();
        acc.n_group += t.a + t.b;
        acc.n_world += t.c_prime + t.d_prime;
        if n == 0 {
            acc.strata_skipped += 1;
            continue;
        }
        acc.strata_used += 1;
        let group_side = t.a + t.b;
        let world_side = t.c_prime + t.d_prime;
        if group_side == 0 || world_side == 0 {
            acc.strata_uninformative += 1;
        } else {
            any_two_sided = true;
        }
        let nf = n as f64;
        let numer_term = t.a as f64 * t.d_prime as f64 / nf;
        let denom_term = t.b as f64 * t.c_prime as f64 / nf;
        let diag_frac = (t.a + t.d_prime) as f64 / nf;
        acc.strata.push(StratumTerms {
            numer_term,
            denom_term,
            diag_frac,
            off_frac: 1.0 - diag_frac,
            size: nf,
        });
        numer.add(numer_term);
        denom.add(denom_term);
    }

    if acc.strata_used == 0 || !any_two_sided {
        return Err(MhqError::NoInformativeStrata);
    }
    acc.numer = numer.value();
    acc.denom = denom.value();
    if acc.denom == 0.0 {
        return Err(MhqError::DegenerateDenominator {
            numer: acc.numer,
            denom: 0.0,
        });
    }
    let value = acc.numer / acc.denom;
    Ok((acc, value))
}

/// Variance of the log of the pooled quotient (Fleiss/Levin/Paik form).
///
/// Requires both pooled sums to be positive.
pub fn mhq_variance(acc: &MhqAccumulator) -> Result<f64, MhqError> {
    if acc.numer <= 0.0 || acc.denom <= 0.0 {
        return Err(MhqError::DegenerateDenominator {
            numer: acc.numer,
            denom: acc.denom,
        });
    }
    let mut diag_numer = KahanSum::new(); // Σ diag_frac · numer_term
    let mut cross = KahanSum::new(); // Σ (diag_frac · denom_term + off_frac · numer_term)
    let mut off_denom = KahanSum::new(); // Σ off_frac · denom_term
    for s in &acc.strata {
        diag_numer.add(s.diag_frac * s.numer_term);
        cross.add(s.diag_frac * s.denom_term + s.off_frac * s.numer_term);
        off_denom.add(s.off_frac * s.denom_term);
    }
    let r = acc.numer;
    let s = acc.denom;
    Ok(0.5 * (diag_numer.value() / (r * r) + cross.value() / (r * s) + off_denom.value() / (s * s)))
}

/// Confidence interval for the quotient: exponentiated normal offsets around
/// the log point value. Level 0.95 uses the 1.96 multiplier verbatim.
pub fn mhq_ci(value: f64, var_log: f64, level: f64) -> (f64, f64) {
    assert!(value > 0.0, "point value must be positive");
    assert!(var_log >= 0.0, "variance must be non-negative");
    let half_width = z_for_level(level) * var_log.sqrt();
    let log_value = value.ln();
    ((log_value - half_width).exp(), (log_value + half_width).exp())
}

/// Full pipeline for one (group, metric) comparison: stratify the dataset,
/// build one group-excluded table per stratum, pool, and attach bookkeeping.
pub fn compute_mhq(
    dataset: &Dataset,
    group: &GroupSpec,
    metric: Source,
    threshold: u64,
    level: f64,
) -> Result<MhqResult, MhqError> {
    if group.is_empty() {
        return Err(MhqError::EmptyGroup(group.label.clone()));
    }
    let strata = build_strata(dataset);
    let tables: Vec<FourfoldTable> = strata
        .strata
        .iter()
        .map(|stratum| cross_table(dataset, stratum, group, metric, threshold))
        .collect();
    let (acc, value) = mhq_point(&tables)?;
    let var_log = mhq_variance(&acc)?;
    let (ci_low, ci_high) = mhq_ci(value, var_log, level);
    Ok(MhqResult {
        value,
        var_log,
        ci_low,
        ci_high,
        strata_used: acc.strata_used,
        strata_skipped: acc.strata_skipped,
        strata_uninformative: acc.strata_uninformative,
        n_group: acc.n_group,
        n_world: acc.n_world,
    })
}
