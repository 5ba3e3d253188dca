//! End-to-end flows across modules: generate → export → ingest → indicators
//! → correlations, plus the dataset-level invariants that only show up when
//! the pieces are wired together.

use std::collections::BTreeSet;

use impactnorm_core::assess::{correlate_units, AssessError};
use impactnorm_core::ingest::{self, InputPaths};
use impactnorm_core::mhq::{compute_mhq, MhqError};
use impactnorm_core::record::{Dimension, Role, Source};
use impactnorm_core::rng::SplitMix64;
use impactnorm_core::synth::{generate, SynthConfig};
use impactnorm_core::{partition_groups, unit_groups};

fn random_config(seed: u64) -> SynthConfig {
    let mut rng = SplitMix64::new(seed);
    SynthConfig {
        seed,
        n_units: 2 + rng.next_below(6) as usize,
        papers_per_unit: 5 + rng.next_below(40) as usize,
        n_cells: 1 + rng.next_below(5) as usize,
        year_range: (2008, 2008 + rng.next_below(7) as i32),
        pcs_only_fraction: 0.1 + 0.3 * rng.next_f64(),
        both_fraction: 0.2 * rng.next_f64(),
        ..SynthConfig::default()
    }
}

#[test]
fn three_groups_partition_linked_papers_on_random_datasets() {
    for seed in 0..50 {
        let (dataset, _) = generate(&random_config(seed)).unwrap();
        let groups = partition_groups(&dataset);
        let mut union = BTreeSet::new();
        let mut total = 0usize;
        for group in groups.iter() {
            total += group.len();
            union.extend(group.members.iter().cloned());
        }
        assert_eq!(union.len(), total, "groups overlap (seed {seed})");
        let linked: BTreeSet<_> = dataset.links.iter().map(|l| l.paper_id.clone()).collect();
        assert_eq!(union, linked, "union misses linked papers (seed {seed})");
    }
}

#[test]
fn ingest_accounting_balances_on_random_datasets() {
    for seed in 100..120 {
        let (dataset, _) = generate(&random_config(seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ingest::export_csv(&dataset, dir.path()).unwrap();
        let (rebuilt, report) = ingest::ingest(&InputPaths::in_dir(dir.path())).unwrap();
        assert_eq!(dataset, rebuilt);
        for (file, counts) in &report.files {
            assert_eq!(
                counts.rows_read,
                counts.rows_retained + counts.rows_dropped(),
                "accounting broken for {file} (seed {seed})"
            );
        }
    }
}

#[test]
fn reingesting_own_output_is_idempotent() {
    let (dataset, _) = generate(&SynthConfig {
        seed: 77,
        ..SynthConfig::default()
    })
    .unwrap();
    let dir1 = tempfile::tempdir().unwrap();
    ingest::export_csv(&dataset, dir1.path()).unwrap();
    let (first, _) = ingest::ingest(&InputPaths::in_dir(dir1.path())).unwrap();

    let dir2 = tempfile::tempdir().unwrap();
    ingest::export_csv(&first, dir2.path()).unwrap();
    let (second, _) = ingest::ingest(&InputPaths::in_dir(dir2.path())).unwrap();

    assert_eq!(first, second);
    assert_eq!(
        serde_json::to_vec(&first).unwrap(),
        serde_json::to_vec(&second).unwrap()
    );
}

#[test]
fn planted_monotone_unit_effect_yields_high_rank_correlation() {
    // Units with higher planted quality get both higher mention odds and
    // higher scores; the rank correlation across units must pick that up.
    let config = SynthConfig {
        seed: 2024,
        n_units: 16,
        papers_per_unit: 400,
        n_cells: 2,
        year_range: (2010, 2012),
        score_noise_sd: 0.0,
        unit_odds_log_spread: 3.0,
        ..SynthConfig::default()
    };
    let (dataset, truth) = generate(&config).unwrap();
    let result =
        correlate_units(&dataset, Source::Citations, Role::Output, Dimension::Output, 1, 0.95)
            .unwrap();
    assert!(result.r_s > 0.9, "r_s {}", result.r_s);
    assert_eq!(result.n_units, truth.config.n_units);
    assert!(result.ci_low > 0.0);
}

#[test]
fn null_unit_effect_gives_weak_correlation() {
    // No planted link between quality and mentions: the correlation should
    // be small and its CI should straddle zero for this seed.
    let config = SynthConfig {
        seed: 31337,
        n_units: 24,
        papers_per_unit: 200,
        n_cells: 2,
        unit_odds_log_spread: 0.0,
        ..SynthConfig::default()
    };
    let (dataset, _) = generate(&config).unwrap();
    let result =
        correlate_units(&dataset, Source::Citations, Role::Output, Dimension::Output, 1, 0.95)
            .unwrap();
    assert!(result.r_s.abs() < 0.5, "r_s {}", result.r_s);
    assert!(result.ci_low < 0.0 && result.ci_high > 0.0);
}

#[test]
fn group_equal_to_whole_dataset_has_no_information() {
    // World exclusion empties the comparator in every stratum.
    let (dataset, _) = generate(&SynthConfig {
        seed: 8,
        ..SynthConfig::default()
    })
    .unwrap();
    let everything = impactnorm_core::GroupSpec::new(
        "all",
        dataset.publications.keys().cloned().collect(),
    );
    assert!(matches!(
        compute_mhq(&dataset, &everything, Source::Citations, 1, 0.95),
        Err(MhqError::NoInformativeStrata)
    ));
}

#[test]
fn metric_without_mentions_leaves_too_few_units() {
    // Only citations carry mention data; every unit is degenerate for
    // twitter, so the correlation has no complete cases.
    let config = SynthConfig {
        seed: 12,
        base_mention_prob: [(Source::Citations, 0.4)].into_iter().collect(),
        ..SynthConfig::default()
    };
    let (dataset, _) = generate(&config).unwrap();
    assert!(matches!(
        correlate_units(&dataset, Source::Twitter, Role::Output, Dimension::Output, 1, 0.95),
        Err(AssessError::TooFewUnits { n: 0 })
    ));
}

#[test]
fn sparser_metrics_keep_fewer_complete_case_units() {
    // Complete-case filtering is per metric: sparse sources lose more units
    // to degenerate comparisons than dense ones.
    let config = SynthConfig {
        seed: 14,
        n_units: 30,
        papers_per_unit: 25,
        base_mention_prob: [(Source::Citations, 0.4), (Source::Policy, 0.01)]
            .into_iter()
            .collect(),
        ..SynthConfig::default()
    };
    let (dataset, _) = generate(&config).unwrap();
    let n_units = |metric| {
        correlate_units(&dataset, metric, Role::Output, Dimension::Output, 1, 0.95)
            .map(|r| r.n_units)
            .unwrap_or(0)
    };
    let dense = n_units(Source::Citations);
    let sparse = n_units(Source::Policy);
    assert!(
        dense > sparse,
        "expected sparse coverage to shrink n: citations {dense} vs policy {sparse}"
    );
}

#[test]
fn null_correlation_ci_covers_zero_at_nominal_rate() {
    // Independent scores and mention odds: the Fisher interval should
    // contain zero in roughly 95% of seeds.
    let seeds = 200;
    let mut covered = 0usize;
    for seed in 0..seeds {
        let config = SynthConfig {
            seed: 40_000 + seed,
            n_units: 20,
            papers_per_unit: 80,
            n_cells: 2,
            year_range: (2010, 2011),
            base_mention_prob: [(Source::Citations, 0.4)].into_iter().collect(),
            unit_odds_log_spread: 0.0,
            ..SynthConfig::default()
        };
        let (dataset, _) = generate(&config).unwrap();
        let result = correlate_units(
            &dataset,
            Source::Citations,
            Role::Output,
            Dimension::Output,
            1,
            0.95,
        )
        .unwrap();
        if result.ci_low <= 0.0 && 0.0 <= result.ci_high {
            covered += 1;
        }
    }
    let coverage = covered as f64 / seeds as f64;
    assert!(
        (0.88..=1.0).contains(&coverage),
        "null CI coverage {coverage} far from nominal"
    );
}

#[test]
fn unit_groups_respect_roles_across_the_pipeline() {
    let (dataset, _) = generate(&SynthConfig {
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap();
    let outputs = unit_groups(&dataset, Role::Output);
    let case_refs = unit_groups(&dataset, Role::CaseRef);
    for (unit, group) in &outputs {
        for paper in &group.members {
            assert!(dataset.links.iter().any(|l| {
                l.paper_id == *paper && l.unit_id == *unit && l.role == Role::Output
            }));
        }
    }
    // With the default fractions both maps should be non-empty.
    assert!(!outputs.is_empty() && !case_refs.is_empty());
}
