//! Deterministic synthetic datasets with planted effects.
//!
//! Generation is a pure function of the config: the same seed yields a
//! byte-identical dataset on any platform (the generator is SplitMix64, see
//! [`crate::rng`]). Planted parameters — per-source odds ratios for
//! case-study papers, per-unit quality driving both mention odds and peer
//! scores — are echoed in a [`GroundTruth`] so tests and calibration runs
//! can check recovery against what was actually planted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{
    Dataset, DatasetConfig, Dimension, PaperId, PublicationRecord, Role, Source, SubmissionLink,
    UnitId, UnitProfile,
};
use crate::rng::{SplitMix64, GENERATOR_ID};
use crate::stratify::partition_cell;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_units: usize,
    pub papers_per_unit: usize,
    /// Number of distinct partition cells papers are spread over.
    pub n_cells: usize,
    /// Inclusive publication-year range; becomes the dataset's year bounds.
    pub year_range: (i32, i32),
    /// Baseline mention probability per source; only sources listed here
    /// get mention data.
    pub base_mention_prob: BTreeMap<Source, f64>,
    /// Odds multiplier applied to case-study papers, per source. Sources
    /// not listed default to 1 (no planted effect).
    pub group_odds_ratio: BTreeMap<Source, f64>,
    /// Standard deviation of the noise added to unit scores.
    pub score_noise_sd: f64,
    /// Probability that a paper is linked as a case-study reference only.
    pub pcs_only_fraction: f64,
    /// Probability that a paper is linked in both roles.
    pub both_fraction: f64,
    /// Log-odds spread of the per-unit mention effect: unit quality q maps
    /// to an odds multiplier exp(spread · (q − ½)). Zero disables it.
    pub unit_odds_log_spread: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let base_mention_prob = [
            (Source::Twitter, 0.15),
            (Source::Facebook, 0.08),
            (Source::Blogs, 0.06),
            (Source::News, 0.05),
            (Source::Policy, 0.02),
            (Source::Wikipedia, 0.03),
            (Source::Citations, 0.40),
        ]
        .into_iter()
        .collect();
        SynthConfig {
            seed: 1,
            n_units: 20,
            papers_per_unit: 60,
            n_cells: 4,
            year_range: (2008, 2014),
            base_mention_prob,
            group_odds_ratio: BTreeMap::new(),
            score_noise_sd: 0.2,
            pcs_only_fraction: 0.15,
            both_fraction: 0.05,
            unit_odds_log_spread: 0.0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.n_units == 0 || self.papers_per_unit == 0 {
            return fail("n_units and papers_per_unit must be positive".into());
        }
        if self.n_cells == 0 || self.n_cells > 89 {
            return fail(format!("n_cells {} outside 1..=89", self.n_cells));
        }
        if self.year_range.0 > self.year_range.1 {
            return fail(format!("empty year range {:?}", self.year_range));
        }
        if self.base_mention_prob.is_empty() {
            return fail("base_mention_prob must list at least one source".into());
        }
        for (source, p) in &self.base_mention_prob {
            if p.is_nan() || *p <= 0.0 || *p >= 1.0 {
                return fail(format!("base probability {p} for {source} outside (0, 1)"));
            }
        }
        for (source, or) in &self.group_odds_ratio {
            if or.is_nan() || *or < 0.0 {
                return fail(format!("odds ratio {or} for {source} negative"));
            }
        }
        if self.score_noise_sd.is_nan() || self.score_noise_sd < 0.0 {
            return fail(format!("score_noise_sd {} negative", self.score_noise_sd));
        }
        if self.pcs_only_fraction < 0.0
            || self.both_fraction < 0.0
            || self.pcs_only_fraction + self.both_fraction >= 1.0
        {
            return fail("role fractions must be non-negative and sum below 1".into());
        }
        if !self.unit_odds_log_spread.is_finite() {
            return fail("unit_odds_log_spread must be finite".into());
        }
        Ok(())
    }
}

/// Everything that was planted, for recovery checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Identity of the pseudo-random generator algorithm.
    pub generator: String,
    pub config: SynthConfig,
    pub unit_quality: BTreeMap<UnitId, f64>,
    pub unit_odds_multiplier: BTreeMap<UnitId, f64>,
    pub n_pcs_only: usize,
    pub n_pro_only: usize,
    pub n_both: usize,
}

fn scaled_probability(base: f64, odds_multiplier: f64) -> f64 {
    let odds = base / (1.0 - base) * odds_multiplier;
    odds / (1.0 + odds)
}

/// Two-point star profile whose weighted score equals `score` exactly.
fn profile_for_score(unit_id: &UnitId, dimension: Dimension, score: f64) -> UnitProfile {
    let score = score.clamp(0.0, 4.0);
    let mut pct = [0.0; 5];
    let lower = (score.floor() as usize).min(3);
    let frac = score - lower as f64;
    pct[lower] = (1.0 - frac) * 100.0;
    pct[lower + 1] = frac * 100.0;
    UnitProfile {
        unit_id: unit_id.clone(),
        dimension,
        pct,
    }
}

/// Generate a dataset plus the ground truth of everything planted.
pub fn generate(config: &SynthConfig) -> Result<(Dataset, GroundTruth), SynthError> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);

    let n_years = (config.year_range.1 - config.year_range.0 + 1) as u64;
    let mut publications = BTreeMap::new();
    let mut links = std::collections::BTreeSet::new();
    let mut mentions: BTreeMap<PaperId, BTreeMap<Source, u64>> = BTreeMap::new();
    let mut unit_profiles: BTreeMap<UnitId, BTreeMap<Dimension, UnitProfile>> = BTreeMap::new();
    let mut unit_quality = BTreeMap::new();
    let mut unit_odds_multiplier = BTreeMap::new();
    let (mut n_pcs_only, mut n_pro_only, mut n_both) = (0usize, 0usize, 0usize);

    let mut paper_index = 0usize;
    for unit_index in 0..config.n_units {
        let unit_id = UnitId::new(format!("U{unit_index:04}"));
        let quality = rng.next_f64();
        let multiplier = (config.unit_odds_log_spread * (quality - 0.5)).exp();
        unit_quality.insert(unit_id.clone(), quality);
        unit_odds_multiplier.insert(unit_id.clone(), multiplier);

        for _ in 0..config.papers_per_unit {
            let paper_id = PaperId::new(format!("P{paper_index:06}"));
            paper_index += 1;

            let cell_index = rng.next_below(config.n_cells as u64);
            let code = format!("{:02}00", 10 + cell_index);
            let subject_codes: std::collections::BTreeSet<String> =
                [code.clone()].into_iter().collect();
            let pub_year = config.year_range.0 + rng.next_below(n_years) as i32;

            let role_draw = rng.next_f64();
            let (case_ref, output) = if role_draw < config.pcs_only_fraction {
                n_pcs_only += 1;
                (true, false)
            } else if role_draw < config.pcs_only_fraction + config.both_fraction {
                n_both += 1;
                (true, true)
            } else {
                n_pro_only += 1;
                (false, true)
            };
            if case_ref {
                links.insert(SubmissionLink {
                    paper_id: paper_id.clone(),
                    unit_id: unit_id.clone(),
                    role: Role::CaseRef,
                });
            }
            if output {
                links.insert(SubmissionLink {
                    paper_id: paper_id.clone(),
                    unit_id: unit_id.clone(),
                    role: Role::Output,
                });
            }

            for (source, base) in &config.base_mention_prob {
                let mut odds_multiplier = multiplier;
                if case_ref {
                    odds_multiplier *= config.group_odds_ratio.get(source).copied().unwrap_or(1.0);
                }
                let p = scaled_probability(*base, odds_multiplier);
                if rng.bernoulli(p) {
                    // Mentioned papers carry a small geometric-ish count so
                    // the data stay zero-inflated but not binary.
                    let mut count = 1u64;
                    while count < 20 && rng.bernoulli(0.35) {
                        count += 1;
                    }
                    mentions
                        .entry(paper_id.clone())
                        .or_default()
                        .insert(*source, count);
                }
            }

            let cell = partition_cell(subject_codes.iter().map(String::as_str))
                .expect("generated codes are valid");
            publications.insert(
                paper_id.clone(),
                PublicationRecord {
                    paper_id,
                    doi: Some(format!("10.5555/p{:06}", paper_index - 1)),
                    pub_year,
                    subject_codes,
                    cell,
                },
            );
        }

        // Peer scores track the planted quality, with independent noise per
        // dimension.
        let base_score = 0.5 + 3.0 * quality;
        for dimension in [Dimension::Output, Dimension::Impact] {
            let noisy = base_score + config.score_noise_sd * rng.next_normal();
            unit_profiles
                .entry(unit_id.clone())
                .or_default()
                .insert(dimension, profile_for_score(&unit_id, dimension, noisy));
        }
    }

    let dataset = Dataset {
        publications,
        links,
        mentions,
        unit_profiles,
        config: DatasetConfig {
            year_min: config.year_range.0,
            year_max: config.year_range.1,
            ci_level: 0.95,
            mention_threshold: 1,
        },
    };
    debug_assert!(dataset.find_dangling().is_none());

    let ground_truth = GroundTruth {
        generator: GENERATOR_ID.to_string(),
        config: config.clone(),
        unit_quality,
        unit_odds_multiplier,
        n_pcs_only,
        n_pro_only,
        n_both,
    };
    Ok((dataset, ground_truth))
}

/// Write the generated dataset in the ingest CSV formats plus
/// `ground_truth.json`.
pub fn write_outputs(
    dataset: &Dataset,
    ground_truth: &GroundTruth,
    dir: impl AsRef<std::path::Path>,
) -> std::io::Result<()> {
    let dir = dir.as_ref();
    crate::ingest::export_csv(dataset, dir)?;
    let json = serde_json::to_string_pretty(ground_truth).expect("ground truth serializes");
    std::fs::write(dir.join("ground_truth.json"), json)
}
