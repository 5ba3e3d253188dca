//! Peer-assessment scores and their correlation with indicator values.
//!
//! Star-rating profiles collapse to a scalar score via the linear 4/3/2/1/0
//! weighting. Unit-level indicator values are paired with unit scores and
//! correlated with Spearman's rank coefficient; intervals come from the
//! Fisher z-transform with standard error `1/sqrt(n - 3)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mhq::{compute_mhq, MhqError};
use crate::numeric::z_for_level;
use crate::record::{Dataset, Dimension, Role, Source, UnitId, UnitProfile};

#[derive(Debug, Error, PartialEq)]
pub enum AssessError {
    #[error("profile for unit {unit} sums to {sum}, outside 100 ± 0.5")]
    ProfileSumViolation { unit: String, sum: f64 },
    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation undefined: {0} input is constant")]
    ConstantInput(&'static str),
    #[error("too few units for a confidence interval: {n} (need at least 4)")]
    TooFewUnits { n: usize },
}

/// Scalar score of one unit on one dimension, on the 0-4 star scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitScore {
    pub unit_id: UnitId,
    pub dimension: Dimension,
    pub score: f64,
}

/// Spearman correlation with its confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub metric: Source,
    pub dimension: Dimension,
    pub n_units: usize,
    pub r_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Set when the coefficient was ±1 and the interval collapsed to a point.
    pub ci_degenerate: bool,
    /// Units dropped because their indicator value was degenerate or they
    /// lacked a profile for the dimension.
    pub units_dropped: usize,
}

/// Confidence interval for a Spearman coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpearmanCi {
    pub low: f64,
    pub high: f64,
    /// True when |r| = 1 forced a zero-width interval.
    pub degenerate: bool,
}

/// Collapse a star-rating profile to its weighted score:
/// `(4·pct4 + 3·pct3 + 2·pct2 + 1·pct1 + 0·pct0) / 100`.
pub fn unit_score(profile: &UnitProfile) -> Result<UnitScore, AssessError> {
    if !profile.is_valid() {
        return Err(AssessError::ProfileSumViolation {
            unit: profile.unit_id.to_string(),
            sum: profile.pct_sum(),
        });
    }
    let score = profile
        .pct
        .iter()
        .enumerate()
        .map(|(star, pct)| star as f64 * pct)
        .sum::<f64>()
        / 100.0;
    Ok(UnitScore {
        unit_id: profile.unit_id.clone(),
        dimension: profile.dimension,
        score,
    })
}

/// Ranks with average ranks for ties (1-based midranks).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("non-finite value"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Tied block occupies positions i..=j; all get the midrank.
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = midrank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, AssessError> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(AssessError::ConstantInput("left"));
    }
    if var_y == 0.0 {
        return Err(AssessError::ConstantInput("right"));
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: average ranks for ties, then Pearson on ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, AssessError> {
    if xs.len() != ys.len() {
        return Err(AssessError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(AssessError::TooFewUnits { n: xs.len() });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Fisher-z confidence interval for a Spearman coefficient.
///
/// `|r| = 1` cannot be transformed; per contract it yields a zero-width
/// interval flagged as degenerate rather than an error.
pub fn spearman_ci(r_s: f64, n: usize, level: f64) -> Result<SpearmanCi, AssessError> {
    if n < 4 {
        return Err(AssessError::TooFewUnits { n });
    }
    if r_s.abs() >= 1.0 {
        return Ok(SpearmanCi {
            low: r_s,
            high: r_s,
            degenerate: true,
        });
    }
    let z = r_s.atanh();
    let se = 1.0 / ((n - 3) as f64).sqrt();
    let half_width = z_for_level(level) * se;
    Ok(SpearmanCi {
        low: (z - half_width).tanh(),
        high: (z + half_width).tanh(),
        degenerate: false,
    })
}

/// Pair per-unit indicator values with unit scores and correlate.
///
/// For every unit holding papers in `role`, the indicator for `metric` is
/// computed with the unit's papers as the group; units whose indicator is
/// degenerate, or which lack a profile for `dimension`, are dropped and
/// counted (complete-case handling per metric).
pub fn correlate_units(
    dataset: &Dataset,
    metric: Source,
    role: Role,
    dimension: Dimension,
    threshold: u64,
    level: f64,
) -> Result<CorrelationResult, AssessError> {
    let groups = crate::ingest::unit_groups(dataset, role);
    let mut indicator_values = Vec::new();
    let mut scores = Vec::new();
    let mut dropped = 0usize;

    for (unit_id, group) in &groups {
        let profile = match dataset.profile(unit_id, dimension) {
            Some(p) => p,
            None => {
                dropped += 1;
                continue;
            }
        };
        let score = unit_score(profile)?;
        match compute_mhq(dataset, group, metric, threshold, level) {
            Ok(result) => {
                indicator_values.push(result.value);
                scores.push(score.score);
            }
            Err(
                MhqError::NoInformativeStrata
                | MhqError::DegenerateDenominator { .. }
                | MhqError::EmptyGroup(_),
            ) => {
                dropped += 1;
            }
        }
    }

    let n_units = indicator_values.len();
    if n_units < 4 {
        return Err(AssessError::TooFewUnits { n: n_units });
    }
    let r_s = spearman(&indicator_values, &scores)?;
    let ci = spearman_ci(r_s, n_units, level)?;
    Ok(CorrelationResult {
        metric,
        dimension,
        n_units,
        r_s,
        ci_low: ci.low,
        ci_high: ci.high,
        ci_degenerate: ci.degenerate,
        units_dropped: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(pcts: [f64; 5]) -> UnitProfile {
        UnitProfile {
            unit_id: UnitId::new("u1"),
            dimension: Dimension::Output,
            pct: pcts,
        }
    }

    #[test]
    fn score_of_reference_profile() {
        // pct indexed by star level: [0*, 1*, 2*, 3*, 4*]
        let p = profile([1.6, 5.2, 19.9, 41.6, 31.7]);
        let s = unit_score(&p).unwrap();
        assert!((s.score - 2.966).abs() < 1e-12, "score {}", s.score);
    }

    #[test]
    fn score_extremes() {
        assert_eq!(unit_score(&profile([0.0, 0.0, 0.0, 0.0, 100.0])).unwrap().score, 4.0);
        assert_eq!(unit_score(&profile([100.0, 0.0, 0.0, 0.0, 0.0])).unwrap().score, 0.0);
    }

    #[test]
    fn score_rejects_bad_sum() {
        let p = profile([0.0, 0.0, 0.0, 0.0, 98.0]);
        assert!(matches!(
            unit_score(&p),
            Err(AssessError::ProfileSumViolation { .. })
        ));
    }

    #[test]
    fn spearman_monotone_and_reversed() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_tied_hand_value() {
        // Midranks give 4.5 / sqrt(22.5) = 3 / sqrt(10).
        let r = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 3.0 / 10f64.sqrt()).abs() < 1e-14, "r {r}");
        assert!((r - 0.94868).abs() < 1e-5);
    }

    #[test]
    fn spearman_error_paths() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(AssessError::LengthMismatch { .. })
        ));
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(AssessError::ConstantInput("left"))
        ));
    }

    #[test]
    fn fisher_ci_reproduces_reference_row() {
        let ci = spearman_ci(0.57, 141, 0.95).unwrap();
        assert_eq!((ci.low * 100.0).round() / 100.0, 0.45);
        assert_eq!((ci.high * 100.0).round() / 100.0, 0.67);
        assert!(!ci.degenerate);
    }

    #[test]
    fn fisher_ci_symmetric_at_zero() {
        let ci = spearman_ci(0.0, 28, 0.95).unwrap();
        let expected = (1.96f64 / 25f64.sqrt()).tanh();
        assert!((ci.high - expected).abs() < 1e-14);
        assert!((ci.low + expected).abs() < 1e-14);
    }

    #[test]
    fn fisher_ci_edge_cases() {
        assert!(matches!(
            spearman_ci(0.5, 3, 0.95),
            Err(AssessError::TooFewUnits { n: 3 })
        ));
        let degenerate = spearman_ci(1.0, 10, 0.95).unwrap();
        assert!(degenerate.degenerate);
        assert_eq!((degenerate.low, degenerate.high), (1.0, 1.0));
    }

    #[test]
    fn ranks_average_over_ties() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn paired_vecs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (2usize..30).prop_flat_map(|n| {
                (
                    proptest::collection::vec(-1e3f64..1e3, n),
                    proptest::collection::vec(-1e3f64..1e3, n),
                )
            })
        }

        proptest! {
            #[test]
            fn spearman_is_symmetric((xs, ys) in paired_vecs()) {
                let forward = spearman(&xs, &ys);
                let backward = spearman(&ys, &xs);
                match (forward, backward) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                    (Err(_), Err(_)) => {}
                    other => prop_assert!(false, "asymmetric outcome {other:?}"),
                }
            }

            #[test]
            fn spearman_monotone_transform_invariant((xs, ys) in paired_vecs()) {
                if let Ok(base) = spearman(&xs, &ys) {
                    let ex: Vec<f64> = xs.iter().map(|x| (x / 1e3).exp()).collect();
                    let y3: Vec<f64> = ys.iter().map(|y| y.powi(3)).collect();
                    let transformed = spearman(&ex, &y3).unwrap();
                    prop_assert_eq!(base, transformed);
                }
            }

            #[test]
            fn unit_score_is_linear(
                a in proptest::array::uniform5(0.0f64..100.0),
                b in proptest::array::uniform5(0.0f64..100.0),
            ) {
                let norm = |p: [f64; 5]| {
                    let sum: f64 = p.iter().sum();
                    p.map(|v| v / sum * 100.0)
                };
                let pa = norm(a);
                let pb = norm(b);
                let blend: [f64; 5] =
                    std::array::from_fn(|i| 0.5 * pa[i] + 0.5 * pb[i]);
                let score = |p: [f64; 5]| {
                    unit_score(&UnitProfile {
                        unit_id: UnitId::new("u"),
                        dimension: Dimension::Output,
                        pct: p,
                    })
                    .unwrap()
                    .score
                };
                let blended = score(blend);
                let mean = 0.5 * score(pa) + 0.5 * score(pb);
                prop_assert!((blended - mean).abs() < 1e-12);
            }
        }
    }
}
