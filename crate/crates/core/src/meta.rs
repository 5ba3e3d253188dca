//! Random-effects pooling of correlation coefficients.
//!
//! Coefficients are pooled on the Fisher z-scale with per-coefficient
//! variance `1/(n - 3)` and the DerSimonian-Laird moment estimator for the
//! between-study variance. Studies reporting several coefficients can either
//! be pooled directly (every coefficient a row) or collapsed to one
//! aggregate per study first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::z_for_level;

#[derive(Debug, Error, PartialEq)]
pub enum MetaError {
    #[error("no coefficients to pool")]
    EmptyInput,
    #[error("coefficient {r} outside (-1, 1)")]
    OutOfRange { r: f64 },
    #[error("sample size {n} too small (need n ≥ 4)")]
    SampleTooSmall { n: f64 },
}

/// One reported correlation coefficient.
///
/// `n` is kept as a float so that collapsed aggregates can carry a
/// fractional effective sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCoefficient {
    pub study_id: String,
    pub r: f64,
    pub n: f64,
}

impl StudyCoefficient {
    pub fn new(study_id: impl Into<String>, r: f64, n: f64) -> Result<Self, MetaError> {
        if r.is_nan() || r <= -1.0 || r >= 1.0 {
            return Err(MetaError::OutOfRange { r });
        }
        if n.is_nan() || n < 4.0 {
            return Err(MetaError::SampleTooSmall { n });
        }
        Ok(StudyCoefficient {
            study_id: study_id.into(),
            r,
            n,
        })
    }
}

/// Pooled correlation with between-study variance and per-coefficient
/// weights (normalized to sum to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledResult {
    pub r_pooled: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Between-study variance on the z-scale.
    pub tau_sq: f64,
    /// Number of coefficients pooled.
    pub k: usize,
    pub weights: Vec<f64>,
}

/// Fisher z-transform of a correlation coefficient.
pub fn fisher_z(r: f64) -> Result<f64, MetaError> {
    if r.is_nan() || r <= -1.0 || r >= 1.0 {
        return Err(MetaError::OutOfRange { r });
    }
    Ok(r.atanh())
}

/// Inverse of [`fisher_z`].
pub fn inv_fisher_z(z: f64) -> f64 {
    z.tanh()
}

/// DerSimonian-Laird random-effects pooling on the z-scale.
pub fn pool_random_effects(
    coefficients: &[StudyCoefficient],
    level: f64,
) -> Result<PooledResult, MetaError> {
    if coefficients.is_empty() {
        return Err(MetaError::EmptyInput);
    }
    let k = coefficients.len();
    let mut zs = Vec::with_capacity(k);
    let mut fixed_weights = Vec::with_capacity(k);
    for c in coefficients {
        if c.n.is_nan() || c.n < 4.0 {
            return Err(MetaError::SampleTooSmall { n: c.n });
        }
        zs.push(fisher_z(c.r)?);
        fixed_weights.push(c.n - 3.0); // 1 / within-study variance
    }

    let weight_sum: f64 = fixed_weights.iter().sum();
    let z_fixed = zs
        .iter()
        .zip(&fixed_weights)
        .map(|(z, w)| z * w)
        .sum::<f64>()
        / weight_sum;

    // Cochran's Q and the moment estimator for the between-study variance.
    let q: f64 = zs
        .iter()
        .zip(&fixed_weights)
        .map(|(z, w)| w * (z - z_fixed) * (z - z_fixed))
        .sum();
    let scale = weight_sum - fixed_weights.iter().map(|w| w * w).sum::<f64>() / weight_sum;
    let tau_sq = if k > 1 && scale > 0.0 {
        ((q - (k as f64 - 1.0)) / scale).max(0.0)
    } else {
        0.0
    };

    let random_weights: Vec<f64> = fixed_weights
        .iter()
        .map(|w| 1.0 / (1.0 / w + tau_sq))
        .collect();
    let random_sum: f64 = random_weights.iter().sum();
    let z_pooled = zs
        .iter()
        .zip(&random_weights)
        .map(|(z, w)| z * w)
        .sum::<f64>()
        / random_sum;
    let se = (1.0 / random_sum).sqrt();
    let half_width = z_for_level(level) * se;

    Ok(PooledResult {
        r_pooled: inv_fisher_z(z_pooled),
        ci_low: inv_fisher_z(z_pooled - half_width),
        ci_high: inv_fisher_z(z_pooled + half_width),
        tau_sq,
        k,
        weights: random_weights.iter().map(|w| w / random_sum).collect(),
    })
}

/// Collapse each study's coefficients to a single aggregate: the
/// `(n - 3)`-weighted mean of the z-values, with the plain mean of the
/// member sample sizes as effective n. Studies keep their first-appearance
/// order.
pub fn collapse_clusters(
    coefficients: &[StudyCoefficient],
) -> Result<Vec<StudyCoefficient>, MetaError> {
    let mut order: Vec<&str> = Vec::new();
    for c in coefficients {
        if !order.contains(&c.study_id.as_str()) {
            order.push(&c.study_id);
        }
    }
    let mut collapsed = Vec::with_capacity(order.len());
    for study in order {
        let members: Vec<&StudyCoefficient> = coefficients
            .iter()
            .filter(|c| c.study_id == study)
            .collect();
        let mut weight_sum = 0.0;
        let mut weighted_z = 0.0;
        let mut n_sum = 0.0;
        for m in &members {
            if m.n.is_nan() || m.n < 4.0 {
                return Err(MetaError::SampleTooSmall { n: m.n });
            }
            let w = m.n - 3.0;
            weighted_z += fisher_z(m.r)? * w;
            weight_sum += w;
            n_sum += m.n;
        }
        collapsed.push(StudyCoefficient {
            study_id: study.to_string(),
            r: inv_fisher_z(weighted_z / weight_sum),
            n: n_sum / members.len() as f64,
        });
    }
    Ok(collapsed)
}
