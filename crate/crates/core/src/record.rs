//! Core domain types shared by every stage of the pipeline.
//!
//! Everything here is immutable once a [`Dataset`] has been built, so values
//! can be shared read-only across parallel workers. Maps are `BTreeMap`s
//! keyed by newtypes: serialization order is deterministic, which is what
//! makes "same inputs, byte-identical archive" hold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::stratify::PartitionCellId;

/// Opaque unique identifier of a paper. The primary key of the dataset;
/// DOIs are only used for matching upstream.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaperId(pub String);

impl PaperId {
    pub fn new(id: impl Into<String>) -> Self {
        PaperId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PaperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque identifier of an evaluation unit (an institution × assessment-unit
/// pair in the source data).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitId(pub String);

impl UnitId {
    pub fn new(id: impl Into<String>) -> Self {
        UnitId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A mention source: six altmetric channels plus the two-year citation count.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Twitter,
    Facebook,
    Blogs,
    News,
    Policy,
    Wikipedia,
    Citations,
}

impl Source {
    /// All sources, in canonical report order.
    pub const ALL: [Source; 7] = [
        Source::Twitter,
        Source::Facebook,
        Source::Blogs,
        Source::News,
        Source::Policy,
        Source::Wikipedia,
        Source::Citations,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Twitter => "twitter",
            Source::Facebook => "facebook",
            Source::Blogs => "blogs",
            Source::News => "news",
            Source::Policy => "policy",
            Source::Wikipedia => "wikipedia",
            Source::Citations => "citations",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "twitter" => Ok(Source::Twitter),
            "facebook" => Ok(Source::Facebook),
            "blogs" => Ok(Source::Blogs),
            "news" => Ok(Source::News),
            "policy" => Ok(Source::Policy),
            "wikipedia" => Ok(Source::Wikipedia),
            "citations" => Ok(Source::Citations),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

/// How a paper was attached to a unit: submitted as a research output, or
/// referenced by a societal-impact case study.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Output,
    CaseRef,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Output => "output",
            Role::CaseRef => "case_ref",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "output" => Ok(Role::Output),
            "case_ref" => Ok(Role::CaseRef),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Assessment dimension a star-rating profile refers to.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Output,
    Impact,
}

impl Dimension {
    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Output => "output",
            Dimension::Impact => "impact",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "output" => Ok(Dimension::Output),
            "impact" => Ok(Dimension::Impact),
            other => Err(format!("unknown dimension {other:?}")),
        }
    }
}

/// One paper: identity, normalized DOI, publication year, subject codes and
/// the derived partition cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub paper_id: PaperId,
    /// Normalized DOI (lowercase, no scheme prefix). Present for every record
    /// that survives ingestion; DOI-less papers are dropped before a
    /// [`Dataset`] is built.
    pub doi: Option<String>,
    pub pub_year: i32,
    /// 4-digit classification codes, possibly empty.
    pub subject_codes: BTreeSet<String>,
    /// Canonical aggregation of `subject_codes`; every paper belongs to
    /// exactly one cell.
    pub cell: PartitionCellId,
}

/// Membership of a paper in a unit's submission, with the role it played.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct SubmissionLink {
    pub paper_id: PaperId,
    pub unit_id: UnitId,
    pub role: Role,
}

/// Star-rating percentage profile of one unit for one dimension.
///
/// `pct[s]` is the percentage of ratings at star level `s` (0..=4).
/// Level 0 carries weight zero in the score but is kept so the profile can
/// be checked to sum to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitProfile {
    pub unit_id: UnitId,
    pub dimension: Dimension,
    pub pct: [f64; 5],
}

/// Rounding slack allowed on the percentage sum of a profile.
pub const PROFILE_SUM_SLACK: f64 = 0.5;

impl UnitProfile {
    /// Sum of the five percentage entries.
    pub fn pct_sum(&self) -> f64 {
        self.pct.iter().sum()
    }

    /// Profile invariant: non-negative percentages summing to 100 ± 0.5.
    pub fn is_valid(&self) -> bool {
        self.pct.iter().all(|p| *p >= 0.0 && p.is_finite())
            && (self.pct_sum() - 100.0).abs() <= PROFILE_SUM_SLACK
    }
}

/// A named set of papers to evaluate against the rest of the world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub label: String,
    pub members: BTreeSet<PaperId>,
}

impl GroupSpec {
    pub fn new(label: impl Into<String>, members: BTreeSet<PaperId>) -> Self {
        GroupSpec {
            label: label.into(),
            members,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &PaperId) -> bool {
        self.members.contains(id)
    }
}

/// Analysis configuration carried alongside the data it was built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub year_min: i32,
    pub year_max: i32,
    pub ci_level: f64,
    pub mention_threshold: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            year_min: 2008,
            year_max: 2014,
            ci_level: 0.95,
            mention_threshold: 1,
        }
    }
}

/// The validated, joined dataset. Immutable after construction.
///
/// Mention counts are sparse: a missing `(paper, source)` entry means the
/// paper was never mentioned by that source and counts as zero everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub publications: BTreeMap<PaperId, PublicationRecord>,
    pub links: BTreeSet<SubmissionLink>,
    pub mentions: BTreeMap<PaperId, BTreeMap<Source, u64>>,
    pub unit_profiles: BTreeMap<UnitId, BTreeMap<Dimension, UnitProfile>>,
    pub config: DatasetConfig,
}

impl Dataset {
    /// Mention count of a paper for a source; absent records are zero.
    pub fn mention_count(&self, paper: &PaperId, source: Source) -> u64 {
        self.mentions
            .get(paper)
            .and_then(|m| m.get(&source))
            .copied()
            .unwrap_or(0)
    }

    /// Star-rating profile of a unit for a dimension, if one was supplied.
    pub fn profile(&self, unit: &UnitId, dimension: Dimension) -> Option<&UnitProfile> {
        self.unit_profiles.get(unit).and_then(|d| d.get(&dimension))
    }

    pub fn n_papers(&self) -> usize {
        self.publications.len()
    }

    /// Referential-integrity check: every link and mention must point at a
    /// retained publication. Returns the first dangling id found.
    pub fn find_dangling(&self) -> Option<&PaperId> {
        self.links
            .iter()
            .map(|link| &link.paper_id)
            .chain(self.mentions.keys())
            .find(|paper| !self.publications.contains_key(*paper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_round_trips_through_str() {
        for s in Source::ALL {
            assert_eq!(s.as_str().parse::<Source>().unwrap(), s);
        }
        assert!("reddit".parse::<Source>().is_err());
    }

    #[test]
    fn role_and_dimension_spellings() {
        assert_eq!("case_ref".parse::<Role>().unwrap(), Role::CaseRef);
        assert_eq!(Role::CaseRef.to_string(), "case_ref");
        assert_eq!("impact".parse::<Dimension>().unwrap(), Dimension::Impact);
    }

    #[test]
    fn profile_sum_slack() {
        let mut p = UnitProfile {
            unit_id: UnitId::new("u1"),
            dimension: Dimension::Output,
            pct: [1.6, 5.2, 19.9, 41.6, 31.7],
        };
        assert!(p.is_valid());
        p.pct[0] = 2.2; // sum 100.6, outside the 0.5 slack
        assert!(!p.is_valid());
        p.pct[0] = -0.1;
        assert!(!p.is_valid());
    }

    #[test]
    fn missing_mention_is_zero() {
        let ds = Dataset {
            publications: BTreeMap::new(),
            links: BTreeSet::new(),
            mentions: BTreeMap::new(),
            unit_profiles: BTreeMap::new(),
            config: DatasetConfig::default(),
        };
        assert_eq!(ds.mention_count(&PaperId::new("p1"), Source::Twitter), 0);
    }
}
