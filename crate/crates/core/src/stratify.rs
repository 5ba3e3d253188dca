//! Field × publication-year stratification.
//!
//! Subject codes are aggregated to their two-digit head (`"1105"` → `"1100"`)
//! and the *set* of aggregated codes a paper carries becomes its partition
//! cell. Distinct combinations are distinct fields, so every paper lands in
//! exactly one cell and the cells partition the corpus — no fractional
//! counting. Strata are the cross of cell × year; each stratum yields one
//! fourfold table per (group, metric) comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{Dataset, GroupSpec, PaperId, Source};

/// Sentinel cell for papers without any subject code.
pub const UNCLASSIFIED: &str = "UNCLASSIFIED";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StratifyError {
    #[error("malformed subject code {0:?}: expected exactly four ASCII digits")]
    MalformedCode(String),
}

/// Canonical identifier of a partition cell: the sorted, `;`-joined set of
/// aggregated subject codes, or [`UNCLASSIFIED`] for the empty set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartitionCellId(String);

impl PartitionCellId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_unclassified(&self) -> bool {
        self.0 == UNCLASSIFIED
    }
}

impl fmt::Display for PartitionCellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One stratum: a partition cell crossed with a publication year.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub cell: PartitionCellId,
    pub year: i32,
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.cell, self.year)
    }
}

/// A stratum key together with the papers that fall into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub key: StratumKey,
    pub papers: Vec<PaperId>,
}

/// All strata of a dataset, ordered by (cell, year).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StratumSet {
    pub strata: Vec<Stratum>,
}

impl StratumSet {
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn total_papers(&self) -> usize {
        self.strata.iter().map(|s| s.papers.len()).sum()
    }
}

/// Group-excluded 2×2 counts for one stratum: the group row against the
/// world-minus-group row, mentioned versus not mentioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourfoldTable {
    /// Group papers mentioned at least `threshold` times.
    pub a: u64,
    /// Group papers below the threshold.
    pub b: u64,
    /// World-minus-group papers mentioned.
    pub c_prime: u64,
    /// World-minus-group papers not mentioned.
    pub d_prime: u64,
}

impl FourfoldTable {
    pub fn new(a: u64, b: u64, c_prime: u64, d_prime: u64) -> Self {
        FourfoldTable { a, b, c_prime, d_prime }
    }

    /// Total paper count of the stratum after group exclusion.
    pub fn n(&self) -> u64 {
        self.a + self.b + self.c_prime + self.d_prime
    }
}

/// Aggregate a four-digit subject code to its two-digit head: `"1105"` →
/// `"1100"`. Codes must be exactly four ASCII digits.
pub fn aggregate_code(code: &str) -> Result<String, StratifyError> {
    if code.len() != 4 || !code.bytes().all(|b| b.is_ascii_digit()) {
        return Err(StratifyError::MalformedCode(code.to_string()));
    }
    Ok(format!("{}00", &code[..2]))
}

/// Canonical partition cell of a set of subject codes: aggregate each code,
/// deduplicate, sort ascending, join with `;`. The empty set maps to the
/// [`UNCLASSIFIED`] sentinel.
pub fn partition_cell<'a, I>(subject_codes: I) -> Result<PartitionCellId, StratifyError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut aggregated = BTreeSet::new();
    for code in subject_codes {
        aggregated.insert(aggregate_code(code)?);
    }
    if aggregated.is_empty() {
        return Ok(PartitionCellId(UNCLASSIFIED.to_string()));
    }
    let joined = aggregated.into_iter().collect::<Vec<_>>().join(";");
    Ok(PartitionCellId(joined))
}

/// Group the dataset's papers into (cell, year) strata. Ordering is
/// deterministic: by cell string, then year.
pub fn build_strata(dataset: &Dataset) -> StratumSet {
    let mut by_key: BTreeMap<StratumKey, Vec<PaperId>> = BTreeMap::new();
    for (id, record) in &dataset.publications {
        let key = StratumKey {
            cell: record.cell.clone(),
            year: record.pub_year,
        };
        by_key.entry(key).or_default().push(id.clone());
    }
    StratumSet {
        strata: by_key
            .into_iter()
            .map(|(key, papers)| Stratum { key, papers })
            .collect(),
    }
}

/// Count one stratum into a group-excluded fourfold table.
///
/// A paper is "mentioned" when its count for `metric` is at least
/// `threshold`; papers without a mention record count as zero.
pub fn cross_table(
    dataset: &Dataset,
    stratum: &Stratum,
    group: &GroupSpec,
    metric: Source,
    threshold: u64,
) -> FourfoldTable {
    debug_assert!(threshold >= 1);
    let mut table = FourfoldTable::new(0, 0, 0, 0);
    for paper in &stratum.papers {
        let mentioned = dataset.mention_count(paper, metric) >= threshold;
        match (group.contains(paper), mentioned) {
            (true, true) => table.a += 1,
            (true, false) => table.b += 1,
            (false, true) => table.c_prime += 1,
            (false, false) => table.d_prime += 1,
        }
    }
    table
}
