//! Parsing, normalization and joining of the five input files into a
//! validated [`Dataset`].
//!
//! The input formats are plain UTF-8 CSV with a mandatory header row
//! (RFC-4180 quoting) plus a flat `key = value` config file:
//!
//! ```text
//! publications.csv  paper_id,doi,pub_year,subject_codes
//! links.csv         paper_id,unit_id,role
//! mentions.csv      paper_id,source,count
//! units.csv         unit_id,dimension,pct4,pct3,pct2,pct1,pct0
//! config.txt        year_min / year_max / ci_level / mention_threshold
//! ```
//!
//! Malformed rows are collected with their line numbers and reported, not
//! fatal. Only a dangling reference — a link or mention naming a paper that
//! never appears in the publications file — aborts the build.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{
    Dataset, DatasetConfig, Dimension, GroupSpec, PaperId, PublicationRecord, Role, Source,
    SubmissionLink, UnitId, UnitProfile,
};
use crate::stratify::partition_cell;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input file missing: {0}")]
    FileMissing(PathBuf),
    #[error("{file}: header mismatch: expected {expected:?}, found {found:?}")]
    SchemaMismatch {
        file: String,
        expected: String,
        found: String,
    },
    #[error("dangling reference: paper {0} is not in the publications file")]
    Integrity(PaperId),
    #[error("config error: {0}")]
    Config(String),
    #[error("empty unit subset")]
    EmptySubset,
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// A malformed row, reported with its file and 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    pub file: String,
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.message)
    }
}

/// Per-file row accounting. Every row read is either retained or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FileCounts {
    pub rows_read: u64,
    pub rows_retained: u64,
}

impl FileCounts {
    pub fn rows_dropped(&self) -> u64 {
        self.rows_read - self.rows_retained
    }
}

/// Exclusion bookkeeping for one ingestion run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    /// Accounting per file, keyed `publications` / `links` / `mentions` /
    /// `units`.
    pub files: BTreeMap<String, FileCounts>,
    pub papers_dropped_no_doi: u64,
    pub papers_dropped_year: u64,
    /// Link rows dropped: malformed, duplicates of an identical
    /// (paper, unit, role) triple, or pointing at an excluded paper.
    pub links_dropped_error: u64,
    /// Extra mention rows merged into an existing (paper, source) count.
    pub duplicate_mentions_merged: u64,
    pub warnings: Vec<String>,
    pub row_errors: Vec<RowError>,
}

/// The five input file locations.
#[derive(Debug, Clone)]
pub struct InputPaths {
    pub publications: PathBuf,
    pub links: PathBuf,
    pub mentions: PathBuf,
    pub units: PathBuf,
    pub config: PathBuf,
}

impl InputPaths {
    /// Conventional file names under one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        InputPaths {
            publications: dir.join("publications.csv"),
            links: dir.join("links.csv"),
            mentions: dir.join("mentions.csv"),
            units: dir.join("units.csv"),
            config: dir.join("config.txt"),
        }
    }
}

/// Typed rows parsed from the four CSV files, before joining.
#[derive(Debug, Default)]
pub struct RawTables {
    pub publications: Vec<PubRow>,
    pub links: Vec<SubmissionLink>,
    pub mentions: Vec<MentionRow>,
    pub units: Vec<UnitProfile>,
    pub rows_read: BTreeMap<String, u64>,
    pub row_errors: Vec<RowError>,
}

#[derive(Debug, Clone)]
pub struct PubRow {
    pub paper_id: PaperId,
    pub doi_raw: String,
    pub pub_year: i32,
    pub subject_codes: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct MentionRow {
    pub paper_id: PaperId,
    pub source: Source,
    pub count: u64,
}

/// Normalize a raw DOI: trim, lowercase, strip a leading `https://doi.org/`
/// or `doi:` prefix. Anything that does not then start with `10.` is not a
/// DOI and maps to `None`.
pub fn normalize_doi(raw: &str) -> Option<String> {
    let mut s = raw.trim().to_lowercase();
    for prefix in ["https://doi.org/", "doi:"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest.trim().to_string();
            break;
        }
    }
    if s.starts_with("10.") {
        Some(s)
    } else {
        None
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>, IngestError> {
    if !path.exists() {
        return Err(IngestError::FileMissing(path.to_path_buf()));
    }
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: path.to_path_buf(),
            source: io::Error::other(e),
        })
}

fn check_header(
    reader: &mut csv::Reader<fs::File>,
    file: &str,
    expected: &[&str],
) -> Result<(), IngestError> {
    let headers = reader.headers().map_err(|e| IngestError::SchemaMismatch {
        file: file.to_string(),
        expected: expected.join(","),
        found: e.to_string(),
    })?;
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(IngestError::SchemaMismatch {
            file: file.to_string(),
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

/// Walk one CSV file, handing each record to `parse_row`; parse failures
/// become [`RowError`]s instead of aborting.
fn read_rows<T>(
    path: &Path,
    file: &str,
    expected_header: &[&str],
    tables: &mut RawTables,
    mut parse_row: impl FnMut(&csv::StringRecord) -> Result<T, String>,
    out: &mut Vec<T>,
) -> Result<(), IngestError> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, file, expected_header)?;
    let mut rows_read = 0u64;
    for record in reader.records() {
        let line = match &record {
            Ok(r) => r.position().map(|p| p.line()).unwrap_or(0),
            Err(e) => e.position().map(|p| p.line()).unwrap_or(0),
        };
        rows_read += 1;
        match record {
            Ok(rec) => match parse_row(&rec) {
                Ok(row) => out.push(row),
                Err(message) => tables.row_errors.push(RowError {
                    file: file.to_string(),
                    line,
                    message,
                }),
            },
            Err(e) => tables.row_errors.push(RowError {
                file: file.to_string(),
                line,
                message: format!("unreadable row: {e}"),
            }),
        }
    }
    tables.rows_read.insert(file.to_string(), rows_read);
    Ok(())
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize, name: &str) -> Result<&'a str, String> {
    rec.get(idx).ok_or_else(|| format!("missing field {name}"))
}

fn parse_subject_codes(raw: &str) -> Result<BTreeSet<String>, String> {
    let mut codes = BTreeSet::new();
    for token in raw.split(';').filter(|t| !t.is_empty()) {
        if token.len() != 4 || !token.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("malformed subject code {token:?}"));
        }
        codes.insert(token.to_string());
    }
    Ok(codes)
}

/// Parse the flat `key = value` config file. Missing keys take defaults;
/// unknown keys are rejected.
pub fn parse_config(path: &Path) -> Result<DatasetConfig, IngestError> {
    if !path.exists() {
        return Err(IngestError::FileMissing(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = DatasetConfig::default();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| IngestError::Config(format!("line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let parse_err =
            |e: &dyn fmt::Display| IngestError::Config(format!("{key}: {e} in {value:?}"));
        match key {
            "year_min" => config.year_min = value.parse().map_err(|e| parse_err(&e))?,
            "year_max" => config.year_max = value.parse().map_err(|e| parse_err(&e))?,
            "ci_level" => config.ci_level = value.parse().map_err(|e| parse_err(&e))?,
            "mention_threshold" => {
                config.mention_threshold = value.parse().map_err(|e| parse_err(&e))?
            }
            other => {
                return Err(IngestError::Config(format!("unknown key {other:?}")));
            }
        }
    }
    if config.year_min > config.year_max {
        return Err(IngestError::Config(format!(
            "year_min {} exceeds year_max {}",
            config.year_min, config.year_max
        )));
    }
    if !(config.ci_level > 0.0 && config.ci_level < 1.0) {
        return Err(IngestError::Config(format!(
            "ci_level {} outside (0, 1)",
            config.ci_level
        )));
    }
    if config.mention_threshold < 1 {
        return Err(IngestError::Config("mention_threshold must be ≥ 1".into()));
    }
    Ok(config)
}

/// Parse the five input files into typed rows plus the run configuration.
pub fn parse_tables(paths: &InputPaths) -> Result<(RawTables, DatasetConfig), IngestError> {
    let config = parse_config(&paths.config)?;
    let mut tables = RawTables::default();

    let mut publications = Vec::new();
    read_rows(
        &paths.publications,
        "publications",
        &["paper_id", "doi", "pub_year", "subject_codes"],
        &mut tables,
        |rec| {
            let paper_id = field(rec, 0, "paper_id")?;
            if paper_id.is_empty() {
                return Err("empty paper_id".into());
            }
            let doi_raw = field(rec, 1, "doi")?.to_string();
            let pub_year: i32 = field(rec, 2, "pub_year")?
                .parse()
                .map_err(|e| format!("bad pub_year: {e}"))?;
            let subject_codes = parse_subject_codes(field(rec, 3, "subject_codes")?)?;
            Ok(PubRow {
                paper_id: PaperId::new(paper_id),
                doi_raw,
                pub_year,
                subject_codes,
            })
        },
        &mut publications,
    )?;
    tables.publications = publications;

    let mut links = Vec::new();
    read_rows(
        &paths.links,
        "links",
        &["paper_id", "unit_id", "role"],
        &mut tables,
        |rec| {
            let paper_id = field(rec, 0, "paper_id")?;
            let unit_id = field(rec, 1, "unit_id")?;
            if paper_id.is_empty() || unit_id.is_empty() {
                return Err("empty paper_id or unit_id".into());
            }
            let role: Role = field(rec, 2, "role")?.parse()?;
            Ok(SubmissionLink {
                paper_id: PaperId::new(paper_id),
                unit_id: UnitId::new(unit_id),
                role,
            })
        },
        &mut links,
    )?;
    tables.links = links;

    let mut mentions = Vec::new();
    read_rows(
        &paths.mentions,
        "mentions",
        &["paper_id", "source", "count"],
        &mut tables,
        |rec| {
            let paper_id = field(rec, 0, "paper_id")?;
            if paper_id.is_empty() {
                return Err("empty paper_id".into());
            }
            let source: Source = field(rec, 1, "source")?.parse()?;
            let count: u64 = field(rec, 2, "count")?
                .parse()
                .map_err(|e| format!("bad count: {e}"))?;
            Ok(MentionRow {
                paper_id: PaperId::new(paper_id),
                source,
                count,
            })
        },
        &mut mentions,
    )?;
    tables.mentions = mentions;

    let mut units = Vec::new();
    read_rows(
        &paths.units,
        "units",
        &["unit_id", "dimension", "pct4", "pct3", "pct2", "pct1", "pct0"],
        &mut tables,
        |rec| {
            let unit_id = field(rec, 0, "unit_id")?;
            if unit_id.is_empty() {
                return Err("empty unit_id".into());
            }
            let dimension: Dimension = field(rec, 1, "dimension")?.parse()?;
            let mut pct = [0.0; 5];
            // Columns run pct4..pct0; the array is indexed by star level.
            for (col, star) in (2..7).zip((0..5).rev()) {
                let name = format!("pct{star}");
                pct[star] = field(rec, col, &name)?
                    .parse()
                    .map_err(|e| format!("bad {name}: {e}"))?;
            }
            Ok(UnitProfile {
                unit_id: UnitId::new(unit_id),
                dimension,
                pct,
            })
        },
        &mut units,
    )?;
    tables.units = units;

    Ok((tables, config))
}

/// Join the parsed tables into a validated [`Dataset`] and account for every
/// dropped row.
///
/// Papers without a normalizable DOI or outside the configured year bounds
/// are dropped and counted; duplicate mention rows are merged by summation
/// with a warning; links and mentions pointing at excluded papers are
/// dropped. A reference to a paper that never appeared in the publications
/// file aborts with [`IngestError::Integrity`].
pub fn build_dataset(
    tables: &RawTables,
    config: &DatasetConfig,
) -> Result<(Dataset, IngestReport), IngestError> {
    let mut report = IngestReport {
        row_errors: tables.row_errors.clone(),
        ..IngestReport::default()
    };

    // Papers ---------------------------------------------------------------
    let mut all_paper_ids: BTreeSet<PaperId> = BTreeSet::new();
    let mut publications: BTreeMap<PaperId, PublicationRecord> = BTreeMap::new();
    for row in &tables.publications {
        if !all_paper_ids.insert(row.paper_id.clone()) {
            report.row_errors.push(RowError {
                file: "publications".into(),
                line: 0,
                message: format!("duplicate paper_id {}", row.paper_id),
            });
            continue;
        }
        let doi = match normalize_doi(&row.doi_raw) {
            Some(doi) => doi,
            None => {
                report.papers_dropped_no_doi += 1;
                continue;
            }
        };
        if row.pub_year < config.year_min || row.pub_year > config.year_max {
            report.papers_dropped_year += 1;
            continue;
        }
        let cell = partition_cell(row.subject_codes.iter().map(String::as_str))
            .expect("subject codes validated at parse time");
        publications.insert(
            row.paper_id.clone(),
            PublicationRecord {
                paper_id: row.paper_id.clone(),
                doi: Some(doi),
                pub_year: row.pub_year,
                subject_codes: row.subject_codes.clone(),
                cell,
            },
        );
    }

    // Links ------------------------------------------------------------------
    let mut links: BTreeSet<SubmissionLink> = BTreeSet::new();
    for link in &tables.links {
        if !all_paper_ids.contains(&link.paper_id) {
            return Err(IngestError::Integrity(link.paper_id.clone()));
        }
        if !publications.contains_key(&link.paper_id) {
            report.links_dropped_error += 1;
            continue;
        }
        if !links.insert(link.clone()) {
            report.links_dropped_error += 1;
            report.warnings.push(format!(
                "duplicate link ({}, {}, {}) ignored",
                link.paper_id, link.unit_id, link.role
            ));
        }
    }

    // Mentions ---------------------------------------------------------------
    let mut mentions: BTreeMap<PaperId, BTreeMap<Source, u64>> = BTreeMap::new();
    for row in &tables.mentions {
        if !all_paper_ids.contains(&row.paper_id) {
            return Err(IngestError::Integrity(row.paper_id.clone()));
        }
        if !publications.contains_key(&row.paper_id) {
            continue;
        }
        let per_source = mentions.entry(row.paper_id.clone()).or_default();
        match per_source.entry(row.source) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(row.count);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += row.count;
                report.duplicate_mentions_merged += 1;
                report.warnings.push(format!(
                    "merged duplicate mention rows for ({}, {})",
                    row.paper_id, row.source
                ));
            }
        }
    }

    // Unit profiles ------------------------------------------------------------
    let mut unit_profiles: BTreeMap<UnitId, BTreeMap<Dimension, UnitProfile>> = BTreeMap::new();
    for profile in &tables.units {
        if !profile.is_valid() {
            report.row_errors.push(RowError {
                file: "units".into(),
                line: 0,
                message: format!(
                    "profile for ({}, {}) violates the percentage invariant (sum {})",
                    profile.unit_id,
                    profile.dimension,
                    profile.pct_sum()
                ),
            });
            continue;
        }
        let slot = unit_profiles.entry(profile.unit_id.clone()).or_default();
        if slot.contains_key(&profile.dimension) {
            report.row_errors.push(RowError {
                file: "units".into(),
                line: 0,
                message: format!(
                    "duplicate profile for ({}, {}); first kept",
                    profile.unit_id, profile.dimension
                ),
            });
            continue;
        }
        slot.insert(profile.dimension, profile.clone());
    }

    let dataset = Dataset {
        publications,
        links,
        mentions,
        unit_profiles,
        config: config.clone(),
    };
    if let Some(dangling) = dataset.find_dangling() {
        return Err(IngestError::Integrity(dangling.clone()));
    }

    // Per-file accounting: read counts come from parsing; retained counts
    // from the built dataset.
    let rows_read = |file: &str| tables.rows_read.get(file).copied().unwrap_or_else(|| {
        let typed = match file {
            "publications" => tables.publications.len(),
            "links" => tables.links.len(),
            "mentions" => tables.mentions.len(),
            "units" => tables.units.len(),
            _ => 0,
        };
        typed as u64
    });
    report.files.insert(
        "publications".into(),
        FileCounts {
            rows_read: rows_read("publications"),
            rows_retained: dataset.publications.len() as u64,
        },
    );
    report.files.insert(
        "links".into(),
        FileCounts {
            rows_read: rows_read("links"),
            rows_retained: dataset.links.len() as u64,
        },
    );
    report.files.insert(
        "mentions".into(),
        FileCounts {
            rows_read: rows_read("mentions"),
            rows_retained: dataset.mentions.values().map(|m| m.len() as u64).sum(),
        },
    );
    report.files.insert(
        "units".into(),
        FileCounts {
            rows_read: rows_read("units"),
            rows_retained: dataset
                .unit_profiles
                .values()
                .map(|d| d.len() as u64)
                .sum(),
        },
    );

    Ok((dataset, report))
}

/// Convenience wrapper: parse the five files and build the dataset.
pub fn ingest(paths: &InputPaths) -> Result<(Dataset, IngestReport), IngestError> {
    let (tables, config) = parse_tables(paths)?;
    build_dataset(&tables, &config)
}

/// The three disjoint link-role groups: papers with only case-study
/// references, only output submissions, or both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeGroups {
    pub pcs_only: GroupSpec,
    pub pro_only: GroupSpec,
    pub both: GroupSpec,
}

impl ThreeGroups {
    pub fn iter(&self) -> impl Iterator<Item = &GroupSpec> {
        [&self.pcs_only, &self.pro_only, &self.both].into_iter()
    }
}

/// Group label used for the case-study-only paper set.
pub const LABEL_PCS: &str = "PCS";
/// Group label used for the output-only paper set.
pub const LABEL_PRO: &str = "PRO";
/// Group label used for papers in both sets.
pub const LABEL_BOTH: &str = "PCS&PRO";

/// Partition the linked papers into the three disjoint role groups.
/// Their union is exactly the set of papers with at least one link.
pub fn partition_groups(dataset: &Dataset) -> ThreeGroups {
    let mut has_output: BTreeSet<&PaperId> = BTreeSet::new();
    let mut has_case_ref: BTreeSet<&PaperId> = BTreeSet::new();
    for link in &dataset.links {
        match link.role {
            Role::Output => has_output.insert(&link.paper_id),
            Role::CaseRef => has_case_ref.insert(&link.paper_id),
        };
    }
    let mut pcs_only = BTreeSet::new();
    let mut pro_only = BTreeSet::new();
    let mut both = BTreeSet::new();
    for paper in has_output.union(&has_case_ref) {
        let target = match (has_case_ref.contains(*paper), has_output.contains(*paper)) {
            (true, true) => &mut both,
            (true, false) => &mut pcs_only,
            (false, true) => &mut pro_only,
            (false, false) => unreachable!(),
        };
        target.insert((*paper).clone());
    }
    ThreeGroups {
        pcs_only: GroupSpec::new(LABEL_PCS, pcs_only),
        pro_only: GroupSpec::new(LABEL_PRO, pro_only),
        both: GroupSpec::new(LABEL_BOTH, both),
    }
}

/// Per-unit paper groups for one role, deduplicated by paper id. Units with
/// no papers in the role are omitted.
pub fn unit_groups(dataset: &Dataset, role: Role) -> BTreeMap<UnitId, GroupSpec> {
    let mut members: BTreeMap<UnitId, BTreeSet<PaperId>> = BTreeMap::new();
    for link in &dataset.links {
        if link.role == role {
            members
                .entry(link.unit_id.clone())
                .or_default()
                .insert(link.paper_id.clone());
        }
    }
    members
        .into_iter()
        .map(|(unit, papers)| {
            let label = unit.to_string();
            (unit, GroupSpec::new(label, papers))
        })
        .collect()
}

/// Side-by-side star-level percentage averages over all units and a subset,
/// for representativeness reporting. Every (unit, dimension) profile counts
/// once; `pct[star]` indexing matches [`UnitProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representativeness {
    pub full: [f64; 5],
    pub subset: [f64; 5],
    pub n_profiles_full: usize,
    pub n_profiles_subset: usize,
}

pub fn representativeness(
    dataset: &Dataset,
    subset_unit_ids: &BTreeSet<UnitId>,
) -> Result<Representativeness, IngestError> {
    if subset_unit_ids.is_empty() {
        return Err(IngestError::EmptySubset);
    }
    let mut full = [0.0; 5];
    let mut subset = [0.0; 5];
    let mut n_full = 0usize;
    let mut n_subset = 0usize;
    for (unit, profiles) in &dataset.unit_profiles {
        for profile in profiles.values() {
            for (star, pct) in profile.pct.iter().enumerate() {
                full[star] += pct;
            }
            n_full += 1;
            if subset_unit_ids.contains(unit) {
                for (star, pct) in profile.pct.iter().enumerate() {
                    subset[star] += pct;
                }
                n_subset += 1;
            }
        }
    }
    if n_subset == 0 {
        return Err(IngestError::EmptySubset);
    }
    for star in 0..5 {
        full[star] /= n_full as f64;
        subset[star] /= n_subset as f64;
    }
    Ok(Representativeness {
        full,
        subset,
        n_profiles_full: n_full,
        n_profiles_subset: n_subset,
    })
}

/// Write a dataset back out in the exact input formats (plus the config
/// file), so a dataset can be re-ingested or shipped as a fixture.
pub fn export_csv(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<(), io::Error> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("publications.csv"))?;
    w.write_record(["paper_id", "doi", "pub_year", "subject_codes"])?;
    for (id, record) in &dataset.publications {
        let codes: Vec<&str> = record.subject_codes.iter().map(String::as_str).collect();
        w.write_record([
            id.as_str(),
            record.doi.as_deref().unwrap_or(""),
            &record.pub_year.to_string(),
            &codes.join(";"),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("links.csv"))?;
    w.write_record(["paper_id", "unit_id", "role"])?;
    for link in &dataset.links {
        w.write_record([link.paper_id.as_str(), link.unit_id.as_str(), link.role.as_str()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("mentions.csv"))?;
    w.write_record(["paper_id", "source", "count"])?;
    for (paper, per_source) in &dataset.mentions {
        for (source, count) in per_source {
            w.write_record([paper.as_str(), source.as_str(), &count.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("units.csv"))?;
    w.write_record(["unit_id", "dimension", "pct4", "pct3", "pct2", "pct1", "pct0"])?;
    for (unit, profiles) in &dataset.unit_profiles {
        for (dimension, profile) in profiles {
            let mut rec = vec![unit.as_str().to_string(), dimension.as_str().to_string()];
            for star in (0..5).rev() {
                rec.push(format!("{}", profile.pct[star]));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;

    let c = &dataset.config;
    fs::write(
        dir.join("config.txt"),
        format!(
            "year_min = {}\nyear_max = {}\nci_level = {}\nmention_threshold = {}\n",
            c.year_min, c.year_max, c.ci_level, c.mention_threshold
        ),
    )?;
    Ok(())
}
