//! Field- and time-normalized impact indicators for zero-inflated mention
//! counts, plus the correlation and meta-analysis machinery around them.
//!
//! The pipeline: [`ingest`] parses and joins the input files into an
//! immutable [`record::Dataset`]; [`stratify`] partitions papers into
//! field × year strata and counts group-excluded fourfold tables; [`mhq`]
//! pools the tables into a normalized quotient with a confidence interval;
//! [`assess`] correlates per-unit quotients with peer-assessment scores;
//! [`meta`] pools correlation coefficients across studies. [`synth`]
//! generates deterministic datasets with planted effects for testing and
//! calibration.

pub mod assess;
pub mod ingest;
pub mod meta;
pub mod mhq;
pub mod numeric;
pub mod record;
pub mod rng;
pub mod stratify;
pub mod synth;

pub use assess::{correlate_units, spearman, spearman_ci, unit_score, CorrelationResult};
pub use ingest::{build_dataset, normalize_doi, parse_tables, partition_groups, unit_groups};
pub use meta::{collapse_clusters, fisher_z, inv_fisher_z, pool_random_effects, PooledResult};
pub use mhq::{compute_mhq, mhq_ci, mhq_point, mhq_variance, MhqResult};
pub use record::{Dataset, DatasetConfig, Dimension, GroupSpec, PaperId, Role, Source, UnitId};
pub use stratify::{aggregate_code, build_strata, cross_table, partition_cell, FourfoldTable};
pub use synth::{generate, GroundTruth, SynthConfig};
