//! Command implementations behind the `impactnorm` binary, exposed as a
//! library so integration tests can drive them in-process.

pub mod commands;
pub mod manifest;
pub mod report;

pub use commands::{
    mhq_report_rows, run_correlate, run_ingest, run_meta, run_mhq, run_synth, CorrelateOptions,
    GroupsMode, IngestOptions, MetaMode, MetaOptions, MhqOptions, Outcome, SynthOptions,
    THREADS_ENV,
};
