use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use impactnorm_cli::{
    run_correlate, run_ingest, run_meta, run_mhq, run_synth, CorrelateOptions, GroupsMode,
    IngestOptions, MetaMode, MetaOptions, MhqOptions, Outcome, SynthOptions,
};
use impactnorm_core::record::{Role, Source};

/// Field- and time-normalized impact indicators for zero-inflated mention
/// counts: ingest, stratified quotients, rank correlations, meta-analysis,
/// synthetic data.
#[derive(Parser)]
#[command(name = "impactnorm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "three-group")]
    ThreeGroup,
    #[value(name = "per-unit")]
    PerUnit,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    #[value(name = "output")]
    Output,
    #[value(name = "case_ref")]
    CaseRef,
}

impl From<RoleArg> for Role {
    fn from(value: RoleArg) -> Role {
        match value {
            RoleArg::Output => Role::Output,
            RoleArg::CaseRef => Role::CaseRef,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetaModeArg {
    Direct,
    Collapsed,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and join the input CSV files into a validated dataset archive.
    Ingest {
        /// Directory with publications.csv, links.csv, mentions.csv,
        /// units.csv and config.txt.
        dir: PathBuf,
        /// Config file to use instead of <DIR>/config.txt.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for dataset.json, ingest_report.json, manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pooled normalized quotients per (group, metric).
    Mhq {
        /// Dataset archive produced by `ingest`.
        #[arg(long)]
        archive: PathBuf,
        #[arg(long, value_enum, default_value = "three-group")]
        mode: ModeArg,
        /// Role defining per-unit groups (per-unit mode only).
        #[arg(long, value_enum, default_value = "output")]
        role: RoleArg,
        /// Comma-separated metric list; defaults to all sources.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        /// Config file overriding the archive's analysis settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spearman correlations between per-unit quotients and peer scores.
    Correlate {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random-effects pooling of correlation coefficients.
    Meta {
        /// CSV of study_id,r,n rows.
        coefficients: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        mode: MetaModeArg,
        /// Confidence level for the pooled interval.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a deterministic synthetic dataset with planted effects.
    Synth {
        /// JSON config (see SynthConfig); defaults apply for missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_metrics(raw: &[String]) -> anyhow::Result<Vec<Source>> {
    if raw.is_empty() {
        return Ok(Source::ALL.to_vec());
    }
    raw.iter()
        .map(|name| {
            name.parse::<Source>()
                .map_err(|e| anyhow::anyhow!("--metrics: {e}"))
        })
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Ingest { dir, config, out } => run_ingest(&IngestOptions {
            input_dir: dir,
            config,
            out_dir: out,
        }),
        Command::Mhq {
            archive,
            mode,
            role,
            metrics,
            config,
            out,
        } => run_mhq(&MhqOptions {
            archive,
            mode: match mode {
                ModeArg::ThreeGroup => GroupsMode::ThreeGroup,
                ModeArg::PerUnit => GroupsMode::PerUnit,
            },
            role: role.into(),
            metrics: parse_metrics(&metrics)?,
            config,
            out_dir: out,
        }),
        Command::Correlate {
            archive,
            metrics,
            config,
            out,
        } => run_correlate(&CorrelateOptions {
            archive,
            metrics: parse_metrics(&metrics)?,
            config,
            out_dir: out,
        }),
        Command::Meta {
            coefficients,
            mode,
            level,
            out,
        } => run_meta(&MetaOptions {
            coefficients,
            mode: match mode {
                MetaModeArg::Direct => MetaMode::Direct,
                MetaModeArg::Collapsed => MetaMode::Collapsed,
                MetaModeArg::Both => MetaMode::Both,
            },
            level,
            out_dir: out,
        }),
        Command::Synth { config, seed, out } => run_synth(&SynthOptions {
            config,
            seed,
            out_dir: out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(error) => {
            eprintln!("impactnorm: error: {error:#}");
            ExitCode::from(2)
        }
    }
}
