//! Command-line front end: ingest, cluster, attribute, selftest.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "stylometry",
    version,
    about = "Authorship attribution over plain-text corpora: Delta clustering and profile-based distance measures"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Corpus manifest (CSV: path,title,author,date,source).
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Most-frequent-words list size.
    #[arg(long)]
    mfw: Option<usize>,

    /// Output directory (also settable via STYLOMETRY_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Upper bound on worker threads; defaults to available parallelism.
    #[arg(long)]
    jobs: Option<usize>,

    /// Text encoding of the input files (utf-8 or latin-1).
    #[arg(long)]
    encoding: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a manifest and print per-document statistics.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump word-frequency vectors and corpus statistics as TSV.
        #[arg(long)]
        dump_features: Option<PathBuf>,
    },
    /// Build the Delta distance matrix and dendrogram over all documents.
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
        /// Delta variant: burrows or eder.
        #[arg(long)]
        delta: Option<String>,
        /// Linkage: ward, complete, average, or single.
        #[arg(long)]
        linkage: Option<String>,
    },
    /// Score unknown texts against author profiles and rank the authors.
    Attribute {
        #[command(flatten)]
        common: CommonArgs,
        /// Character n-gram width for the perplexity measure.
        #[arg(long)]
        char_n: Option<usize>,
        /// Comma-separated measure subset
        /// (perplexity,kullback_leibler,rank_based,cosine).
        #[arg(long, value_delimiter = ',')]
        measures: Option<Vec<String>>,
    },
    /// Run the built-in consistency checks.
    Selftest {
        /// Print per-value diagnostics for every check.
        #[arg(long)]
        verbose: bool,
        /// Seed for the synthetic corpus check.
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn overrides(&self) -> Overrides {
        let common = |c: &CommonArgs| Overrides {
            manifest: c.manifest.clone(),
            mfw: c.mfw,
            out: c.out.clone(),
            jobs: c.jobs,
            encoding: c.encoding.clone(),
            ..Overrides::default()
        };
        match self {
            Command::Ingest { common: c, .. } => common(c),
            Command::Cluster {
                common: c,
                delta,
                linkage,
            } => Overrides {
                delta: delta.clone(),
                linkage: linkage.clone(),
                ..common(c)
            },
            Command::Attribute {
                common: c,
                char_n,
                measures,
            } => Overrides {
                char_n: *char_n,
                measures: measures.clone(),
                ..common(c)
            },
            Command::Selftest { seed, .. } => Overrides {
                seed: *seed,
                ..Overrides::default()
            },
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let config = RunConfig::resolve(file, cli.command.overrides())?;

    if let Some(jobs) = config.jobs {
        if jobs == 0 {
            return Err(CliError::User("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }

    match &cli.command {
        Command::Ingest { dump_features, .. } => {
            commands::cmd_ingest(&config, dump_features.as_ref())
        }
        Command::Cluster { .. } => commands::cmd_cluster(&config),
        Command::Attribute { .. } => commands::cmd_attribute(&config),
        Command::Selftest { verbose, .. } => commands::cmd_selftest(config.seed, *verbose),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
