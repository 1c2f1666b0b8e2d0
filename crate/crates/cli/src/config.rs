//! Run configuration: defaults, optional TOML config file, command-line
//! flags, in ascending precedence.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use stylometry::cluster::{DeltaVariant, Linkage};
use stylometry::{MeasureId, PipelineOptions, DEFAULT_CHAR_N, DEFAULT_MFW};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "STYLOMETRY_OUT_DIR";

/// Default seed for the synthetic self-test corpus.
pub const DEFAULT_SEED: u64 = 42;

/// Optional TOML file mirroring the command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub mfw: Option<usize>,
    pub char_n: Option<usize>,
    pub delta: Option<String>,
    pub linkage: Option<String>,
    pub measures: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub encoding: Option<String>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &PathBuf) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::User(format!("bad config {}: {e}", path.display())))
    }
}

/// Fully resolved settings for one command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub mfw_size: usize,
    pub char_n: usize,
    pub delta_variant: DeltaVariant,
    pub linkage: Linkage,
    pub measures: Vec<MeasureId>,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    pub encoding: Option<String>,
    pub seed: u64,
}

/// Flag-level overrides collected from the command line (all optional so
/// the file config can fill the gaps).
#[derive(Debug, Default)]
pub struct Overrides {
    pub manifest: Option<PathBuf>,
    pub mfw: Option<usize>,
    pub char_n: Option<usize>,
    pub delta: Option<String>,
    pub linkage: Option<String>,
    pub measures: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub encoding: Option<String>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// defaults < config file < flags.
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<RunConfig, CliError> {
        let parse_delta = |s: String| {
            DeltaVariant::from_str(&s).map_err(CliError::User)
        };
        let parse_linkage = |s: String| Linkage::from_str(&s).map_err(CliError::User);
        let parse_measures = |names: Vec<String>| -> Result<Vec<MeasureId>, CliError> {
            if names.is_empty() {
                return Err(CliError::User("measure list is empty".into()));
            }
            names
                .into_iter()
                .map(|n| MeasureId::from_str(&n).map_err(CliError::User))
                .collect()
        };

        let mfw_size = flags.mfw.or(file.mfw).unwrap_or(DEFAULT_MFW);
        let char_n = flags.char_n.or(file.char_n).unwrap_or(DEFAULT_CHAR_N);
        if mfw_size < 1 {
            return Err(CliError::User("--mfw must be at least 1".into()));
        }
        if char_n < 1 {
            return Err(CliError::User("--char-n must be at least 1".into()));
        }

        let delta_variant = match flags.delta.or(file.delta) {
            Some(s) => parse_delta(s)?,
            None => DeltaVariant::Burrows,
        };
        let linkage = match flags.linkage.or(file.linkage) {
            Some(s) => parse_linkage(s)?,
            None => Linkage::Ward,
        };
        let measures = match flags.measures.or(file.measures) {
            Some(names) => parse_measures(names)?,
            None => MeasureId::PROFILE_MEASURES.to_vec(),
        };
        for m in &measures {
            if matches!(m, MeasureId::BurrowsDelta | MeasureId::EderDelta) {
                return Err(CliError::User(format!(
                    "measure `{m}` belongs to the cluster command, not attribute"
                )));
            }
        }

        let out_dir = flags
            .out
            .or(file.out)
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));

        Ok(RunConfig {
            manifest: flags.manifest.or(file.manifest),
            mfw_size,
            char_n,
            delta_variant,
            linkage,
            measures,
            out_dir,
            jobs: flags.jobs.or(file.jobs),
            encoding: flags.encoding.or(file.encoding),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        })
    }

    pub fn manifest_path(&self) -> Result<&PathBuf, CliError> {
        self.manifest
            .as_ref()
            .ok_or_else(|| CliError::User("no manifest given (use --manifest)".into()))
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            mfw_size: self.mfw_size,
            char_n: self.char_n,
            delta_variant: self.delta_variant,
            linkage: self.linkage,
            measures: self.measures.clone(),
        }
    }
}
