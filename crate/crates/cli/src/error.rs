//! Exit-code-aware error type: user and configuration problems exit with
//! code 1, internal invariant violations with code 2.

use std::fmt;

use stylometry::attribution::AttributionError;
use stylometry::cluster::ClusterError;
use stylometry::corpus::CorpusError;
use stylometry::features::FeatureError;
use stylometry::PipelineError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable inputs, unusable corpora. Exit code 1.
    User(String),
    /// A library invariant broke mid-run. Exit code 2.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(msg) => write!(f, "error: {msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::TooFewDocuments(_) | ClusterError::Feature(_) => {
                CliError::User(e.to_string())
            }
            ClusterError::InvalidMatrix(_)
            | ClusterError::NewickParse { .. }
            | ClusterError::Distance(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<AttributionError> for CliError {
    fn from(e: AttributionError) -> Self {
        match e {
            AttributionError::TooFewAuthors(_)
            | AttributionError::NoMeasures
            | AttributionError::Feature(_) => CliError::User(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::NoUnknowns | PipelineError::TooFewAuthors(_) => {
                CliError::User(e.to_string())
            }
            PipelineError::Feature(inner) => inner.into(),
            PipelineError::Cluster(inner) => inner.into(),
            PipelineError::Attribution(inner) => inner.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}
