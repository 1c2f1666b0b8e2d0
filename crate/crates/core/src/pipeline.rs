//! High-level runs tying the modules together: corpus in, distance matrix
//! and dendrogram out (instance-based), or attribution report out
//! (profile-based).

use num_traits::Float;
use serde::Serialize;
use thiserror::Error;

use crate::attribution::{
    attribute_unknown, AttributionError, AttributionReport, ProfileVectors, ReportConfig,
    ScoringContext, UnknownAttribution,
};
use crate::cluster::{
    agglomerate, delta_matrix, ClusterError, ClusterTree, DeltaVariant, DistanceMatrix, Linkage,
};
use crate::corpus::Document;
use crate::distance::MeasureId;
use crate::features::{build_all_profiles, compute_corpus_stats, FeatureError, FeatureKind};

/// Default most-frequent-words list size.
pub const DEFAULT_MFW: usize = 250;
/// Default character n-gram width for the perplexity measure.
pub const DEFAULT_CHAR_N: usize = 7;

/// How the word statistics are scoped, echoed into every report.
pub const STATS_SCOPE_NOTE: &str =
    "word statistics computed over all documents in the run (labeled and unknown)";

const SMOOTHING_NOTE: &str = "add-one (Laplace) over the MFW vocabulary";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("attribution requires at least one unknown-labeled document")]
    NoUnknowns,
    #[error("attribution requires at least 2 labeled authors (got {0})")]
    TooFewAuthors(usize),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Attribution(#[from] AttributionError),
}

/// Knobs shared by both pipelines.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineOptions {
    pub mfw_size: usize,
    pub char_n: usize,
    pub delta_variant: DeltaVariant,
    pub linkage: Linkage,
    pub measures: Vec<MeasureId>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            mfw_size: DEFAULT_MFW,
            char_n: DEFAULT_CHAR_N,
            delta_variant: DeltaVariant::Burrows,
            linkage: Linkage::Ward,
            measures: MeasureId::PROFILE_MEASURES.to_vec(),
        }
    }
}

impl PipelineOptions {
    pub fn report_config(&self) -> ReportConfig {
        ReportConfig {
            mfw_size: self.mfw_size,
            char_n: self.char_n,
            rank_k: self.mfw_size,
            smoothing: SMOOTHING_NOTE.to_string(),
            linkage: self.linkage.to_string(),
            delta_variant: self.delta_variant.to_string(),
            measures: self.measures.clone(),
            stats_scope: STATS_SCOPE_NOTE.to_string(),
        }
    }
}

/// Output of the instance-based pipeline.
pub struct ClusterRun<F> {
    pub matrix: DistanceMatrix<F>,
    pub tree: ClusterTree<F>,
}

/// Instance-based pipeline: z-score all documents over the corpus MFW
/// statistics, fill the Delta matrix, agglomerate.
pub fn run_clustering<F: Float + Send + Sync>(
    corpus: &[Document],
    options: &PipelineOptions,
) -> Result<ClusterRun<F>, PipelineError> {
    let stats = compute_corpus_stats::<F>(corpus, FeatureKind::WordUnigram, options.mfw_size)?;
    let matrix = delta_matrix(corpus, &stats, options.delta_variant)?;
    let tree = agglomerate(&matrix, options.linkage);
    Ok(ClusterRun { matrix, tree })
}

/// Profile-based pipeline: merge labeled documents into author profiles
/// and attribute every unknown-labeled document.
pub fn run_attribution<F: Float + Send + Sync>(
    corpus: &[Document],
    options: &PipelineOptions,
) -> Result<AttributionReport<F>, PipelineError> {
    let unknowns: Vec<&Document> = corpus.iter().filter(|d| d.is_unknown()).collect();
    if unknowns.is_empty() {
        return Err(PipelineError::NoUnknowns);
    }
    let profiles = build_all_profiles(corpus)?;
    if profiles.len() < 2 {
        return Err(PipelineError::TooFewAuthors(profiles.len()));
    }

    let stats = compute_corpus_stats::<F>(corpus, FeatureKind::WordUnigram, options.mfw_size)?;
    let ctx = ScoringContext::new(
        stats.mfw().to_vec(),
        options.char_n,
        options.mfw_size,
        options.measures.clone(),
    );
    let profile_vectors: Result<Vec<ProfileVectors<F>>, AttributionError> = profiles
        .iter()
        .map(|p| ProfileVectors::build(p, options.char_n))
        .collect();
    let profile_vectors = profile_vectors?;

    let results: Result<Vec<UnknownAttribution<F>>, AttributionError> = unknowns
        .iter()
        .map(|u| attribute_unknown(&profile_vectors, u, &ctx))
        .collect();

    Ok(AttributionReport {
        config: options.report_config(),
        unknowns: results?,
    })
}
