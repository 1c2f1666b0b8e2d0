//! Authorship attribution toolkit for plain-text corpora.
//!
//! Two complementary strategies are implemented over the same corpus
//! machinery:
//!
//! * **Instance-based**: every text is z-scored over the corpus
//!   most-frequent-word statistics, pairwise Burrows/Eder Delta distances
//!   fill a matrix, and agglomerative clustering renders a dendrogram
//!   ([`cluster`]).
//! * **Profile-based**: all known texts of each candidate author are
//!   merged into one profile and compared against each unknown text with
//!   four measures (character n-gram perplexity, symmetrized
//!   Kullback-Leibler, rank out-of-place, cosine), whose min-max
//!   normalized scores are averaged into a final ranking
//!   ([`attribution`]).
//!
//! Numeric code is generic over the scalar type via [`num_traits::Float`];
//! the `*64` aliases below fix `f64`, which is what the command-line
//! pipeline uses.

pub mod attribution;
pub mod cluster;
pub mod corpus;
pub mod distance;
pub mod features;
pub mod pipeline;
pub mod selftest;
pub mod synth;

pub use corpus::{ingest, load_manifest, preprocess, Corpus, Document, Manifest, UNKNOWN_AUTHOR};
pub use distance::MeasureId;
pub use pipeline::{
    run_attribution, run_clustering, PipelineError, PipelineOptions, DEFAULT_CHAR_N, DEFAULT_MFW,
};

/// Concrete scalar aliases for the default double-precision pipeline.
pub type FeatureVector64 = features::FeatureVector<f64>;
pub type CorpusStats64 = features::CorpusStats<f64>;
pub type MeasureScore64 = distance::MeasureScore<f64>;
pub type DistanceMatrix64 = cluster::DistanceMatrix<f64>;
pub type ClusterTree64 = cluster::ClusterTree<f64>;
pub type ScoreTable64 = attribution::ScoreTable<f64>;
pub type AttributionReport64 = attribution::AttributionReport<f64>;
