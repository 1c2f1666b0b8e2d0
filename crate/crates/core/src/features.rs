//! Feature extraction: tokenization, word-unigram and character n-gram
//! frequency profiles, most-frequent-word selection, corpus z-score
//! statistics, and author profiles.
//!
//! Frequencies are exposed through a scalar type parameter `F` so the same
//! profiles drive f32 and f64 pipelines; counts are always exact integers.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use num_traits::Float;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Document;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("document `{0}` produced no tokens")]
    EmptyDocument(String),
    #[error("document `{title}` is shorter ({len} chars) than the n-gram window ({n})")]
    TextTooShort { title: String, n: usize, len: usize },
    #[error("corpus statistics require a non-empty corpus")]
    EmptyCorpus,
    #[error("author profile requires at least one document")]
    EmptyProfile,
    #[error("profile for `{author}` given a document labeled `{label}`")]
    MixedAuthors { author: String, label: String },
}

/// What kind of features a vector or statistics table is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum FeatureKind {
    WordUnigram,
    CharNgram(usize),
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureKind::WordUnigram => write!(f, "word-unigram"),
            FeatureKind::CharNgram(n) => write!(f, "char-{n}-gram"),
        }
    }
}

/// Split preprocessed text into lowercase word tokens.
///
/// A token is a maximal run of Unicode letters; digits, punctuation, and
/// whitespace all separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// A relative-frequency distribution over an ordered feature set.
///
/// Only observed features are stored, so every frequency is strictly
/// positive and the frequencies sum to one. Raw counts are kept alongside
/// because downstream smoothing and ranking operate on them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<F> {
    kind: FeatureKind,
    counts: BTreeMap<String, u64>,
    total: u64,
    _scalar: PhantomData<F>,
}

impl<F: Float> FeatureVector<F> {
    fn from_counts(kind: FeatureKind, counts: BTreeMap<String, u64>) -> FeatureVector<F> {
        let total = counts.values().sum();
        debug_assert!(total > 0);
        debug_assert!(counts.values().all(|&c| c > 0));
        FeatureVector {
            kind,
            counts,
            total,
            _scalar: PhantomData,
        }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    /// Total number of feature occurrences (tokens or n-gram windows).
    pub fn total_count(&self) -> u64 {
        self.total
    }

    /// Number of distinct features observed.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, feature: &str) -> u64 {
        self.counts.get(feature).copied().unwrap_or(0)
    }

    /// Relative frequency of `feature`; zero when absent.
    pub fn freq(&self, feature: &str) -> F {
        ratio(self.count(feature), self.total)
    }

    /// Iterate `(feature, relative frequency)` in lexicographic feature order.
    pub fn iter_freqs(&self) -> impl Iterator<Item = (&str, F)> + '_ {
        self.counts
            .iter()
            .map(|(f, &c)| (f.as_str(), ratio(c, self.total)))
    }

    pub fn iter_counts(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.counts.iter().map(|(f, &c)| (f.as_str(), c))
    }

    /// Project this distribution onto `vocab`, filling absent features with
    /// zero. The result is aligned with `vocab` index-for-index.
    pub fn project(&self, vocab: &[String]) -> Vec<F> {
        vocab.iter().map(|f| self.freq(f)).collect()
    }

    /// Features ranked most frequent first; ties broken lexicographically.
    pub fn ranked_features(&self) -> Vec<String> {
        let mut items: Vec<(&String, u64)> = self.counts.iter().map(|(f, &c)| (f, c)).collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        items.into_iter().map(|(f, _)| f.clone()).collect()
    }
}

fn ratio<F: Float>(num: u64, den: u64) -> F {
    F::from(num).unwrap() / F::from(den).unwrap()
}

/// Word-unigram relative frequencies of one document.
pub fn word_vector<F: Float>(doc: &Document) -> Result<FeatureVector<F>, FeatureError> {
    word_vector_of(doc.title(), doc.text())
}

fn word_vector_of<F: Float>(title: &str, text: &str) -> Result<FeatureVector<F>, FeatureError> {
    let mut counts = BTreeMap::new();
    for token in tokenize(text) {
        *counts.entry(token).or_insert(0) += 1;
    }
    if counts.is_empty() {
        return Err(FeatureError::EmptyDocument(title.to_string()));
    }
    Ok(FeatureVector::from_counts(FeatureKind::WordUnigram, counts))
}

/// Character n-gram relative frequencies of one document.
///
/// Whitespace runs are collapsed to a single space before the sliding
/// window is applied, so the space character itself carries word-boundary
/// signal into the n-grams.
pub fn char_ngram_vector<F: Float>(
    doc: &Document,
    n: usize,
) -> Result<FeatureVector<F>, FeatureError> {
    char_ngram_vector_of(doc.title(), doc.text(), n)
}

fn char_ngram_vector_of<F: Float>(
    title: &str,
    text: &str,
    n: usize,
) -> Result<FeatureVector<F>, FeatureError> {
    assert!(n >= 1, "n-gram width must be positive");
    let chars = collapse_whitespace(text);
    if chars.len() < n {
        return Err(FeatureError::TextTooShort {
            title: title.to_string(),
            n,
            len: chars.len(),
        });
    }
    let mut counts = BTreeMap::new();
    for window in chars.windows(n) {
        *counts.entry(window.iter().collect::<String>()).or_insert(0) += 1;
    }
    Ok(FeatureVector::from_counts(FeatureKind::CharNgram(n), counts))
}

fn collapse_whitespace(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut in_ws = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !in_ws {
                out.push(' ');
            }
            in_ws = true;
        } else {
            out.push(ch);
            in_ws = false;
        }
    }
    out
}

/// Per-feature corpus statistics over the most frequent features.
///
/// `mfw` holds the `mfw_size` features with the highest summed raw counts
/// across the corpus (rank 1 first, ties lexicographic); `mean` and
/// `stddev` are the mean and population standard deviation of each
/// feature's per-document relative frequency, with absent features counted
/// as zero.
#[derive(Debug, Clone)]
pub struct CorpusStats<F> {
    kind: FeatureKind,
    mfw: Vec<String>,
    mean: Vec<F>,
    stddev: Vec<F>,
    mfw_size: usize,
}

impl<F: Float> CorpusStats<F> {
    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn mfw_size(&self) -> usize {
        self.mfw_size
    }

    /// The ranked feature list (rank 1 = most frequent = index 0).
    pub fn mfw(&self) -> &[String] {
        &self.mfw
    }

    pub fn mean(&self) -> &[F] {
        &self.mean
    }

    pub fn stddev(&self) -> &[F] {
        &self.stddev
    }

    /// Features usable in z-score space: those with strictly positive
    /// standard deviation, in MFW order. The same subset is used for every
    /// document so vectors stay aligned.
    pub fn active_features(&self) -> Vec<&str> {
        self.active_indices()
            .map(|i| self.mfw[i].as_str())
            .collect()
    }

    /// MFW ranks (1-based, re-ranked over the active subset) matching the
    /// layout of [`zscore_vector`] output.
    pub fn active_ranks(&self) -> Vec<usize> {
        (1..=self.active_indices().count()).collect()
    }

    fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mfw.len()).filter(|&i| self.stddev[i] > F::zero())
    }
}

/// Compute MFW ranking and per-feature mean/standard deviation over a corpus.
pub fn compute_corpus_stats<F: Float + Send + Sync>(
    corpus: &[Document],
    kind: FeatureKind,
    mfw_size: usize,
) -> Result<CorpusStats<F>, FeatureError> {
    assert!(mfw_size >= 1, "mfw_size must be positive");
    if corpus.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let vectors = vectors_for(corpus, kind)?;

    let mut summed: BTreeMap<&str, u64> = BTreeMap::new();
    for v in &vectors {
        for (f, c) in v.iter_counts() {
            *summed.entry(f).or_insert(0) += c;
        }
    }
    let mut ranked: Vec<(&str, u64)> = summed.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mfw: Vec<String> = ranked
        .into_iter()
        .take(mfw_size)
        .map(|(f, _)| f.to_string())
        .collect();

    let n_docs = F::from(vectors.len()).unwrap();
    let mut mean = Vec::with_capacity(mfw.len());
    let mut stddev = Vec::with_capacity(mfw.len());
    for feature in &mfw {
        let freqs: Vec<F> = vectors.iter().map(|v| v.freq(feature)).collect();
        let mu = freqs.iter().fold(F::zero(), |acc, &x| acc + x) / n_docs;
        let var = freqs
            .iter()
            .fold(F::zero(), |acc, &x| acc + (x - mu) * (x - mu))
            / n_docs;
        mean.push(mu);
        stddev.push(var.sqrt());
    }

    Ok(CorpusStats {
        kind,
        mfw,
        mean,
        stddev,
        mfw_size,
    })
}

/// One feature vector per document, computed in parallel, corpus order kept.
pub fn vectors_for<F: Float + Send + Sync>(
    corpus: &[Document],
    kind: FeatureKind,
) -> Result<Vec<FeatureVector<F>>, FeatureError> {
    corpus
        .par_iter()
        .map(|doc| match kind {
            FeatureKind::WordUnigram => word_vector(doc),
            FeatureKind::CharNgram(n) => char_ngram_vector(doc, n),
        })
        .collect()
}

/// Standardized frequencies of one document over the corpus MFW features.
///
/// Element `i` is `(f_i - mean_i) / stddev_i`; features whose corpus
/// standard deviation is zero are excluded, consistently for every
/// document (the division is undefined there).
pub fn zscore_vector<F: Float>(
    vector: &FeatureVector<F>,
    stats: &CorpusStats<F>,
) -> Vec<F> {
    stats
        .active_indices()
        .map(|i| (vector.freq(&stats.mfw[i]) - stats.mean[i]) / stats.stddev[i])
        .collect()
}

/// All of an author's known texts merged into one comparison unit.
#[derive(Debug, Clone)]
pub struct AuthorProfile {
    author: String,
    merged_text: String,
    token_count: usize,
}

impl AuthorProfile {
    pub fn author(&self) -> &str {
        &self.author
    }

    pub fn merged_text(&self) -> &str {
        &self.merged_text
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// Word-unigram vector of the merged text.
    pub fn word_vector<F: Float>(&self) -> Result<FeatureVector<F>, FeatureError> {
        word_vector_of(&self.author, &self.merged_text)
    }

    /// Character n-gram vector of the merged text.
    pub fn char_ngram_vector<F: Float>(&self, n: usize) -> Result<FeatureVector<F>, FeatureError> {
        char_ngram_vector_of(&self.author, &self.merged_text, n)
    }
}

/// Merge an author's documents into a single profile.
///
/// Texts are joined with one line break so that character n-grams cross
/// play boundaries through at most one window of separator.
pub fn build_profile(author: &str, docs: &[&Document]) -> Result<AuthorProfile, FeatureError> {
    if docs.is_empty() {
        return Err(FeatureError::EmptyProfile);
    }
    for d in docs {
        if d.author_label() != author {
            return Err(FeatureError::MixedAuthors {
                author: author.to_string(),
                label: d.author_label().to_string(),
            });
        }
    }
    let merged_text = docs
        .iter()
        .map(|d| d.text())
        .collect::<Vec<_>>()
        .join("\n");
    let token_count = docs.iter().map(|d| d.token_count()).sum();
    Ok(AuthorProfile {
        author: author.to_string(),
        merged_text,
        token_count,
    })
}

/// Group a corpus's labeled documents into one profile per author, in
/// first-appearance order. Unknown-labeled documents are skipped.
pub fn build_all_profiles(corpus: &[Document]) -> Result<Vec<AuthorProfile>, FeatureError> {
    let mut order: Vec<&str> = Vec::new();
    for d in corpus {
        if !d.is_unknown() && !order.contains(&d.author_label()) {
            order.push(d.author_label());
        }
    }
    order
        .into_iter()
        .map(|author| {
            let docs: Vec<&Document> = corpus
                .iter()
                .filter(|d| d.author_label() == author)
                .collect();
            build_profile(author, &docs)
        })
        .collect()
}
