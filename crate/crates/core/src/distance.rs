//! The six distance computations behind the toolkit, under one
//! [`MeasureId`] umbrella: Burrows Delta and Eder Delta on z-score
//! vectors, and the four profile-based measures (symmetrized
//! Kullback-Leibler, character n-gram perplexity, rank out-of-place
//! distance, cosine distance) on frequency profiles.
//!
//! Lower always means more similar. All functions are pure and keep a
//! fixed summation order, so results are bit-identical regardless of how
//! calls are scheduled.

use num_traits::Float;
use thiserror::Error;

use crate::features::FeatureVector;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("rank weights length {ranks} does not match vector length {vectors}")]
    RankLengthMismatch { ranks: usize, vectors: usize },
    #[error("vocabulary must be non-empty")]
    EmptyVocabulary,
    #[error("no n-grams shared between model and test text")]
    NoSharedNgrams,
    #[error("projected vector is all-zero over the vocabulary")]
    ZeroVector,
    #[error("rank profile size k must be at least 1")]
    InvalidK,
    #[error("measure produced a non-finite value")]
    NonFinite,
}

/// Identifier for one of the six supported measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    BurrowsDelta,
    EderDelta,
    KullbackLeibler,
    Perplexity,
    RankBased,
    Cosine,
}

impl MeasureId {
    /// The four profile-based measures, in their conventional report order.
    pub const PROFILE_MEASURES: [MeasureId; 4] = [
        MeasureId::Perplexity,
        MeasureId::KullbackLeibler,
        MeasureId::RankBased,
        MeasureId::Cosine,
    ];
}

impl std::fmt::Display for MeasureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            MeasureId::BurrowsDelta => "burrows_delta",
            MeasureId::EderDelta => "eder_delta",
            MeasureId::KullbackLeibler => "kullback_leibler",
            MeasureId::Perplexity => "perplexity",
            MeasureId::RankBased => "rank_based",
            MeasureId::Cosine => "cosine",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for MeasureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "burrows_delta" | "burrows" => Ok(MeasureId::BurrowsDelta),
            "eder_delta" | "eder" => Ok(MeasureId::EderDelta),
            "kullback_leibler" | "kl" => Ok(MeasureId::KullbackLeibler),
            "perplexity" | "pp" => Ok(MeasureId::Perplexity),
            "rank_based" | "rank" | "ranking" => Ok(MeasureId::RankBased),
            "cosine" | "distributional" => Ok(MeasureId::Cosine),
            other => Err(format!("unknown measure `{other}`")),
        }
    }
}

/// A finite, non-negative distance value tagged with its measure.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeasureScore<F> {
    pub measure: MeasureId,
    pub value: F,
}

impl<F: Float> MeasureScore<F> {
    fn checked(measure: MeasureId, value: F) -> Result<MeasureScore<F>, DistanceError> {
        if !value.is_finite() {
            return Err(DistanceError::NonFinite);
        }
        debug_assert!(value >= F::zero());
        Ok(MeasureScore { measure, value })
    }
}

/// Burrows Delta: Manhattan distance between two z-score vectors.
pub fn burrows_delta<F: Float>(z1: &[F], z2: &[F]) -> Result<MeasureScore<F>, DistanceError> {
    check_lengths(z1, z2)?;
    let sum = z1
        .iter()
        .zip(z2)
        .fold(F::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    MeasureScore::checked(MeasureId::BurrowsDelta, sum)
}

/// Eder Delta: Manhattan distance with each term scaled by the weight
/// `(n - rank + 1) / n`, which tapers the contribution of rarer features
/// (the rank-weighted variant used by the reference stylometry tooling).
///
/// `ranks` are 1-based positions in the most-frequent-feature ordering,
/// aligned index-for-index with the z-score vectors.
pub fn eder_delta<F: Float>(
    z1: &[F],
    z2: &[F],
    ranks: &[usize],
) -> Result<MeasureScore<F>, DistanceError> {
    check_lengths(z1, z2)?;
    if ranks.len() != z1.len() {
        return Err(DistanceError::RankLengthMismatch {
            ranks: ranks.len(),
            vectors: z1.len(),
        });
    }
    let n = F::from(ranks.len()).unwrap();
    let sum = z1
        .iter()
        .zip(z2)
        .zip(ranks)
        .fold(F::zero(), |acc, ((&a, &b), &r)| {
            let weight = (n - F::from(r).unwrap() + F::one()) / n;
            acc + (a - b).abs() * weight
        });
    MeasureScore::checked(MeasureId::EderDelta, sum)
}

/// Symmetrized Kullback-Leibler distance over a word vocabulary.
///
/// Both raw count tables are restricted to `vocab`, add-one smoothed, and
/// renormalized; the result is the mean of the two directed divergences in
/// bits (base-2 logarithm).
pub fn kl_distance<F: Float>(
    a: &FeatureVector<F>,
    t: &FeatureVector<F>,
    vocab: &[String],
) -> Result<MeasureScore<F>, DistanceError> {
    if vocab.is_empty() {
        return Err(DistanceError::EmptyVocabulary);
    }
    let pa = smoothed_distribution(a, vocab);
    let pt = smoothed_distribution(t, vocab);
    // Non-negative by Gibbs' inequality; rounding can leave a wisp of
    // negative noise for near-identical distributions.
    let value = symmetric_kl(&pa, &pt)?.max(F::zero());
    MeasureScore::checked(MeasureId::KullbackLeibler, value)
}

/// Add-one smoothing on raw counts over `vocab`, renormalized.
fn smoothed_distribution<F: Float>(v: &FeatureVector<F>, vocab: &[String]) -> Vec<F> {
    let counts: Vec<u64> = vocab.iter().map(|f| v.count(f) + 1).collect();
    let total = F::from(counts.iter().sum::<u64>()).unwrap();
    counts
        .into_iter()
        .map(|c| F::from(c).unwrap() / total)
        .collect()
}

/// Mean of the two directed Kullback-Leibler divergences, in bits.
///
/// Inputs must be strictly positive distributions over the same support
/// (smoothing guarantees this on the main path; tests may call it with
/// explicit distributions directly).
pub fn symmetric_kl<F: Float>(p: &[F], q: &[F]) -> Result<F, DistanceError> {
    check_lengths(p, q)?;
    let two = F::from(2.0).unwrap();
    Ok((directed_kl(p, q) + directed_kl(q, p)) / two)
}

fn directed_kl<F: Float>(p: &[F], q: &[F]) -> F {
    p.iter()
        .zip(q)
        .fold(F::zero(), |acc, (&pi, &qi)| acc + pi * (pi / qi).log2())
}

/// Perplexity of the test text under the author model, over the n-grams
/// shared by both.
///
/// `PP = 2^(-sum T(g) * log2 M(g))`, with each side's unmodified relative
/// frequencies; the shared-support restriction means `T` need not sum to
/// one inside the sum, so values below one are possible. Only the ordering
/// across authors is meaningful downstream.
pub fn perplexity_distance<F: Float>(
    model: &FeatureVector<F>,
    test: &FeatureVector<F>,
) -> Result<MeasureScore<F>, DistanceError> {
    let mut exponent = F::zero();
    let mut shared = false;
    for (gram, t_freq) in test.iter_freqs() {
        let m_freq = model.freq(gram);
        if m_freq > F::zero() {
            shared = true;
            exponent = exponent + t_freq * m_freq.log2();
        }
    }
    if !shared {
        return Err(DistanceError::NoSharedNgrams);
    }
    MeasureScore::checked(MeasureId::Perplexity, (-exponent).exp2())
}

/// Out-of-place distance between two frequency-ranked feature lists.
///
/// Sums, over the top-`k` features of the test ranking, the absolute
/// difference between each feature's rank in the two lists; a feature
/// missing from the author's top-`k` takes the maximum penalty rank
/// `k + 1`.
pub fn rank_distance<F: Float>(
    rank_author: &[String],
    rank_test: &[String],
    k: usize,
) -> Result<MeasureScore<F>, DistanceError> {
    if k < 1 {
        return Err(DistanceError::InvalidK);
    }
    let author_top = &rank_author[..k.min(rank_author.len())];
    let mut sum: u64 = 0;
    for (i, feature) in rank_test.iter().take(k).enumerate() {
        let test_rank = i + 1;
        let author_rank = author_top
            .iter()
            .position(|f| f == feature)
            .map(|p| p + 1)
            .unwrap_or(k + 1);
        sum += test_rank.abs_diff(author_rank) as u64;
    }
    MeasureScore::checked(MeasureId::RankBased, F::from(sum).unwrap())
}

/// Cosine distance `1 - cos(A, T)` over a shared vocabulary projection.
///
/// For non-negative frequency vectors the result lies in `[0, 1]`; tiny
/// negative rounding residue is clamped to zero.
pub fn cosine_distance<F: Float>(
    a: &FeatureVector<F>,
    t: &FeatureVector<F>,
    vocab: &[String],
) -> Result<MeasureScore<F>, DistanceError> {
    if vocab.is_empty() {
        return Err(DistanceError::EmptyVocabulary);
    }
    let va = a.project(vocab);
    let vt = t.project(vocab);
    if va.iter().all(|&x| x == F::zero()) || vt.iter().all(|&x| x == F::zero()) {
        return Err(DistanceError::ZeroVector);
    }
    // Equal projections have distance exactly zero; the general formula
    // leaves rounding residue on the order of machine epsilon.
    if va == vt {
        return MeasureScore::checked(MeasureId::Cosine, F::zero());
    }
    let dot = va
        .iter()
        .zip(&vt)
        .fold(F::zero(), |acc, (&x, &y)| acc + x * y);
    let na = va.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
    let nt = vt.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
    let value = (F::one() - dot / (na * nt)).max(F::zero()).min(F::one());
    MeasureScore::checked(MeasureId::Cosine, value)
}

fn check_lengths<F>(a: &[F], b: &[F]) -> Result<(), DistanceError> {
    if a.len() != b.len() {
        return Err(DistanceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}
