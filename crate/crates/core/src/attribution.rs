//! Profile-based attribution: score each unknown text against every
//! candidate author with the configured measures, min-max normalize per
//! measure across authors, average the normalized scores, and rank.

use std::fmt::Display;

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::Document;
use crate::distance::{
    cosine_distance, kl_distance, perplexity_distance, rank_distance, DistanceError, MeasureId,
};
use crate::features::{AuthorProfile, FeatureError, FeatureVector};

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("attribution requires at least 2 author profiles (got {0})")]
    TooFewAuthors(usize),
    #[error("normalization requires at least 2 scores (got {0})")]
    TooFewScores(usize),
    #[error("scores contain a NaN value")]
    NanScore,
    #[error("no measures configured")]
    NoMeasures,
    #[error("author `{author}` has no score for measure `{measure}`")]
    MissingMeasure { author: String, measure: MeasureId },
    #[error("score rows have inconsistent lengths")]
    RaggedScores,
    #[error("measure `{0}` is not a profile-based measure")]
    UnsupportedMeasure(MeasureId),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Inputs shared by every (measure, author, unknown) scoring call.
pub struct ScoringContext {
    /// Word-unigram vocabulary (corpus MFW list) for the word-based
    /// measures.
    pub vocab: Vec<String>,
    /// Character n-gram width for the perplexity measure.
    pub char_n: usize,
    /// Profile size for the rank out-of-place measure.
    pub rank_k: usize,
    /// Measures to score, in report order.
    pub measures: Vec<MeasureId>,
}

impl ScoringContext {
    pub fn new(
        vocab: Vec<String>,
        char_n: usize,
        rank_k: usize,
        measures: Vec<MeasureId>,
    ) -> ScoringContext {
        ScoringContext {
            vocab,
            char_n,
            rank_k,
            measures,
        }
    }
}

/// Cached per-author feature views used across all unknowns in a run.
pub struct ProfileVectors<F> {
    pub author: String,
    pub words: FeatureVector<F>,
    pub chars: FeatureVector<F>,
    pub ranked: Vec<String>,
}

impl<F: Float> ProfileVectors<F> {
    pub fn build(profile: &AuthorProfile, char_n: usize) -> Result<Self, AttributionError> {
        let words = profile.word_vector()?;
        let chars = profile.char_ngram_vector(char_n)?;
        let ranked = words.ranked_features();
        Ok(ProfileVectors {
            author: profile.author().to_string(),
            words,
            chars,
            ranked,
        })
    }
}

/// Normalization bookkeeping for one measure row.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NormFlags {
    /// All raw scores were equal; every normalized value was set to zero.
    pub degenerate: bool,
    /// At least one raw score was the +infinity sentinel (a comparison
    /// that could not be computed); those normalize to one.
    pub had_infinite: bool,
}

/// Raw and normalized scores of one unknown text, per measure per author.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreTable<F> {
    pub unknown_title: String,
    pub authors: Vec<String>,
    pub measures: Vec<MeasureId>,
    /// `raw[m][a]`: measure `m` against author `a`; may hold the
    /// +infinity sentinel.
    pub raw: Vec<Vec<F>>,
    /// Same layout, min-max normalized per measure into `[0, 1]`.
    pub normalized: Vec<Vec<F>>,
    pub flags: Vec<NormFlags>,
}

/// Score one unknown text against every author profile.
///
/// Returns one raw score per (measure, author). A perplexity comparison
/// with no shared n-grams is recorded as the +infinity sentinel; the
/// sentinel normalizes to 1 later.
pub fn score_all<F: Float + Send + Sync>(
    profiles: &[ProfileVectors<F>],
    unknown: &Document,
    ctx: &ScoringContext,
) -> Result<ScoreTable<F>, AttributionError> {
    if profiles.len() < 2 {
        return Err(AttributionError::TooFewAuthors(profiles.len()));
    }
    if ctx.measures.is_empty() {
        return Err(AttributionError::NoMeasures);
    }
    let unknown_words: FeatureVector<F> = crate::features::word_vector(unknown)?;
    let unknown_chars: FeatureVector<F> = crate::features::char_ngram_vector(unknown, ctx.char_n)?;
    let unknown_ranked = unknown_words.ranked_features();

    let raw: Result<Vec<Vec<F>>, AttributionError> = ctx
        .measures
        .iter()
        .map(|&measure| {
            profiles
                .par_iter()
                .map(|p| score_one(measure, p, &unknown_words, &unknown_chars, &unknown_ranked, ctx))
                .collect()
        })
        .collect();
    let raw = raw?;

    let mut normalized = Vec::with_capacity(raw.len());
    let mut flags = Vec::with_capacity(raw.len());
    for row in &raw {
        let (norm, flag) = minmax_normalize(row)?;
        normalized.push(norm);
        flags.push(flag);
    }

    Ok(ScoreTable {
        unknown_title: unknown.title().to_string(),
        authors: profiles.iter().map(|p| p.author.clone()).collect(),
        measures: ctx.measures.clone(),
        raw,
        normalized,
        flags,
    })
}

fn score_one<F: Float>(
    measure: MeasureId,
    profile: &ProfileVectors<F>,
    unknown_words: &FeatureVector<F>,
    unknown_chars: &FeatureVector<F>,
    unknown_ranked: &[String],
    ctx: &ScoringContext,
) -> Result<F, AttributionError> {
    let result = match measure {
        MeasureId::KullbackLeibler => {
            kl_distance(&profile.words, unknown_words, &ctx.vocab).map(|s| s.value)
        }
        MeasureId::Perplexity => perplexity_distance(&profile.chars, unknown_chars).map(|s| s.value),
        MeasureId::RankBased => {
            rank_distance(&profile.ranked, unknown_ranked, ctx.rank_k).map(|s| s.value)
        }
        MeasureId::Cosine => {
            cosine_distance(&profile.words, unknown_words, &ctx.vocab).map(|s| s.value)
        }
        // The Delta variants run on z-scores in the clustering pipeline,
        // not against merged profiles.
        MeasureId::BurrowsDelta | MeasureId::EderDelta => {
            return Err(AttributionError::UnsupportedMeasure(measure))
        }
    };
    match result {
        Ok(v) => Ok(v),
        // "Cannot compare" collapses to the most-distant sentinel rather
        // than aborting the run; normalization maps it to 1 and flags it.
        Err(DistanceError::NoSharedNgrams) | Err(DistanceError::NonFinite) => Ok(F::infinity()),
        Err(e) => Err(e.into()),
    }
}

/// Min-max normalize one measure's scores across authors.
///
/// `(x - min) / (max - min)` over the finite scores; if all finite scores
/// are equal they all map to zero and the degenerate flag is set.
/// +infinity sentinels map to exactly one and set their own flag.
/// Normalization is idempotent: feeding a `[0, 1]` row whose min is 0 and
/// max is 1 back through changes nothing.
pub fn minmax_normalize<F: Float>(raw: &[F]) -> Result<(Vec<F>, NormFlags), AttributionError> {
    if raw.len() < 2 {
        return Err(AttributionError::TooFewScores(raw.len()));
    }
    if raw.iter().any(|v| v.is_nan()) {
        return Err(AttributionError::NanScore);
    }
    let mut flags = NormFlags {
        degenerate: false,
        had_infinite: raw.iter().any(|v| v.is_infinite()),
    };
    let finite: Vec<F> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        flags.degenerate = true;
        return Ok((vec![F::zero(); raw.len()], flags));
    }
    let min = finite.iter().copied().fold(F::infinity(), F::min);
    let max = finite.iter().copied().fold(F::neg_infinity(), F::max);
    let spread = max - min;
    if spread == F::zero() {
        flags.degenerate = true;
    }
    let normalized = raw
        .iter()
        .map(|&v| {
            if v.is_infinite() {
                F::one()
            } else if spread == F::zero() {
                F::zero()
            } else {
                (v - min) / spread
            }
        })
        .collect();
    Ok((normalized, flags))
}

/// Arithmetic mean of the normalized scores across measures, per author.
///
/// Every configured measure must contribute a score for every author; the
/// rows must all have the same width. No re-normalization happens after
/// averaging.
pub fn mean_combine<F: Float>(table: &ScoreTable<F>) -> Result<Vec<F>, AttributionError> {
    mean_over_rows(&table.normalized, &table.measures, &table.authors)
}

/// Row-level mean used by both [`mean_combine`] and fixture checks.
pub fn mean_over_rows<F: Float>(
    rows: &[Vec<F>],
    measures: &[MeasureId],
    authors: &[String],
) -> Result<Vec<F>, AttributionError> {
    if measures.is_empty() || rows.is_empty() {
        return Err(AttributionError::NoMeasures);
    }
    if rows.len() != measures.len() {
        return Err(AttributionError::RaggedScores);
    }
    for (row, &measure) in rows.iter().zip(measures) {
        if row.len() != authors.len() {
            let author = authors
                .get(row.len())
                .cloned()
                .unwrap_or_else(|| "<extra>".to_string());
            return Err(AttributionError::MissingMeasure { author, measure });
        }
    }
    let k = F::from(measures.len()).unwrap();
    Ok((0..authors.len())
        .map(|a| rows.iter().fold(F::zero(), |acc, row| acc + row[a]) / k)
        .collect())
}

/// One author's place in the final ordering.
#[derive(Debug, Clone, Serialize)]
pub struct RankedAuthor<F> {
    pub author: String,
    pub score: F,
    /// Competition ranking: tied scores share a rank.
    pub rank: usize,
}

/// Ascending ordering of authors by mean score.
#[derive(Debug, Clone, Serialize)]
pub struct Ranking<F> {
    pub entries: Vec<RankedAuthor<F>>,
    /// Gap between the best and second-best scores.
    pub margin: Option<F>,
    /// The top rank is shared by two or more authors.
    pub tied_top: bool,
}

/// Sort authors ascending by mean score and report the winning margin.
pub fn rank_authors<F: Float>(means: &[(String, F)]) -> Ranking<F> {
    assert!(!means.is_empty(), "rank_authors needs at least one score");
    let mut sorted: Vec<(String, F)> = means.to_vec();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));

    let mut entries: Vec<RankedAuthor<F>> = Vec::with_capacity(sorted.len());
    for (i, (author, score)) in sorted.iter().enumerate() {
        let rank = if i > 0 && *score == entries[i - 1].score {
            entries[i - 1].rank
        } else {
            i + 1
        };
        entries.push(RankedAuthor {
            author: author.clone(),
            score: *score,
            rank,
        });
    }
    let margin = (entries.len() >= 2).then(|| entries[1].score - entries[0].score);
    let tied_top = entries.len() >= 2 && entries[1].rank == 1;
    Ranking {
        entries,
        margin,
        tied_top,
    }
}

/// Everything reported for one unknown text.
#[derive(Debug, Clone, Serialize)]
pub struct UnknownAttribution<F> {
    pub table: ScoreTable<F>,
    /// Per-author mean of the normalized scores, in author order.
    pub means: Vec<F>,
    pub ranking: Ranking<F>,
}

/// Configuration echo carried in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub mfw_size: usize,
    pub char_n: usize,
    pub rank_k: usize,
    pub smoothing: String,
    pub linkage: String,
    pub delta_variant: String,
    pub measures: Vec<MeasureId>,
    /// How the MFW statistics were scoped.
    pub stats_scope: String,
}

/// Full attribution run output: one entry per unknown text.
#[derive(Debug, Clone, Serialize)]
pub struct AttributionReport<F> {
    pub config: ReportConfig,
    pub unknowns: Vec<UnknownAttribution<F>>,
}

/// Score, normalize, combine, and rank one unknown text.
pub fn attribute_unknown<F: Float + Send + Sync>(
    profiles: &[ProfileVectors<F>],
    unknown: &Document,
    ctx: &ScoringContext,
) -> Result<UnknownAttribution<F>, AttributionError> {
    let table = score_all(profiles, unknown, ctx)?;
    let means = mean_combine(&table)?;
    let pairs: Vec<(String, F)> = table
        .authors
        .iter()
        .cloned()
        .zip(means.iter().copied())
        .collect();
    let ranking = rank_authors(&pairs);
    Ok(UnknownAttribution {
        table,
        means,
        ranking,
    })
}

impl<F: Float + Display> UnknownAttribution<F> {
    /// Aligned human-readable table: raw scores, normalized scores, means,
    /// and the ranked verdict, all printed with four decimal places.
    pub fn to_text(&self) -> String {
        let t = &self.table;
        let name_width = t
            .authors
            .iter()
            .map(|a| a.len())
            .chain(["author".len()])
            .max()
            .unwrap_or(6);
        let mut out = String::new();
        out.push_str(&format!("unknown text: {}\n", t.unknown_title));

        out.push_str(&format!("\n{:<name_width$}", "author"));
        for m in &t.measures {
            out.push_str(&format!("  {:>18}", format!("{m} (raw)")));
        }
        out.push('\n');
        for (a, author) in t.authors.iter().enumerate() {
            out.push_str(&format!("{author:<name_width$}"));
            for row in &t.raw {
                if row[a].is_infinite() {
                    out.push_str(&format!("  {:>18}", "incomparable"));
                } else {
                    out.push_str(&format!("  {:>18.4}", row[a]));
                }
            }
            out.push('\n');
        }

        out.push_str(&format!("\n{:<name_width$}", "author"));
        for m in &t.measures {
            out.push_str(&format!("  {:>18}", format!("{m} (norm)")));
        }
        out.push_str(&format!("  {:>8}", "mean"));
        out.push('\n');
        for (a, author) in t.authors.iter().enumerate() {
            out.push_str(&format!("{author:<name_width$}"));
            for row in &t.normalized {
                out.push_str(&format!("  {:>18.4}", row[a]));
            }
            out.push_str(&format!("  {:>8.4}", self.means[a]));
            out.push('\n');
        }

        for (flag, m) in t.flags.iter().zip(&t.measures) {
            if flag.had_infinite {
                out.push_str(&format!(
                    "note: {m} could not compare some authors; they were scored as most distant\n"
                ));
            }
            if flag.degenerate {
                out.push_str(&format!("note: {m} scores were all equal (no signal)\n"));
            }
        }

        out.push_str("\nverdict (ascending mean):\n");
        for e in &self.ranking.entries {
            out.push_str(&format!(
                "  {:>2}. {:<name_width$}  {:.4}\n",
                e.rank, e.author, e.score
            ));
        }
        if let Some(margin) = self.ranking.margin {
            out.push_str(&format!("margin to runner-up: {margin:.4}\n"));
        }
        if self.ranking.tied_top {
            out.push_str("note: top rank is tied\n");
        }
        out
    }
}

impl<F: Float + Display + Serialize> AttributionReport<F> {
    /// Header lines shared by all textual outputs.
    pub fn header_text(&self) -> String {
        let c = &self.config;
        let measures = c
            .measures
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = String::new();
        out.push_str("authorship attribution report\n");
        out.push_str(&format!("mfw_size: {}\n", c.mfw_size));
        out.push_str(&format!("char_n: {}\n", c.char_n));
        out.push_str(&format!("rank_k: {}\n", c.rank_k));
        out.push_str(&format!("smoothing: {}\n", c.smoothing));
        out.push_str(&format!("linkage: {}\n", c.linkage));
        out.push_str(&format!("delta_variant: {}\n", c.delta_variant));
        out.push_str(&format!("measures: {measures}\n"));
        if c.measures.len() != MeasureId::PROFILE_MEASURES.len() {
            out.push_str("note: measure subset selected; means cover only these measures\n");
        }
        out.push_str(&format!("stats_scope: {}\n", c.stats_scope));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
