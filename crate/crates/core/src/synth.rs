//! Deterministic synthetic corpora for self-tests and end-to-end checks.
//!
//! Real Golden Age texts cannot ship with the toolkit, so these generators
//! build play-sized documents from invented authors. All authors write in
//! the same language (one shared word inventory); what distinguishes them
//! is how much they use each word, which is exactly the signal the
//! measures are meant to pick up. Everything is driven by a seeded ChaCha
//! stream: the same seed always yields byte-identical corpora.

use std::fs;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, UNKNOWN_AUTHOR};

/// Shared function-word pool; every author uses these, in different
/// proportions.
const FUNCTION_WORDS: [&str; 15] = [
    "que", "de", "la", "el", "en", "y", "a", "los", "se", "no", "por", "con", "su", "para",
    "como",
];

const SYLLABLE_ONSETS: [&str; 12] = [
    "b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t",
];
const SYLLABLE_NUCLEI: [&str; 8] = ["a", "e", "i", "o", "u", "ia", "ue", "io"];
const SYLLABLE_CODAS: [&str; 4] = ["", "n", "r", "s"];

const AUTHOR_NAMES: [&str; 4] = ["Arminda", "Beltran", "Casilda", "Doristo"];
const TRAINING_PER_AUTHOR: usize = 3;
/// Shared content vocabulary size.
const CONTENT_POOL: usize = 6;
/// Probability that a sampled token is a function word.
const FUNCTION_SHARE: f64 = 0.55;

/// Invented content words common to the whole corpus.
fn content_pool(seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0_7E17);
    let mut words: Vec<String> = Vec::with_capacity(CONTENT_POOL);
    while words.len() < CONTENT_POOL {
        let syllables = rng.gen_range(2..=4);
        let mut word = String::new();
        for _ in 0..syllables {
            word.push_str(SYLLABLE_ONSETS[rng.gen_range(0..SYLLABLE_ONSETS.len())]);
            word.push_str(SYLLABLE_NUCLEI[rng.gen_range(0..SYLLABLE_NUCLEI.len())]);
            word.push_str(SYLLABLE_CODAS[rng.gen_range(0..SYLLABLE_CODAS.len())]);
        }
        if !words.contains(&word) && !FUNCTION_WORDS.contains(&word.as_str()) {
            words.push(word);
        }
    }
    words
}

/// One invented author: a weighting of the shared function words and a
/// weighting of the shared content pool with a favored block boosted.
struct AuthorStyle {
    name: String,
    function_weights: Vec<f64>,
    content_words: Vec<String>,
    content_weights: Vec<f64>,
}

impl AuthorStyle {
    fn derive(seed: u64, author_idx: usize, name: &str, pool: &[String]) -> AuthorStyle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x5717_0000 + author_idx as u64 * 7919));
        let function_base = banded_base(FUNCTION_WORDS.len(), 0.92);
        let content_base = banded_base(pool.len(), 0.92);
        AuthorStyle {
            name: name.to_string(),
            function_weights: banded_weights(&function_base, author_idx, &mut rng),
            content_words: pool.to_vec(),
            content_weights: banded_weights(&content_base, author_idx, &mut rng),
        }
    }

    fn sampler(&self) -> StyleSampler<'_> {
        StyleSampler {
            style: self,
            function_dist: WeightedIndex::new(&self.function_weights).unwrap(),
            content_dist: WeightedIndex::new(&self.content_weights).unwrap(),
        }
    }
}

struct StyleSampler<'a> {
    style: &'a AuthorStyle,
    function_dist: WeightedIndex<f64>,
    content_dist: WeightedIndex<f64>,
}

impl StyleSampler<'_> {
    /// One verse-like line of 5 to 9 tokens.
    fn line(&self, rng: &mut ChaCha8Rng) -> String {
        let len = rng.gen_range(5..=9);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            if rng.gen_bool(FUNCTION_SHARE) {
                words.push(FUNCTION_WORDS[self.function_dist.sample(rng)].to_string());
            } else {
                words.push(self.style.content_words[self.content_dist.sample(rng)].clone());
            }
        }
        words.join(" ")
    }

    /// A text of roughly `target_tokens` tokens, one line per verse.
    fn text(&self, rng: &mut ChaCha8Rng, target_tokens: usize) -> String {
        let mut lines = Vec::new();
        let mut tokens = 0;
        while tokens < target_tokens {
            let line = self.line(rng);
            tokens += line.split(' ').count();
            lines.push(line);
        }
        lines.join("\n")
    }
}

/// Base weights laid out in bands of three: a strong fixed ratio inside
/// each band, geometric decay between bands. Permuting inside bands then
/// moves a lot of probability mass without changing the multiset.
fn banded_base(len: usize, decay: f64) -> Vec<f64> {
    const PATTERN: [f64; 3] = [5.0, 2.2, 1.0];
    (0..len)
        .map(|i| PATTERN[i % 3] * decay.powi((i / 3) as i32))
        .collect()
}

/// Permute a base weight vector within bands of three adjacent ranks,
/// choosing a different permutation per author and band, then apply a
/// faint random tilt. Every author ends up with (nearly) the same weight
/// multiset, so the models have comparable entropy while the per-word
/// proportions stay clearly distinct.
fn banded_weights(base: &[f64], author_idx: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    const PERMS: [[usize; 3]; 4] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
    let mut weights = base.to_vec();
    for band in 0..base.len() / 3 {
        let perm = PERMS[(author_idx + band) % PERMS.len()];
        for i in 0..3 {
            weights[band * 3 + i] = base[band * 3 + perm[i]];
        }
    }
    for w in weights.iter_mut() {
        *w *= rng.gen_range(0.96..1.04);
    }
    weights
}

fn styles(seed: u64) -> Vec<AuthorStyle> {
    let pool = content_pool(seed);
    AUTHOR_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| AuthorStyle::derive(seed, i, name, &pool))
        .collect()
}

/// A generated attribution test corpus: labeled training documents plus
/// unknown-labeled held-out documents with their true authors on the side.
pub struct SyntheticCorpus {
    pub documents: Corpus,
    /// `(unknown title, true author)` for each held-out document.
    pub truths: Vec<(String, String)>,
}

/// Four authors with distinct weighted vocabularies, three play-sized
/// training texts each plus one held-out text each.
pub fn attribution_corpus(seed: u64) -> SyntheticCorpus {
    let styles = styles(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::new();
    let mut truths = Vec::new();
    for style in &styles {
        let sampler = style.sampler();
        for t in 0..TRAINING_PER_AUTHOR {
            let tokens = rng.gen_range(2800..3400);
            let text = sampler.text(&mut rng, tokens);
            documents.push(Document::new(
                format!("Obra {} de {}", t + 1, style.name),
                &style.name,
                &text,
            ));
        }
    }
    for style in &styles {
        let sampler = style.sampler();
        let tokens = rng.gen_range(2800..3400);
        let text = sampler.text(&mut rng, tokens);
        let title = format!("Pieza incógnita {}", style.name.to_lowercase());
        documents.push(Document::new(&title, UNKNOWN_AUTHOR, &text));
        truths.push((title, style.name.clone()));
    }
    SyntheticCorpus { documents, truths }
}

/// A base text, a variant sharing 60% of its lines, and ten distractor
/// texts from other styles. Returns the corpus plus the two titles that
/// must end up as sibling leaves.
pub fn near_duplicate_corpus(seed: u64) -> (Corpus, String, String) {
    let styles = styles(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0DD0);

    let base_sampler = styles[0].sampler();
    let base_text = base_sampler.text(&mut rng, 3000);
    let base_lines: Vec<&str> = base_text.lines().collect();
    // Keep 3 lines in 5 (60%), regenerate the other 2 from the same style.
    let variant_lines: Vec<String> = base_lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            if i % 5 < 3 {
                line.to_string()
            } else {
                base_sampler.line(&mut rng)
            }
        })
        .collect();

    let mut documents = vec![
        Document::new("Obra original", &styles[0].name, &base_text),
        Document::new(
            "Obra refundida",
            UNKNOWN_AUTHOR,
            &variant_lines.join("\n"),
        ),
    ];
    for d in 0..10 {
        let style = &styles[1 + d % 3];
        let sampler = style.sampler();
        let tokens = rng.gen_range(2600..3200);
        let text = sampler.text(&mut rng, tokens);
        documents.push(Document::new(
            format!("Distractor {} de {}", d + 1, style.name),
            &style.name,
            &text,
        ));
    }
    (
        documents,
        "Obra original".to_string(),
        "Obra refundida".to_string(),
    )
}

/// Write a corpus to disk as one text file per document plus a manifest,
/// and return the manifest path. Useful for demos and for exercising the
/// command-line interface on reproducible data.
pub fn write_corpus_dir(corpus: &Corpus, dir: &Path) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::from("path,title,author,date,source\n");
    for (i, doc) in corpus.iter().enumerate() {
        let file = format!("text_{i:02}.txt");
        fs::write(dir.join(&file), doc.text())?;
        manifest.push_str(&format!(
            "{file},{},{},,synthetic\n",
            csv_quote(doc.title()),
            csv_quote(doc.author_label())
        ));
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest)?;
    Ok(manifest_path)
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
