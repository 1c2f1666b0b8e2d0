//! Corpus ingestion: manifest parsing, text preprocessing, and `Document`
//! construction.
//!
//! A corpus is described by a manifest file (CSV, see the repository README
//! for the exact grammar) listing one play per row. Ingestion decodes each
//! file, normalizes it, and yields immutable [`Document`]s in manifest order.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::features;

/// Reserved author label for texts whose authorship is being tested.
pub const UNKNOWN_AUTHOR: &str = "unknown";

/// Errors raised while loading or preprocessing a corpus.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read manifest {path}: {source}")]
    ManifestIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest parse error: {0}")]
    ManifestSyntax(String),
    #[error("manifest row {row}: missing required field `{field}`")]
    MissingField { row: usize, field: &'static str },
    #[error("duplicate title in manifest: {0}")]
    DuplicateTitle(String),
    #[error("entry `{0}` has an empty author field")]
    EmptyAuthor(String),
    #[error("entry `{title}` references a missing or unreadable file: {path}")]
    MissingFile { title: String, path: PathBuf },
    #[error("unsupported encoding hint `{0}` (supported: utf-8, latin-1)")]
    UnknownEncoding(String),
    #[error("input is not valid {encoding}")]
    Undecodable { encoding: String },
    #[error("while ingesting `{title}`: {source}")]
    Ingest {
        title: String,
        #[source]
        source: Box<CorpusError>,
    },
}

/// One manifest row: where a text lives and how it is labeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub title: String,
    /// Author name, or [`UNKNOWN_AUTHOR`] for disputed texts.
    pub author: String,
    pub date: Option<String>,
    pub source: Option<String>,
}

impl ManifestEntry {
    pub fn is_unknown(&self) -> bool {
        self.author == UNKNOWN_AUTHOR
    }
}

/// A parsed and validated corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Titles of all entries, in manifest order.
    pub fn titles(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.title.as_str())
    }

    /// Distinct non-unknown author labels, in first-appearance order.
    pub fn known_authors(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for e in &self.entries {
            if !e.is_unknown() && !seen.iter().any(|a| a == &e.author) {
                seen.push(e.author.clone());
            }
        }
        seen
    }
}

/// One preprocessed text with its label and metadata.
///
/// Immutable after construction; the text is guaranteed to contain no
/// carriage returns and no lines consisting solely of digits and whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    title: String,
    author_label: String,
    text: String,
    token_count: usize,
}

impl Document {
    /// Build a document from already-preprocessed text. The text is run
    /// through [`preprocess_text`] once more, which is a no-op on clean
    /// input (preprocessing is idempotent).
    pub fn new(title: impl Into<String>, author_label: impl Into<String>, text: &str) -> Document {
        let text = preprocess_text(text);
        let token_count = features::tokenize(&text).len();
        Document {
            title: title.into(),
            author_label: author_label.into(),
            text,
            token_count,
        }
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn author_label(&self) -> &str {
        &self.author_label
    }

    pub fn is_unknown(&self) -> bool {
        self.author_label == UNKNOWN_AUTHOR
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Number of word tokens produced by [`features::tokenize`] on `text`.
    pub fn token_count(&self) -> usize {
        self.token_count
    }
}

/// An ordered collection of documents (manifest order).
pub type Corpus = Vec<Document>;

/// Parse and validate a manifest file.
///
/// Relative entry paths are resolved against the manifest's own directory.
pub fn load_manifest(path: &Path) -> Result<Manifest, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::ManifestIo {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&raw, base)
}

/// Parse manifest text. `base` anchors relative paths.
///
/// Format: CSV with header `path,title,author,date,source`; `date` and
/// `source` may be empty. Lines starting with `#` are comments.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Manifest, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| CorpusError::ManifestSyntax(e.to_string()))?
        .clone();
    for required in ["path", "title", "author"] {
        if !headers.iter().any(|h| h == required) {
            return Err(CorpusError::ManifestSyntax(format!(
                "header must contain `{required}` (got: {})",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (path_i, title_i, author_i) = (
        col("path").unwrap(),
        col("title").unwrap(),
        col("author").unwrap(),
    );
    let date_i = col("date");
    let source_i = col("source");

    let mut entries = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CorpusError::ManifestSyntax(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let opt = |i: Option<usize>| {
            i.and_then(|i| record.get(i))
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };

        let rel = field(path_i);
        if rel.is_empty() {
            return Err(CorpusError::MissingField {
                row: row_no + 1,
                field: "path",
            });
        }
        let title = field(title_i);
        if title.is_empty() {
            return Err(CorpusError::MissingField {
                row: row_no + 1,
                field: "title",
            });
        }
        let author = field(author_i);
        if author.is_empty() {
            return Err(CorpusError::EmptyAuthor(title));
        }

        let rel = PathBuf::from(rel);
        let path = if rel.is_absolute() { rel } else { base.join(rel) };
        entries.push(ManifestEntry {
            path,
            title,
            author,
            date: opt(date_i),
            source: opt(source_i),
        });
    }

    for (i, e) in entries.iter().enumerate() {
        if entries[..i].iter().any(|p| p.title == e.title) {
            return Err(CorpusError::DuplicateTitle(e.title.clone()));
        }
        if !e.path.is_file() {
            return Err(CorpusError::MissingFile {
                title: e.title.clone(),
                path: e.path.clone(),
            });
        }
    }

    Ok(Manifest { entries })
}

/// Decode raw bytes and normalize the text.
///
/// Decoding tries the hint (`utf-8` or `latin-1`/`iso-8859-1`) and falls
/// back to UTF-8 when no hint is given. The decoded text is then
/// canonically composed (NFC), carriage returns are dropped in favor of
/// bare line feeds, and every line consisting solely of ASCII digits and
/// whitespace is removed outright.
pub fn preprocess(raw: &[u8], encoding_hint: Option<&str>) -> Result<String, CorpusError> {
    let decode_utf8 = |raw: &[u8]| {
        std::str::from_utf8(raw)
            .map(str::to_string)
            .map_err(|_| CorpusError::Undecodable {
                encoding: "utf-8".into(),
            })
    };
    let decoded = match encoding_hint.map(str::to_ascii_lowercase).as_deref() {
        None | Some("utf-8") | Some("utf8") => decode_utf8(raw)?,
        // Latin-1 maps each byte to the code point of equal value.
        Some("latin-1") | Some("latin1") | Some("iso-8859-1") => {
            raw.iter().map(|&b| b as char).collect()
        }
        Some(other) => return Err(CorpusError::UnknownEncoding(other.to_string())),
    };
    Ok(preprocess_text(&decoded))
}

/// The text-level half of [`preprocess`]: NFC composition, line-break
/// normalization, verse-number removal. Idempotent.
pub fn preprocess_text(text: &str) -> String {
    let composed: String = text.nfc().collect();
    let unixed = composed.replace("\r\n", "\n").replace('\r', "\n");
    let mut out = String::with_capacity(unixed.len());
    for line in unixed.split_inclusive('\n') {
        let content = line.strip_suffix('\n').unwrap_or(line);
        let trimmed = content.trim();
        let verse_number =
            !trimmed.is_empty() && trimmed.chars().all(|c| c.is_ascii_digit());
        if !verse_number {
            out.push_str(line);
        }
    }
    out
}

/// Load every manifest entry and produce one [`Document`] per entry, in
/// manifest order. `encoding_hint` applies to all files (see README).
pub fn ingest(manifest: &Manifest, encoding_hint: Option<&str>) -> Result<Corpus, CorpusError> {
    manifest
        .entries
        .par_iter()
        .map(|entry| {
            let raw = fs::read(&entry.path).map_err(|_| CorpusError::MissingFile {
                title: entry.title.clone(),
                path: entry.path.clone(),
            })?;
            let text = preprocess(&raw, encoding_hint).map_err(|e| CorpusError::Ingest {
                title: entry.title.clone(),
                source: Box::new(e),
            })?;
            Ok(Document::new(&entry.title, &entry.author, &text))
        })
        .collect()
}
