//! Instance-based analysis: pairwise Delta distance matrices over
//! individual texts and agglomerative clustering into a dendrogram.

use std::fmt::Display;

use num_traits::Float;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Document;
use crate::distance::{burrows_delta, eder_delta, DistanceError};
use crate::features::{vectors_for, zscore_vector, CorpusStats, FeatureKind};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("clustering requires at least 2 documents (got {0})")]
    TooFewDocuments(usize),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("newick parse error at offset {at}: {msg}")]
    NewickParse { at: usize, msg: String },
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
}

/// Which Delta variant fills the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaVariant {
    Burrows,
    Eder,
}

impl Display for DeltaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeltaVariant::Burrows => f.write_str("burrows"),
            DeltaVariant::Eder => f.write_str("eder (stylo-compatible rank weighting)"),
        }
    }
}

impl std::str::FromStr for DeltaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "burrows" => Ok(DeltaVariant::Burrows),
            "eder" => Ok(DeltaVariant::Eder),
            other => Err(format!("unknown delta variant `{other}`")),
        }
    }
}

/// Symmetric pairwise distances over labeled documents.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<F> {
    labels: Vec<String>,
    values: Vec<Vec<F>>,
}

impl<F: Float> DistanceMatrix<F> {
    /// Validate and wrap a full square matrix: symmetric, finite entries,
    /// exactly zero diagonal.
    pub fn new(labels: Vec<String>, values: Vec<Vec<F>>) -> Result<Self, ClusterError> {
        let n = labels.len();
        if n == 0 {
            return Err(ClusterError::InvalidMatrix("no labels".into()));
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(ClusterError::InvalidMatrix(format!(
                "expected {n}x{n} values"
            )));
        }
        for i in 0..n {
            if values[i][i] != F::zero() {
                return Err(ClusterError::InvalidMatrix(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in 0..n {
                if !values[i][j].is_finite() || values[i][j] < F::zero() {
                    return Err(ClusterError::InvalidMatrix(format!(
                        "entry ({i},{j}) is not a finite non-negative value"
                    )));
                }
                if values[i][j] != values[j][i] {
                    return Err(ClusterError::InvalidMatrix(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i][j]
    }
}

impl<F: Float + Display> DistanceMatrix<F> {
    /// CSV rendering: header row of labels, then one row per document with
    /// its label first; entries printed with four decimal places.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        writer.write_record(&header).expect("csv write");
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend(self.values[i].iter().map(|v| format!("{v:.4}")));
            writer.write_record(&row).expect("csv write");
        }
        String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf-8")
    }
}

/// Pairwise Delta matrix over all documents in the corpus.
///
/// Every document is z-scored against the shared `stats` (which, following
/// the whole-table convention, are computed over the same corpus), and the
/// chosen Delta variant is applied to every unordered pair.
pub fn delta_matrix<F: Float + Send + Sync>(
    corpus: &[Document],
    stats: &CorpusStats<F>,
    variant: DeltaVariant,
) -> Result<DistanceMatrix<F>, ClusterError> {
    let n = corpus.len();
    if n < 2 {
        return Err(ClusterError::TooFewDocuments(n));
    }
    let vectors = vectors_for(corpus, FeatureKind::WordUnigram)?;
    let zscores: Vec<Vec<F>> = vectors
        .par_iter()
        .map(|v| zscore_vector(v, stats))
        .collect();
    let ranks = stats.active_ranks();

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let entries: Result<Vec<((usize, usize), F)>, DistanceError> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let score = match variant {
                DeltaVariant::Burrows => burrows_delta(&zscores[i], &zscores[j])?,
                DeltaVariant::Eder => eder_delta(&zscores[i], &zscores[j], &ranks)?,
            };
            Ok(((i, j), score.value))
        })
        .collect();

    let mut values = vec![vec![F::zero(); n]; n];
    for ((i, j), d) in entries? {
        values[i][j] = d;
        values[j][i] = d;
    }
    let labels = corpus.iter().map(|d| d.title().to_string()).collect();
    DistanceMatrix::new(labels, values)
}

/// Linkage criterion for agglomerative clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Ward's minimum-variance criterion, computed on squared
    /// dissimilarities with merge heights reported on the original scale.
    Ward,
    Complete,
    Average,
    Single,
}

impl Display for Linkage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Linkage::Ward => "ward",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Single => "single",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ward" => Ok(Linkage::Ward),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            other => Err(format!("unknown linkage `{other}`")),
        }
    }
}

/// A node of the dendrogram: a document leaf or a merge at some height.
#[derive(Debug, Clone, PartialEq)]
pub enum ClusterNode<F> {
    Leaf {
        label: String,
    },
    Merge {
        height: F,
        left: Box<ClusterNode<F>>,
        right: Box<ClusterNode<F>>,
    },
}

impl<F: Float> ClusterNode<F> {
    pub fn is_leaf(&self) -> bool {
        matches!(self, ClusterNode::Leaf { .. })
    }

    /// Merge height; zero for leaves.
    pub fn height(&self) -> F {
        match self {
            ClusterNode::Leaf { .. } => F::zero(),
            ClusterNode::Merge { height, .. } => *height,
        }
    }

    /// Leaf labels under this node, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        match self {
            ClusterNode::Leaf { label } => vec![label.as_str()],
            ClusterNode::Merge { left, right, .. } => {
                let mut out = left.leaves();
                out.extend(right.leaves());
                out
            }
        }
    }

    fn visit_merges<'a>(&'a self, out: &mut Vec<&'a ClusterNode<F>>) {
        if let ClusterNode::Merge { left, right, .. } = self {
            out.push(self);
            left.visit_merges(out);
            right.visit_merges(out);
        }
    }
}

/// Binary merge tree produced by [`agglomerate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree<F> {
    root: ClusterNode<F>,
}

impl<F: Float> ClusterTree<F> {
    pub fn root(&self) -> &ClusterNode<F> {
        &self.root
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        self.root.leaves()
    }

    /// All merge nodes (pre-order).
    pub fn merges(&self) -> Vec<&ClusterNode<F>> {
        let mut out = Vec::new();
        self.root.visit_merges(&mut out);
        out
    }

    /// The lowest merge in the tree; height ties resolve to the merge
    /// spanning the fewest leaves (the innermost one).
    pub fn min_merge(&self) -> Option<&ClusterNode<F>> {
        self.merges().into_iter().min_by(|a, b| {
            a.height()
                .partial_cmp(&b.height())
                .unwrap()
                .then(a.leaves().len().cmp(&b.leaves().len()))
        })
    }
}

/// Agglomerative clustering over a distance matrix.
///
/// Ties on the merge distance are broken deterministically: the candidate
/// pair whose smaller original document index is least wins, then the pair
/// whose larger index is least. The child with the smaller index goes on
/// the left, and merge heights are clamped to be non-decreasing (the
/// linkage recurrences are monotone; the clamp only absorbs floating-point
/// jitter).
pub fn agglomerate<F: Float>(matrix: &DistanceMatrix<F>, linkage: Linkage) -> ClusterTree<F> {
    struct Active<F> {
        node: ClusterNode<F>,
        size: usize,
        rep: usize,
    }

    let n = matrix.len();
    let squared = linkage == Linkage::Ward;
    let mut dist: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = matrix.get(i, j);
                    if squared {
                        d * d
                    } else {
                        d
                    }
                })
                .collect()
        })
        .collect();
    let mut clusters: Vec<Active<F>> = matrix
        .labels()
        .iter()
        .enumerate()
        .map(|(i, label)| Active {
            node: ClusterNode::Leaf {
                label: label.clone(),
            },
            size: 1,
            rep: i,
        })
        .collect();

    let mut last_height = F::zero();
    while clusters.len() > 1 {
        // Find the closest pair, with the deterministic tie-break.
        let mut best: Option<(F, (usize, usize), (usize, usize))> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let d = dist[i][j];
                let key = (
                    clusters[i].rep.min(clusters[j].rep),
                    clusters[i].rep.max(clusters[j].rep),
                );
                let better = match &best {
                    None => true,
                    Some((bd, bkey, _)) => d < *bd || (d == *bd && key < *bkey),
                };
                if better {
                    best = Some((d, key, (i, j)));
                }
            }
        }
        let (d, _, (i, j)) = best.expect("at least one pair");
        let raw_height = if squared { d.sqrt() } else { d };
        let height = if raw_height > last_height {
            raw_height
        } else {
            last_height
        };
        last_height = height;

        // Update distances of the merged cluster (stored at i) to others.
        let (ni, nj) = (
            F::from(clusters[i].size).unwrap(),
            F::from(clusters[j].size).unwrap(),
        );
        for k in 0..clusters.len() {
            if k == i || k == j {
                continue;
            }
            let (dik, djk, dij) = (dist[i][k], dist[j][k], dist[i][j]);
            let merged = match linkage {
                Linkage::Single => dik.min(djk),
                Linkage::Complete => dik.max(djk),
                Linkage::Average => (ni * dik + nj * djk) / (ni + nj),
                Linkage::Ward => {
                    let nk = F::from(clusters[k].size).unwrap();
                    ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk)
                }
            };
            dist[i][k] = merged;
            dist[k][i] = merged;
        }

        // Merge node j into node i, dropping row/column j.
        let removed = clusters.remove(j);
        dist.remove(j);
        for row in dist.iter_mut() {
            row.remove(j);
        }
        let kept = &mut clusters[i];
        let (left, right) = if kept.rep < removed.rep {
            (kept.node.clone(), removed.node)
        } else {
            (removed.node, kept.node.clone())
        };
        kept.node = ClusterNode::Merge {
            height,
            left: Box::new(left),
            right: Box::new(right),
        };
        kept.size += removed.size;
        kept.rep = kept.rep.min(removed.rep);
    }

    ClusterTree {
        root: clusters.into_iter().next().expect("one cluster").node,
    }
}

/// Output format for [`serialize_tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Newick,
    Dot,
    Ascii,
}

/// Render the dendrogram as Newick, DOT, or indented ASCII text.
pub fn serialize_tree<F: Float + Display>(tree: &ClusterTree<F>, format: TreeFormat) -> String {
    match format {
        TreeFormat::Newick => to_newick(tree),
        TreeFormat::Dot => to_dot(tree),
        TreeFormat::Ascii => to_ascii(tree),
    }
}

/// Newick rendering with merge heights as branch lengths.
pub fn to_newick<F: Float + Display>(tree: &ClusterTree<F>) -> String {
    fn node<F: Float + Display>(n: &ClusterNode<F>, out: &mut String) {
        match n {
            ClusterNode::Leaf { label } => out.push_str(&newick_label(label)),
            ClusterNode::Merge {
                height,
                left,
                right,
            } => {
                out.push('(');
                node(left, out);
                out.push_str(&format!(":{}", *height - left.height()));
                out.push(',');
                node(right, out);
                out.push_str(&format!(":{}", *height - right.height()));
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    node(&tree.root, &mut out);
    out.push(';');
    out
}

fn newick_label(label: &str) -> String {
    let safe = !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '|'));
    if safe {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// DOT rendering: a left-to-right dendrogram with merge nodes labeled by
/// their height.
pub fn to_dot<F: Float + Display>(tree: &ClusterTree<F>) -> String {
    fn node<F: Float + Display>(
        n: &ClusterNode<F>,
        next_id: &mut usize,
        out: &mut String,
    ) -> String {
        let id = format!("n{}", *next_id);
        *next_id += 1;
        match n {
            ClusterNode::Leaf { label } => {
                out.push_str(&format!(
                    "  {id} [shape=box, label=\"{}\"];\n",
                    dot_escape(label)
                ));
            }
            ClusterNode::Merge {
                height,
                left,
                right,
            } => {
                out.push_str(&format!("  {id} [shape=point, xlabel=\"{height:.4}\"];\n"));
                let l = node(left, next_id, out);
                let r = node(right, next_id, out);
                out.push_str(&format!("  {id} -> {l};\n  {id} -> {r};\n"));
            }
        }
        id
    }
    let mut out = String::from("digraph dendrogram {\n  rankdir=LR;\n  edge [arrowhead=none];\n");
    let mut next_id = 0;
    node(&tree.root, &mut next_id, &mut out);
    out.push_str("}\n");
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// ASCII rendering: merges listed with their heights, indented by depth.
pub fn to_ascii<F: Float + Display>(tree: &ClusterTree<F>) -> String {
    fn node<F: Float + Display>(n: &ClusterNode<F>, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match n {
            ClusterNode::Leaf { label } => out.push_str(&format!("{pad}- {label}\n")),
            ClusterNode::Merge {
                height,
                left,
                right,
            } => {
                out.push_str(&format!("{pad}+ {height:.4}\n"));
                node(left, depth + 1, out);
                node(right, depth + 1, out);
            }
        }
    }
    let mut out = String::new();
    node(&tree.root, 0, &mut out);
    out
}

/// Parse a Newick string produced by [`to_newick`] back into a tree.
///
/// Supports binary subtrees with branch lengths and quoted labels, which
/// is the subset this crate emits.
pub fn parse_newick<F: Float>(input: &str) -> Result<ClusterTree<F>, ClusterError> {
    struct Parser {
        chars: Vec<char>,
        pos: usize,
    }

    impl Parser {
        fn error<T>(&self, msg: &str) -> Result<T, ClusterError> {
            Err(ClusterError::NewickParse {
                at: self.pos,
                msg: msg.to_string(),
            })
        }

        fn peek(&self) -> Option<char> {
            self.chars.get(self.pos).copied()
        }

        fn bump(&mut self) -> Option<char> {
            let c = self.peek();
            if c.is_some() {
                self.pos += 1;
            }
            c
        }

        fn expect(&mut self, c: char) -> Result<(), ClusterError> {
            if self.bump() == Some(c) {
                Ok(())
            } else {
                self.pos = self.pos.saturating_sub(1);
                self.error(&format!("expected `{c}`"))
            }
        }

        // Returns the node plus its height above the leaves.
        fn subtree<F: Float>(&mut self) -> Result<(ClusterNode<F>, F), ClusterError> {
            if self.peek() == Some('(') {
                self.bump();
                let (left, lh) = self.subtree::<F>()?;
                self.expect(':')?;
                let lbl = self.length::<F>()?;
                self.expect(',')?;
                let (right, rh) = self.subtree::<F>()?;
                self.expect(':')?;
                let rbl = self.length::<F>()?;
                self.expect(')')?;
                let height = (lh + lbl).max(rh + rbl);
                Ok((
                    ClusterNode::Merge {
                        height,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    height,
                ))
            } else {
                let label = self.label()?;
                Ok((ClusterNode::Leaf { label }, F::zero()))
            }
        }

        fn label(&mut self) -> Result<String, ClusterError> {
            if self.peek() == Some('\'') {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        Some('\'') if self.peek() == Some('\'') => {
                            self.bump();
                            out.push('\'');
                        }
                        Some('\'') => return Ok(out),
                        Some(c) => out.push(c),
                        None => return self.error("unterminated quoted label"),
                    }
                }
            } else {
                let mut out = String::new();
                while let Some(c) = self.peek() {
                    if matches!(c, ':' | ',' | ')' | '(' | ';') {
                        break;
                    }
                    out.push(c);
                    self.pos += 1;
                }
                if out.is_empty() {
                    self.error("empty label")
                } else {
                    Ok(out)
                }
            }
        }

        fn length<F: Float>(&mut self) -> Result<F, ClusterError> {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let slice: String = self.chars[start..self.pos].iter().collect();
            slice
                .parse::<f64>()
                .ok()
                .and_then(F::from)
                .ok_or(())
                .or_else(|_| self.error("invalid branch length"))
        }
    }

    let mut p = Parser {
        chars: input.trim().chars().collect(),
        pos: 0,
    };
    let (root, _) = p.subtree()?;
    p.expect(';')?;
    if p.pos != p.chars.len() {
        return p.error("trailing input after `;`");
    }
    Ok(ClusterTree { root })
}
