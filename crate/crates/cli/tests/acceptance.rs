//! Acceptance suite. Each test exercises one release criterion end to end
//! and prints a PASS line with the observed numbers; run with
//! `cargo test -p stylometry-cli --test acceptance -- --nocapture` to see
//! them all.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stylometry::attribution::{mean_over_rows, minmax_normalize};
use stylometry::cluster::{agglomerate, ClusterNode, DistanceMatrix, Linkage};
use stylometry::corpus::Document;
use stylometry::distance::{
    burrows_delta, cosine_distance, eder_delta, kl_distance, perplexity_distance, rank_distance,
};
use stylometry::features::{char_ngram_vector, word_vector, FeatureVector};
use stylometry::pipeline::{run_clustering, PipelineOptions};
use stylometry::selftest::{
    check_fixture_means, check_synthetic_attribution, parse_fixture, EXPECTED_MEANS, TABLE4_CSV,
};
use stylometry::synth;

// ---------------------------------------------------------------------
// Criterion 1: the shipped fixture reproduces the published mean table.
// ---------------------------------------------------------------------

#[test]
fn criterion_1_fixture_reproduces_mean_table() {
    let start = Instant::now();
    let fixture = parse_fixture(TABLE4_CSV).expect("fixture parses");
    let report = check_fixture_means(&fixture);
    assert!(report.passed, "mean mismatches:\n{}", report.details.join("\n"));

    // Spot values, asserted independently of the check's own bookkeeping.
    let spot = [
        ("La ninfa del cielo", "Guev", 0.596),
        ("El burlador de Sevilla", "Tirso", 0.571),
        ("La ninfa del cielo", "Clar", 0.720),
        ("El condenado por desconfiado", "Mira", 0.123),
    ];
    for (title, author, want) in spot {
        let unknown = fixture.unknowns.iter().find(|u| u.title == title).unwrap();
        let means = mean_over_rows(&unknown.rows, &unknown.measures, &unknown.authors).unwrap();
        let idx = unknown.authors.iter().position(|a| a == author).unwrap();
        assert!(
            (means[idx] - want).abs() <= 0.0005,
            "{title}/{author}: {} vs {want}",
            means[idx]
        );
    }
    assert_eq!(EXPECTED_MEANS.len() * 4, 20);

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: 20/20 published means reproduced within 0.0005 ({} ms)",
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------
// Criterion 2: every measure matches an independent oracle on random
// inputs (>= 100 seeds, up to 300 features).
// ---------------------------------------------------------------------

fn oracle_burrows(z1: &[f64], z2: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..z1.len() {
        let diff = z1[i] - z2[i];
        sum += if diff < 0.0 { -diff } else { diff };
    }
    sum
}

fn oracle_eder(z1: &[f64], z2: &[f64], ranks: &[usize]) -> f64 {
    let n = ranks.len() as f64;
    let mut sum = 0.0;
    for i in 0..z1.len() {
        let weight = (n - ranks[i] as f64 + 1.0) / n;
        sum += (z1[i] - z2[i]).abs() * weight;
    }
    sum
}

/// Directed KL in natural log, converted to bits at the end; a different
/// evaluation route than the implementation's per-term log2.
fn oracle_symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    let nats = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| x * (x / y).ln())
            .sum::<f64>()
    };
    (nats(p, q) + nats(q, p)) / (2.0 * std::f64::consts::LN_2)
}

fn oracle_smoothed(counts: &HashMap<String, u64>, vocab: &[String]) -> Vec<f64> {
    let smoothed: Vec<f64> = vocab
        .iter()
        .map(|f| (counts.get(f).copied().unwrap_or(0) + 1) as f64)
        .collect();
    let total: f64 = smoothed.iter().sum();
    smoothed.into_iter().map(|c| c / total).collect()
}

/// Product form of the perplexity: prod over shared grams of M(g)^-T(g).
fn oracle_perplexity(model: &FeatureVector<f64>, test: &FeatureVector<f64>) -> f64 {
    let mut product = 1.0;
    for (gram, t) in test.iter_freqs() {
        let m = model.freq(gram);
        if m > 0.0 {
            product *= m.powf(-t);
        }
    }
    product
}

fn oracle_rank(rank_a: &[String], rank_t: &[String], k: usize) -> f64 {
    let positions: HashMap<&str, usize> = rank_a
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, f)| (f.as_str(), i + 1))
        .collect();
    let mut sum = 0i64;
    for (i, f) in rank_t.iter().take(k).enumerate() {
        let a_rank = positions.get(f.as_str()).copied().unwrap_or(k + 1) as i64;
        sum += (a_rank - (i as i64 + 1)).abs();
    }
    sum as f64
}

fn oracle_cosine(a: &[f64], t: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nt = 0.0;
    for i in 0..a.len() {
        dot += a[i] * t[i];
        na += a[i] * a[i];
        nt += t[i] * t[i];
    }
    1.0 - dot / (na.sqrt() * nt.sqrt())
}

/// Letter-only feature names (digits would be dropped by the tokenizer).
fn word_name(i: usize) -> String {
    let a = b'a' + (i / 676 % 26) as u8;
    let b = b'a' + (i / 26 % 26) as u8;
    let c = b'a' + (i % 26) as u8;
    format!("w{}{}{}", a as char, b as char, c as char)
}

/// Build a document whose word counts are exactly `counts`.
fn doc_with_counts(title: &str, counts: &HashMap<String, u64>) -> Document {
    let mut words = Vec::new();
    for (word, &count) in counts {
        for _ in 0..count {
            words.push(word.as_str());
        }
    }
    Document::new(title, "x", &words.join(" "))
}

fn random_counts(rng: &mut ChaCha8Rng, vocab: &[String]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for f in vocab {
        let c = rng.gen_range(0..30u64);
        if c > 0 {
            counts.insert(f.clone(), c);
        }
    }
    if counts.is_empty() {
        counts.insert(vocab[0].clone(), 1);
    }
    counts
}

#[test]
fn criterion_2_measures_match_independent_oracles() {
    let start = Instant::now();
    let mut checked = 0usize;
    for seed in 0..110u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = rng.gen_range(2..=300usize);

        // Delta variants on random z-scores.
        let z1: Vec<f64> = (0..dims).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let z2: Vec<f64> = (0..dims).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let got = burrows_delta(&z1, &z2).unwrap().value;
        assert!((got - oracle_burrows(&z1, &z2)).abs() < 1e-9, "seed {seed}");
        let ranks: Vec<usize> = (1..=dims).collect();
        let got = eder_delta(&z1, &z2, &ranks).unwrap().value;
        assert!((got - oracle_eder(&z1, &z2, &ranks)).abs() < 1e-9, "seed {seed}");

        // Word-based measures on random count tables.
        let vocab: Vec<String> = (0..dims).map(word_name).collect();
        let counts_a = random_counts(&mut rng, &vocab);
        let counts_t = random_counts(&mut rng, &vocab);
        let doc_a = doc_with_counts("a", &counts_a);
        let doc_t = doc_with_counts("t", &counts_t);
        let va: FeatureVector<f64> = word_vector(&doc_a).unwrap();
        let vt: FeatureVector<f64> = word_vector(&doc_t).unwrap();

        let got = kl_distance(&va, &vt, &vocab).unwrap().value;
        let want = oracle_symmetric_kl(
            &oracle_smoothed(&counts_a, &vocab),
            &oracle_smoothed(&counts_t, &vocab),
        );
        assert!((got - want).abs() < 1e-9, "kl seed {seed}: {got} vs {want}");

        let got = cosine_distance(&va, &vt, &vocab).unwrap().value;
        let want = oracle_cosine(&va.project(&vocab), &vt.project(&vocab));
        assert!((got - want).abs() < 1e-9, "cosine seed {seed}");

        let k = rng.gen_range(1..=dims);
        let rank_a = va.ranked_features();
        let rank_t = vt.ranked_features();
        let got = rank_distance::<f64>(&rank_a, &rank_t, k).unwrap().value;
        assert_eq!(got, oracle_rank(&rank_a, &rank_t, k), "rank seed {seed}");

        // Perplexity on random character streams (small alphabet keeps
        // the n-gram sets overlapping).
        let alphabet = ['a', 'b', 'c', 'd', ' '];
        let stream = |len: usize, rng: &mut ChaCha8Rng| -> String {
            (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
        };
        let n = rng.gen_range(2..=4usize);
        let m_doc = Document::new("m", "x", &stream(400, &mut rng));
        let t_doc = Document::new("t", "x", &stream(300, &mut rng));
        let m: FeatureVector<f64> = char_ngram_vector(&m_doc, n).unwrap();
        let t: FeatureVector<f64> = char_ngram_vector(&t_doc, n).unwrap();
        let got = perplexity_distance(&m, &t).unwrap().value;
        let want = oracle_perplexity(&m, &t);
        assert!(
            (got - want).abs() / want.abs() < 1e-6,
            "perplexity seed {seed}: {got} vs {want}"
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: 6 measures match independent oracles on {checked} seeds ({} ms)",
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------
// Criterion 3: distance axioms and normalization bounds over >= 1000
// randomized cases.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_distance_axioms() {
    let mut cases = 0usize;
    for seed in 0..1200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA110 ^ seed);
        let dims = rng.gen_range(2..=60usize);
        let z1: Vec<f64> = (0..dims).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let z2: Vec<f64> = (0..dims).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let ranks: Vec<usize> = (1..=dims).collect();

        // Identity.
        assert_eq!(burrows_delta(&z1, &z1).unwrap().value, 0.0);
        assert_eq!(eder_delta(&z1, &z1, &ranks).unwrap().value, 0.0);

        // Symmetry and non-negativity for the Delta variants.
        let b12 = burrows_delta(&z1, &z2).unwrap().value;
        let b21 = burrows_delta(&z2, &z1).unwrap().value;
        assert_eq!(b12, b21);
        assert!(b12 >= 0.0);
        let e12 = eder_delta(&z1, &z2, &ranks).unwrap().value;
        assert_eq!(e12, eder_delta(&z2, &z1, &ranks).unwrap().value);
        assert!(e12 >= 0.0);

        // Word-based measures.
        let vocab: Vec<String> = (0..dims.min(30)).map(word_name).collect();
        let counts_a = random_counts(&mut rng, &vocab);
        let counts_t = random_counts(&mut rng, &vocab);
        let va: FeatureVector<f64> = word_vector(&doc_with_counts("a", &counts_a)).unwrap();
        let vt: FeatureVector<f64> = word_vector(&doc_with_counts("t", &counts_t)).unwrap();

        assert_eq!(kl_distance(&va, &va, &vocab).unwrap().value, 0.0);
        assert_eq!(cosine_distance(&va, &va, &vocab).unwrap().value, 0.0);
        let kl_at = kl_distance(&va, &vt, &vocab).unwrap().value;
        assert_eq!(kl_at, kl_distance(&vt, &va, &vocab).unwrap().value);
        assert!(kl_at >= 0.0);
        let cos = cosine_distance(&va, &vt, &vocab).unwrap().value;
        assert_eq!(cos, cosine_distance(&vt, &va, &vocab).unwrap().value);
        assert!((0.0..=1.0).contains(&cos), "cosine {cos}");

        let rank_a = va.ranked_features();
        let rank_t = vt.ranked_features();
        let k = rng.gen_range(1..=vocab.len());
        assert_eq!(rank_distance::<f64>(&rank_a, &rank_a, k).unwrap().value, 0.0);
        let r_at = rank_distance::<f64>(&rank_a, &rank_t, k).unwrap().value;
        assert!(r_at >= 0.0);
        // Symmetric when k covers both lists and their universes coincide:
        // force full support so both rankings permute the same feature set.
        let full = |rng: &mut ChaCha8Rng| -> HashMap<String, u64> {
            vocab
                .iter()
                .map(|f| (f.clone(), rng.gen_range(1..30u64)))
                .collect()
        };
        let fa: FeatureVector<f64> =
            word_vector(&doc_with_counts("fa", &full(&mut rng))).unwrap();
        let ft: FeatureVector<f64> =
            word_vector(&doc_with_counts("ft", &full(&mut rng))).unwrap();
        let (ra, rt) = (fa.ranked_features(), ft.ranked_features());
        assert_eq!(
            rank_distance::<f64>(&ra, &rt, vocab.len()).unwrap().value,
            rank_distance::<f64>(&rt, &ra, vocab.len()).unwrap().value
        );

        // Min-max normalization: bounds, span, idempotence, sentinels.
        let n_scores = rng.gen_range(2..=8usize);
        let mut raw: Vec<f64> = (0..n_scores).map(|_| rng.gen_range(0.0..50.0)).collect();
        if rng.gen_bool(0.15) {
            raw[0] = f64::INFINITY;
        }
        let (norm, flags) = minmax_normalize(&raw).unwrap();
        assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
        if !flags.degenerate {
            assert_eq!(norm.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(norm.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let (again, _) = minmax_normalize(&norm).unwrap();
        for (x, y) in norm.iter().zip(&again) {
            assert_eq!(x, y, "normalization not idempotent");
        }
        cases += 1;
    }
    assert!(cases >= 1000);
    println!("[PASS] criterion 3: distance axioms and normalization bounds hold on {cases} cases");
}

// ---------------------------------------------------------------------
// Criterion 4: synthetic end-to-end attribution, 20/20 verdicts.
// ---------------------------------------------------------------------

#[test]
fn criterion_4_synthetic_end_to_end_attribution() {
    let start = Instant::now();
    let report = check_synthetic_attribution(42);
    assert!(report.passed, "verdicts:\n{}", report.details.join("\n"));
    let verdicts = report.details.len();
    assert_eq!(verdicts, 20);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: 20/20 synthetic verdicts correct, seed 42 ({} ms)",
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------
// Criterion 5: a 60%-shared near-duplicate pair are sibling leaves at the
// minimum merge height among 10 distractors.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_near_duplicates_merge_first() {
    let start = Instant::now();
    let (corpus, base, variant) = synth::near_duplicate_corpus(42);
    let run = run_clustering::<f64>(&corpus, &PipelineOptions::default()).unwrap();
    let first = run.tree.min_merge().expect("tree has merges");
    let mut leaves: Vec<&str> = first.leaves();
    leaves.sort_unstable();
    let mut expected = [base.as_str(), variant.as_str()];
    expected.sort_unstable();
    assert_eq!(leaves, expected, "first merge is not the near-duplicate pair");
    // Their merge height is the global minimum over all merges.
    let min_height = run
        .tree
        .merges()
        .iter()
        .map(|m| m.height())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(first.height(), min_height);
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "[PASS] criterion 5: near-duplicates are siblings at height {:.4}, 10 distractors ({} ms)",
        first.height(),
        elapsed.as_millis()
    );
}

// ---------------------------------------------------------------------
// Criterion 6: agglomeration matches a naive O(n^3) reference on random
// matrices (complete linkage, >= 50 seeds).
// ---------------------------------------------------------------------

/// Naive complete-linkage reference: keeps explicit member lists and
/// rescans the original matrix for every inter-cluster distance.
fn naive_complete_linkage(matrix: &DistanceMatrix<f64>) -> ClusterNode<f64> {
    struct Cluster {
        node: ClusterNode<f64>,
        members: Vec<usize>,
    }
    let n = matrix.len();
    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            node: ClusterNode::Leaf {
                label: matrix.labels()[i].clone(),
            },
            members: vec![i],
        })
        .collect();
    while clusters.len() > 1 {
        let mut best: Option<(f64, (usize, usize), (usize, usize))> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let mut d = f64::NEG_INFINITY;
                for &a in &clusters[i].members {
                    for &b in &clusters[j].members {
                        d = d.max(matrix.get(a, b));
                    }
                }
                let ri = *clusters[i].members.iter().min().unwrap();
                let rj = *clusters[j].members.iter().min().unwrap();
                let key = (ri.min(rj), ri.max(rj));
                let better = match &best {
                    None => true,
                    Some((bd, bkey, _)) => d < *bd || (d == *bd && key < *bkey),
                };
                if better {
                    best = Some((d, key, (i, j)));
                }
            }
        }
        let (d, _, (i, j)) = best.unwrap();
        let removed = clusters.remove(j);
        let kept = &mut clusters[i];
        let (left, right) =
            if kept.members.iter().min() < removed.members.iter().min() {
                (kept.node.clone(), removed.node)
            } else {
                (removed.node, kept.node.clone())
            };
        kept.node = ClusterNode::Merge {
            height: d,
            left: Box::new(left),
            right: Box::new(right),
        };
        kept.members.extend(removed.members);
    }
    clusters.into_iter().next().unwrap().node
}

fn canonical(node: &ClusterNode<f64>) -> String {
    match node {
        ClusterNode::Leaf { label } => label.clone(),
        ClusterNode::Merge { height, left, right } => {
            let (l, r) = (canonical(left), canonical(right));
            let (a, b) = if l <= r { (l, r) } else { (r, l) };
            format!("({a},{b}):{height:.9}")
        }
    }
}

#[test]
fn criterion_6_clustering_matches_naive_reference() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1u64 ^ (seed * 101));
        let n = rng.gen_range(5..=8usize);
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = rng.gen_range(0.1..10.0);
                values[i][j] = d;
                values[j][i] = d;
            }
        }
        let labels = (0..n).map(|i| format!("doc{i}")).collect();
        let matrix = DistanceMatrix::new(labels, values).unwrap();
        let fast = agglomerate(&matrix, Linkage::Complete);
        let naive = naive_complete_linkage(&matrix);
        assert_eq!(canonical(fast.root()), canonical(&naive), "seed {seed}");
        checked += 1;
    }
    println!(
        "[PASS] criterion 6: complete-linkage agrees with naive O(n^3) reference on {checked} random matrices"
    );
}

// ---------------------------------------------------------------------
// Criterion 7: cmd_cluster and cmd_attribute are byte-deterministic,
// including across --jobs settings.
// ---------------------------------------------------------------------

fn run_cli(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_stylometry"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_7_cli_outputs_are_byte_deterministic() {
    let workdir = tempfile::tempdir().unwrap();
    let corpus = synth::attribution_corpus(7).documents;
    let manifest = synth::write_corpus_dir(&corpus, &workdir.path().join("corpus")).unwrap();
    let manifest = manifest.to_string_lossy().into_owned();

    let mut artifact_sets = Vec::new();
    for (label, jobs) in [("a", "1"), ("b", "4"), ("c", "1"), ("d", "2")] {
        let out_cluster = workdir.path().join(format!("cluster_{label}"));
        let out_attr = workdir.path().join(format!("attr_{label}"));
        let status = run_cli(
            &[
                "cluster",
                "--manifest",
                &manifest,
                "--jobs",
                jobs,
                "--out",
                out_cluster.to_str().unwrap(),
            ],
            workdir.path(),
        );
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let status = run_cli(
            &[
                "attribute",
                "--manifest",
                &manifest,
                "--jobs",
                jobs,
                "--out",
                out_attr.to_str().unwrap(),
            ],
            workdir.path(),
        );
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let mut set = read_artifacts(&out_cluster);
        set.extend(read_artifacts(&out_attr));
        artifact_sets.push(set);
    }
    let reference = &artifact_sets[0];
    assert!(!reference.is_empty());
    for (i, set) in artifact_sets.iter().enumerate().skip(1) {
        assert_eq!(reference.len(), set.len(), "run {i}");
        for ((name_a, bytes_a), (name_b, bytes_b)) in reference.iter().zip(set) {
            assert_eq!(name_a, name_b, "run {i}");
            assert_eq!(bytes_a, bytes_b, "run {i}: {name_a} differs");
        }
    }
    println!(
        "[PASS] criterion 7: {} artifacts byte-identical across reruns and --jobs 1/2/4",
        reference.len()
    );
}
