//! The four subcommand bodies. Every artifact is derived from the input
//! data and the resolved configuration alone, so identical inputs always
//! produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use stylometry::cluster::{serialize_tree, TreeFormat};
use stylometry::corpus::{ingest, load_manifest, Corpus};
use stylometry::features::{compute_corpus_stats, word_vector, FeatureKind};
use stylometry::pipeline::STATS_SCOPE_NOTE;
use stylometry::selftest;
use stylometry::{run_attribution, run_clustering};

use crate::config::RunConfig;
use crate::error::CliError;

fn load_corpus(config: &RunConfig) -> Result<Corpus, CliError> {
    let manifest = load_manifest(config.manifest_path()?)?;
    Ok(ingest(&manifest, config.encoding.as_deref())?)
}

fn ensure_out_dir(config: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&config.out_dir).map_err(|e| {
        CliError::User(format!(
            "output directory {} is not writable: {e}",
            config.out_dir.display()
        ))
    })?;
    Ok(&config.out_dir)
}

/// Filesystem-safe slug for per-document artifact names.
fn slug(title: &str) -> String {
    let mut out = String::with_capacity(title.len());
    let mut last_sep = true;
    for c in title.to_lowercase().chars() {
        if c.is_alphanumeric() {
            out.push(c);
            last_sep = false;
        } else if !last_sep {
            out.push('_');
            last_sep = true;
        }
    }
    out.trim_end_matches('_').to_string()
}

/// Validate the manifest, ingest the corpus, and print per-document
/// statistics. With `--dump-features`, also write the word-unigram
/// frequency tables and the corpus statistics as TSV files.
pub fn cmd_ingest(config: &RunConfig, dump_features: Option<&PathBuf>) -> Result<(), CliError> {
    let corpus = load_corpus(config)?;
    println!("ingested {} documents", corpus.len());
    println!("{:<34}  {:<12}  {:>8}  {:>9}", "title", "author", "tokens", "chars");
    for doc in &corpus {
        println!(
            "{:<34}  {:<12}  {:>8}  {:>9}",
            doc.title(),
            doc.author_label(),
            doc.token_count(),
            doc.text().chars().count()
        );
    }

    if let Some(dir) = dump_features {
        fs::create_dir_all(dir)?;
        for doc in &corpus {
            let vector = word_vector::<f64>(doc)?;
            let mut rows: Vec<(&str, u64)> = vector.iter_counts().collect();
            rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            let mut out = String::from("feature\tcount\tfrequency\n");
            for (feature, count) in rows {
                let freq = count as f64 / vector.total_count() as f64;
                out.push_str(&format!("{feature}\t{count}\t{freq:.6}\n"));
            }
            fs::write(dir.join(format!("vector_{}.tsv", slug(doc.title()))), out)?;
        }
        let stats =
            compute_corpus_stats::<f64>(&corpus, FeatureKind::WordUnigram, config.mfw_size)?;
        let mut out = String::from("rank\tfeature\tmean\tstddev\n");
        for (i, feature) in stats.mfw().iter().enumerate() {
            out.push_str(&format!(
                "{}\t{feature}\t{:.6}\t{:.6}\n",
                i + 1,
                stats.mean()[i],
                stats.stddev()[i]
            ));
        }
        fs::write(dir.join("corpus_stats_word_unigram.tsv"), out)?;
        println!("feature tables written to {}", dir.display());
    }
    Ok(())
}

/// Cluster all documents and write the dendrogram (Newick, DOT) plus the
/// distance matrix CSV and a textual report.
pub fn cmd_cluster(config: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus(config)?;
    let run = run_clustering::<f64>(&corpus, &config.pipeline_options())?;
    let out = ensure_out_dir(config)?;

    fs::write(
        out.join("dendrogram.nwk"),
        serialize_tree(&run.tree, TreeFormat::Newick) + "\n",
    )?;
    fs::write(
        out.join("dendrogram.dot"),
        serialize_tree(&run.tree, TreeFormat::Dot),
    )?;
    fs::write(out.join("distance_matrix.csv"), run.matrix.to_csv())?;

    let mut report = String::new();
    report.push_str("clustering report\n");
    report.push_str(&format!("documents: {}\n", corpus.len()));
    report.push_str(&format!("mfw_size: {}\n", config.mfw_size));
    report.push_str(&format!("delta_variant: {}\n", config.delta_variant));
    report.push_str(&format!("linkage: {}\n", config.linkage));
    report.push_str(&format!("stats_scope: {STATS_SCOPE_NOTE}\n"));
    report.push('\n');
    report.push_str(&serialize_tree(&run.tree, TreeFormat::Ascii));
    fs::write(out.join("cluster_report.txt"), &report)?;

    print!("{report}");
    println!(
        "artifacts written to {}: dendrogram.nwk, dendrogram.dot, distance_matrix.csv, cluster_report.txt",
        out.display()
    );
    Ok(())
}

/// Attribute every unknown text and write one text and one JSON report
/// per unknown.
pub fn cmd_attribute(config: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus(config)?;
    let report = run_attribution::<f64>(&corpus, &config.pipeline_options())?;
    let out = ensure_out_dir(config)?;

    let header = report.header_text();
    for unknown in &report.unknowns {
        let stem = slug(&unknown.table.unknown_title);
        let text = format!("{header}\n{}", unknown.to_text());
        fs::write(out.join(format!("report_{stem}.txt")), &text)?;
        let json = serde_json::to_string_pretty(&serde_json::json!({
            "config": report.config,
            "unknown": unknown,
        }))
        .expect("report serializes");
        fs::write(out.join(format!("report_{stem}.json")), json + "\n")?;
        println!("{text}");
    }
    println!(
        "{} unknown text(s) attributed; reports written to {}",
        report.unknowns.len(),
        out.display()
    );
    Ok(())
}

/// Run the built-in checks; exit code 2 if any fails.
pub fn cmd_selftest(seed: u64, verbose: bool) -> Result<(), CliError> {
    let reports = selftest::run_selftest(seed);
    let mut all_passed = true;
    for check in &reports {
        println!(
            "[{}] {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name
        );
        if verbose || !check.passed {
            for line in &check.details {
                println!("    {line}");
            }
        }
        all_passed &= check.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Internal("self-test checks failed".into()))
    }
}
