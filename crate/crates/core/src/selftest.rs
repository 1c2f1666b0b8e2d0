//! Built-in consistency checks: the published-score fixture check and a
//! synthetic end-to-end attribution check. Both are exposed to the CLI
//! `selftest` subcommand and reused by the integration test suite.

use std::collections::BTreeMap;

use crate::attribution::mean_over_rows;
use crate::distance::MeasureId;
use crate::pipeline::{run_attribution, PipelineOptions};
use crate::synth;

/// Fixture shipped with the crate: normalized per-measure scores for five
/// disputed plays against four candidate authors.
pub const TABLE4_CSV: &str = include_str!("../fixtures/table4.csv");

/// Mean values the fixture must reproduce, per unknown, author order as
/// published (ascending mean).
pub const EXPECTED_MEANS: [(&str, [(&str, f64); 4]); 5] = [
    (
        "La ninfa del cielo",
        [
            ("Mira", 0.000),
            ("Guev", 0.596),
            ("Tirso", 0.631),
            ("Clar", 0.720),
        ],
    ),
    (
        "El burlador de Sevilla",
        [
            ("Clar", 0.000),
            ("Tirso", 0.571),
            ("Mira", 0.685),
            ("Guev", 0.830),
        ],
    ),
    (
        "Tan largo me lo fiáis",
        [
            ("Clar", 0.000),
            ("Tirso", 0.575),
            ("Mira", 0.620),
            ("Guev", 0.718),
        ],
    ),
    (
        "La mujer por fuerza",
        [
            ("Tirso", 0.043),
            ("Mira", 0.193),
            ("Clar", 0.546),
            ("Guev", 0.911),
        ],
    ),
    (
        "El condenado por desconfiado",
        [
            ("Mira", 0.123),
            ("Clar", 0.192),
            ("Tirso", 0.587),
            ("Guev", 0.961),
        ],
    ),
];

/// Tolerance for the fixture mean reproduction.
pub const MEAN_TOLERANCE: f64 = 0.0005;

/// Parsed fixture: per unknown, per measure, the scores aligned to a
/// single author order.
#[derive(Debug, Clone)]
pub struct FixtureScores {
    pub unknowns: Vec<FixtureUnknown>,
}

#[derive(Debug, Clone)]
pub struct FixtureUnknown {
    pub title: String,
    pub authors: Vec<String>,
    pub measures: Vec<MeasureId>,
    /// `rows[measure][author]`, aligned with `authors`.
    pub rows: Vec<Vec<f64>>,
}

/// Parse the fixture CSV (columns `unknown,measure,author,score`; `#`
/// comments allowed).
pub fn parse_fixture(csv_text: &str) -> Result<FixtureScores, String> {
    // Per unknown: title, author order, then measure -> author -> score.
    type MeasureScores = BTreeMap<String, BTreeMap<String, f64>>;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let mut per_unknown: Vec<(String, Vec<String>, MeasureScores)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        if record.len() != 4 {
            return Err(format!("expected 4 fields, got {}", record.len()));
        }
        let (unknown, measure, author, score) = (&record[0], &record[1], &record[2], &record[3]);
        let score: f64 = score
            .parse()
            .map_err(|e| format!("bad score `{score}`: {e}"))?;
        let entry = match per_unknown.iter_mut().find(|(t, _, _)| t == unknown) {
            Some(e) => e,
            None => {
                per_unknown.push((unknown.to_string(), Vec::new(), BTreeMap::new()));
                per_unknown.last_mut().unwrap()
            }
        };
        if !entry.1.iter().any(|a| a == author) {
            entry.1.push(author.to_string());
        }
        entry
            .2
            .entry(measure.to_string())
            .or_default()
            .insert(author.to_string(), score);
    }

    let mut unknowns = Vec::new();
    for (title, authors, by_measure) in per_unknown {
        let measures: Vec<MeasureId> = MeasureId::PROFILE_MEASURES.to_vec();
        let mut rows = Vec::new();
        for m in &measures {
            let scores = by_measure
                .get(&m.to_string())
                .ok_or_else(|| format!("{title}: missing measure {m}"))?;
            let row: Result<Vec<f64>, String> = authors
                .iter()
                .map(|a| {
                    scores
                        .get(a)
                        .copied()
                        .ok_or_else(|| format!("{title}/{m}: missing author {a}"))
                })
                .collect();
            rows.push(row?);
        }
        unknowns.push(FixtureUnknown {
            title,
            authors,
            measures,
            rows,
        });
    }
    Ok(FixtureScores { unknowns })
}

/// Outcome of one self-test check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Per-value diagnostics (shown in verbose mode; populated on failure
    /// regardless).
    pub details: Vec<String>,
}

/// Check that averaging the fixture's four measures reproduces the
/// published per-author means within [`MEAN_TOLERANCE`].
pub fn check_fixture_means(fixture: &FixtureScores) -> CheckReport {
    let mut details = Vec::new();
    let mut passed = true;

    let total_values: usize = fixture.unknowns.iter().map(|u| u.rows.len() * u.authors.len()).sum();
    if fixture.unknowns.len() != EXPECTED_MEANS.len() || total_values != 80 {
        passed = false;
        details.push(format!(
            "fixture shape: {} unknowns / {} values (expected 5 / 80)",
            fixture.unknowns.len(),
            total_values
        ));
    }

    for (title, expected) in EXPECTED_MEANS {
        let Some(unknown) = fixture.unknowns.iter().find(|u| u.title == title) else {
            passed = false;
            details.push(format!("missing unknown `{title}` in fixture"));
            continue;
        };
        let means = match mean_over_rows(&unknown.rows, &unknown.measures, &unknown.authors) {
            Ok(m) => m,
            Err(e) => {
                passed = false;
                details.push(format!("{title}: {e}"));
                continue;
            }
        };
        for (author, want) in expected {
            let Some(idx) = unknown.authors.iter().position(|a| a == author) else {
                passed = false;
                details.push(format!("{title}: author `{author}` missing"));
                continue;
            };
            let got = means[idx];
            let diff = (got - want).abs();
            let ok = diff <= MEAN_TOLERANCE;
            passed &= ok;
            details.push(format!(
                "{title} / {author}: mean {got:.4} expected {want:.3} (|diff| {diff:.4}) {}",
                if ok { "ok" } else { "MISMATCH" }
            ));
        }
    }

    CheckReport {
        name: "fixture mean reproduction".to_string(),
        passed,
        details,
    }
}

/// Check that on the synthetic four-author corpus every held-out text is
/// attributed to its true author by each measure individually and by the
/// combined mean (20 verdicts).
pub fn check_synthetic_attribution(seed: u64) -> CheckReport {
    let mut details = Vec::new();
    let mut passed = true;

    let corpus = synth::attribution_corpus(seed);
    let report = match run_attribution::<f64>(&corpus.documents, &PipelineOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            return CheckReport {
                name: "synthetic end-to-end attribution".to_string(),
                passed: false,
                details: vec![format!("pipeline error: {e}")],
            }
        }
    };

    for (title, truth) in &corpus.truths {
        let Some(unknown) = report
            .unknowns
            .iter()
            .find(|u| &u.table.unknown_title == title)
        else {
            passed = false;
            details.push(format!("no report for `{title}`"));
            continue;
        };
        for (m, row) in unknown.table.measures.iter().zip(&unknown.table.raw) {
            let best = argmin(row);
            let verdict = &unknown.table.authors[best];
            let ok = verdict == truth;
            passed &= ok;
            details.push(format!(
                "{title} / {m}: verdict {verdict} (truth {truth}) {}",
                if ok { "ok" } else { "WRONG" }
            ));
        }
        let mean_verdict = &unknown.ranking.entries[0].author;
        let ok = mean_verdict == truth;
        passed &= ok;
        details.push(format!(
            "{title} / mean: verdict {mean_verdict} (truth {truth}) {}",
            if ok { "ok" } else { "WRONG" }
        ));
    }

    CheckReport {
        name: "synthetic end-to-end attribution".to_string(),
        passed,
        details,
    }
}

fn argmin(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Run every self-test check.
pub fn run_selftest(seed: u64) -> Vec<CheckReport> {
    let fixture_check = match parse_fixture(TABLE4_CSV) {
        Ok(fixture) => check_fixture_means(&fixture),
        Err(e) => CheckReport {
            name: "fixture mean reproduction".to_string(),
            passed: false,
            details: vec![format!("fixture parse error: {e}")],
        },
    };
    vec![fixture_check, check_synthetic_attribution(seed)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_to_expected_shape() {
        let fixture = parse_fixture(TABLE4_CSV).unwrap();
        assert_eq!(fixture.unknowns.len(), 5);
        for u in &fixture.unknowns {
            assert_eq!(u.authors.len(), 4);
            assert_eq!(u.rows.len(), 4);
        }
    }

    #[test]
    fn pristine_fixture_check_passes() {
        let fixture = parse_fixture(TABLE4_CSV).unwrap();
        let report = check_fixture_means(&fixture);
        assert!(report.passed, "{:#?}", report.details);
        assert_eq!(report.details.len(), 20);
    }

    #[test]
    fn corrupted_fixture_value_fails_the_check() {
        let mut fixture = parse_fixture(TABLE4_CSV).unwrap();
        fixture.unknowns[0].rows[0][0] += 0.25;
        let report = check_fixture_means(&fixture);
        assert!(!report.passed);
        assert!(report.details.iter().any(|d| d.contains("MISMATCH")));
    }

    #[test]
    fn every_fixture_column_spans_zero_to_one() {
        let fixture = parse_fixture(TABLE4_CSV).unwrap();
        for u in &fixture.unknowns {
            for row in &u.rows {
                let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(min, 0.0, "{}", u.title);
                assert_eq!(max, 1.0, "{}", u.title);
            }
        }
    }
}
