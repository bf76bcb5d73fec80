//! The games-by-ludemes dataset.
//!
//! Every game description is reduced to the set of ludemes it uses; the
//! corpus becomes a binary matrix over the sorted union vocabulary.  Win
//! rates from tournament reports join on game name as 27 label columns
//! (win percentage, rounded to two decimals at the join so the CSV form is
//! bit-exact under round-trips).
//!
//! CSV layout: a `#` metadata line, then a header
//! `game,<ludeme...>,label:<Kind>:<sign>...`, then one row per game.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::engine::CorpusEntry;
use crate::tournament::{portfolio, GameReport, PORTFOLIO_SIZE};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate game name: {0}")]
    DuplicateGame(String),
    #[error("no tournament results for game: {0}")]
    MissingResults(String),
    #[error("name {0:?} cannot be written to CSV (contains comma, quote, or newline)")]
    BadName(String),
    #[error("tournament report for {game} does not match the portfolio: {message}")]
    BadReport { game: String, message: String },
    #[error("the dataset is empty")]
    Empty,
}

/// Binary feature matrix over games, with optional label columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    /// Game names, one per row.
    pub games: Vec<String>,
    /// Sorted ludeme vocabulary, one per feature column.
    pub features: Vec<String>,
    /// `rows[g][f]` is 1 when game `g` uses feature `f`.
    pub rows: Vec<Vec<u8>>,
    /// Label column names (empty before a join).
    pub label_names: Vec<String>,
    /// `labels[g][s]` is the win percentage of portfolio slot `s` on game
    /// `g`, rounded to two decimals.
    pub labels: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_games(&self) -> usize {
        self.games.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Row slice as f64 for the numeric pipelines.
    pub fn row_f64(&self, g: usize) -> Vec<f64> {
        self.rows[g].iter().map(|&v| v as f64).collect()
    }
}

fn check_name(name: &str) -> Result<(), DatasetError> {
    if name.contains(',') || name.contains('"') || name.contains('\n') || name.contains('\r') {
        return Err(DatasetError::BadName(name.to_string()));
    }
    Ok(())
}

/// Build the matrix from `(name, ludemes)` pairs, keeping row order.
pub fn build_feature_matrix(
    items: &[(String, BTreeSet<String>)],
) -> Result<FeatureMatrix, DatasetError> {
    if items.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut seen = BTreeSet::new();
    let mut vocabulary = BTreeSet::new();
    for (name, ludemes) in items {
        check_name(name)?;
        if !seen.insert(name.clone()) {
            return Err(DatasetError::DuplicateGame(name.clone()));
        }
        vocabulary.extend(ludemes.iter().cloned());
    }
    let features: Vec<String> = vocabulary.into_iter().collect();
    let rows = items
        .iter()
        .map(|(_, ludemes)| {
            features
                .iter()
                .map(|f| u8::from(ludemes.contains(f)))
                .collect()
        })
        .collect();
    Ok(FeatureMatrix {
        games: items.iter().map(|(n, _)| n.clone()).collect(),
        features,
        rows,
        label_names: Vec::new(),
        labels: Vec::new(),
    })
}

/// Build the matrix straight from corpus entries, optionally dropping the
/// parse-only (non-compiling) games.
pub fn from_corpus(
    entries: &[CorpusEntry],
    playable_only: bool,
) -> Result<FeatureMatrix, DatasetError> {
    let items: Vec<(String, BTreeSet<String>)> = entries
        .iter()
        .filter(|e| !playable_only || e.is_playable())
        .map(|e| (e.name.clone(), e.ludemes()))
        .collect();
    build_feature_matrix(&items)
}

/// The canonical 27 label column names, in portfolio order.
pub fn label_columns() -> Vec<String> {
    portfolio()
        .iter()
        .map(|h| format!("label:{}:{}", h.kind.name(), h.sign.symbol()))
        .collect()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Join tournament reports onto the matrix as label columns.  Every game
/// needs a report; labels are win percentages rounded to two decimals.
pub fn join_labels(matrix: &mut FeatureMatrix, reports: &[GameReport]) -> Result<(), DatasetError> {
    let expected: Vec<String> = portfolio().iter().map(|h| h.label()).collect();
    let mut by_name: BTreeMap<&str, &GameReport> = BTreeMap::new();
    for r in reports {
        by_name.insert(r.game.as_str(), r);
    }
    let mut labels = Vec::with_capacity(matrix.games.len());
    for game in &matrix.games {
        let report = by_name
            .get(game.as_str())
            .ok_or_else(|| DatasetError::MissingResults(game.clone()))?;
        if report.entries.len() != PORTFOLIO_SIZE {
            return Err(DatasetError::BadReport {
                game: game.clone(),
                message: format!(
                    "{} entries, expected {}",
                    report.entries.len(),
                    PORTFOLIO_SIZE
                ),
            });
        }
        for (entry, want) in report.entries.iter().zip(expected.iter()) {
            if &entry.slot != want {
                return Err(DatasetError::BadReport {
                    game: game.clone(),
                    message: format!("slot {:?} where {want:?} was expected", entry.slot),
                });
            }
        }
        labels.push(
            report
                .entries
                .iter()
                .map(|e| round2(e.win_rate * 100.0))
                .collect(),
        );
    }
    matrix.labels = labels;
    matrix.label_names = label_columns();
    Ok(())
}

/// Serialize to CSV with a `#` metadata line.
pub fn to_csv(matrix: &FeatureMatrix) -> String {
    let mut out = format!(
        "# games={} ludemes={} labels={}\n",
        matrix.n_games(),
        matrix.n_features(),
        matrix.label_names.len()
    );
    out.push_str("game");
    for f in &matrix.features {
        let _ = write!(out, ",{f}");
    }
    for l in &matrix.label_names {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for (g, name) in matrix.games.iter().enumerate() {
        out.push_str(name);
        for v in &matrix.rows[g] {
            let _ = write!(out, ",{v}");
        }
        if !matrix.labels.is_empty() {
            for v in &matrix.labels[g] {
                let _ = write!(out, ",{v:.2}");
            }
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV form produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<FeatureMatrix, DatasetError> {
    let mut lines = text.lines().enumerate().peekable();
    // Optional metadata line.
    if let Some((_, line)) = lines.peek() {
        if line.starts_with('#') {
            lines.next();
        }
    }
    let (header_no, header) = lines.next().ok_or(DatasetError::Empty)?;
    let mut columns = header.split(',');
    match columns.next() {
        Some("game") => {}
        other => {
            return Err(DatasetError::Parse {
                line: header_no + 1,
                message: format!("header must start with 'game', found {other:?}"),
            })
        }
    }
    let mut features = Vec::new();
    let mut label_names = Vec::new();
    for c in columns {
        if c.starts_with("label:") {
            label_names.push(c.to_string());
        } else if label_names.is_empty() {
            features.push(c.to_string());
        } else {
            return Err(DatasetError::Parse {
                line: header_no + 1,
                message: format!("feature column {c:?} appears after label columns"),
            });
        }
    }
    let mut games = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let name = cells.next().unwrap_or_default().to_string();
        check_name(&name)?;
        let cells: Vec<&str> = cells.collect();
        let want = features.len() + label_names.len();
        if cells.len() != want {
            return Err(DatasetError::Parse {
                line: no + 1,
                message: format!("{} data cells, expected {want}", cells.len()),
            });
        }
        let mut row = Vec::with_capacity(features.len());
        for (i, cell) in cells[..features.len()].iter().enumerate() {
            match *cell {
                "0" => row.push(0),
                "1" => row.push(1),
                other => {
                    return Err(DatasetError::Parse {
                        line: no + 1,
                        message: format!(
                            "feature {:?} must be 0 or 1, found {other:?}",
                            features[i]
                        ),
                    })
                }
            }
        }
        let mut lab = Vec::with_capacity(label_names.len());
        for (i, cell) in cells[features.len()..].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                line: no + 1,
                message: format!("label {:?} is not a number: {cell:?}", label_names[i]),
            })?;
            lab.push(v);
        }
        games.push(name);
        rows.push(row);
        if !label_names.is_empty() {
            labels.push(lab);
        }
    }
    if games.is_empty() {
        return Err(DatasetError::Empty);
    }
    let mut seen = BTreeSet::new();
    for g in &games {
        if !seen.insert(g.clone()) {
            return Err(DatasetError::DuplicateGame(g.clone()));
        }
    }
    Ok(FeatureMatrix {
        games,
        features,
        rows,
        label_names,
        labels,
    })
}

/// Write the CSV form to disk.
pub fn write_csv(matrix: &FeatureMatrix, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, to_csv(matrix)).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Read the CSV form from disk.
pub fn read_csv(path: &Path) -> Result<FeatureMatrix, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tournament::{ReportConfig, SlotReport};

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn fake_report(game: &str, base: f64) -> GameReport {
        let entries = portfolio()
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let rate = (base + i as f64 / 81.0).min(1.0);
                SlotReport {
                    slot: h.label(),
                    resolved_kind: h.kind.name().to_string(),
                    sign: h.sign.symbol().to_string(),
                    games_played: 100,
                    win_credit: rate * 100.0,
                    win_rate: rate,
                }
            })
            .collect();
        GameReport {
            game: game.to_string(),
            players: 2,
            master_seed: 42,
            config: ReportConfig {
                search_depth: 2,
                per_combination_games: 10,
                terminal_utility_scale: 1e6,
            },
            entries,
        }
    }

    #[test]
    fn vocabulary_is_the_sorted_union() {
        let items = vec![
            ("A".to_string(), set(&["game", "board", "square"])),
            ("B".to_string(), set(&["game", "piece", "add"])),
        ];
        let m = build_feature_matrix(&items).unwrap();
        assert_eq!(m.features, vec!["add", "board", "game", "piece", "square"]);
        assert_eq!(m.rows[0], vec![0, 1, 1, 0, 1]);
        assert_eq!(m.rows[1], vec![1, 0, 1, 1, 0]);
    }

    #[test]
    fn duplicate_games_are_rejected() {
        let items = vec![
            ("A".to_string(), set(&["game"])),
            ("A".to_string(), set(&["game"])),
        ];
        assert!(matches!(
            build_feature_matrix(&items),
            Err(DatasetError::DuplicateGame(_))
        ));
    }

    #[test]
    fn label_columns_follow_the_portfolio() {
        let cols = label_columns();
        assert_eq!(cols.len(), PORTFOLIO_SIZE);
        assert_eq!(cols[0], "label:Material:+");
        assert_eq!(cols[1], "label:Material:-");
        assert_eq!(cols[26], "label:Null:+");
    }

    #[test]
    fn join_requires_results_for_every_game() {
        let items = vec![
            ("A".to_string(), set(&["game"])),
            ("B".to_string(), set(&["game"])),
        ];
        let mut m = build_feature_matrix(&items).unwrap();
        let err = join_labels(&mut m, &[fake_report("A", 0.25)]).unwrap_err();
        assert!(matches!(err, DatasetError::MissingResults(g) if g == "B"));
    }

    #[test]
    fn labeled_csv_round_trips_bit_exactly() {
        let items = vec![
            ("A".to_string(), set(&["game", "board"])),
            ("B".to_string(), set(&["game", "piece"])),
        ];
        let mut m = build_feature_matrix(&items).unwrap();
        join_labels(
            &mut m,
            &[fake_report("A", 0.25), fake_report("B", 1.0 / 3.0)],
        )
        .unwrap();
        let text = to_csv(&m);
        let back = from_csv(&text).unwrap();
        assert_eq!(back, m);
        for (g, labels) in m.labels.iter().enumerate() {
            for (s, &v) in labels.iter().enumerate() {
                assert!(
                    back.labels[g][s].to_bits() == v.to_bits(),
                    "label ({g},{s}) must survive the CSV exactly"
                );
            }
        }
        // And the text is stable round-trip as well.
        assert_eq!(to_csv(&back), text);
    }

    #[test]
    fn unlabeled_csv_round_trips() {
        let items = vec![("A".to_string(), set(&["game", "sow", "track"]))];
        let m = build_feature_matrix(&items).unwrap();
        let text = to_csv(&m);
        assert!(text.starts_with("# games=1 ludemes=3 labels=0\n"));
        assert!(text.contains("game,game,sow,track\n"));
        let back = from_csv(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# meta\ngame,alpha\nA,2\n";
        let err = from_csv(text).unwrap_err();
        match err {
            DatasetError::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("alpha"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let ragged = "game,alpha,beta\nA,1\n";
        assert!(matches!(
            from_csv(ragged).unwrap_err(),
            DatasetError::Parse { line: 2, .. }
        ));
    }
}
