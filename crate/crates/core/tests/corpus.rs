//! Integration checks binding the shipped corpus to the engine: every
//! description loads, the manifest matches, playable games terminate, and
//! the portfolio's conditional heuristics are each exercised both ways.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ludelab::engine::{load_corpus, playout, read_manifest, CompileError, CorpusEntry, Move};
use ludelab::heuristics::{applicable, HeuristicKind};
use ludelab::parser;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&corpus_dir()).expect("corpus loads")
}

#[test]
fn manifest_matches_loaded_corpus() {
    let entries = corpus();
    let manifest = read_manifest(&corpus_dir().join("manifest.txt")).expect("manifest reads");
    assert_eq!(entries.len(), manifest.len());
    for (entry, row) in entries.iter().zip(&manifest) {
        assert_eq!(entry.name, row.name, "order and names agree");
        assert_eq!(entry.file.file_name().unwrap().to_str().unwrap(), row.file);
        if let Ok(spec) = &entry.compiled {
            assert_eq!(spec.player_count, row.players, "{}", entry.name);
        }
    }
}

#[test]
fn corpus_splits_into_playable_and_parse_only() {
    let entries = corpus();
    assert_eq!(entries.len(), 17);

    let playable: Vec<&str> = entries
        .iter()
        .filter(|e| e.is_playable())
        .map(|e| e.name.as_str())
        .collect();
    assert_eq!(playable.len(), 13);

    let mut parse_only: Vec<(&str, String)> = Vec::new();
    for entry in &entries {
        if let Err(err) = &entry.compiled {
            match err {
                CompileError::UnsupportedLudeme(l) => {
                    parse_only.push((entry.name.as_str(), l.clone()))
                }
                other => panic!("{} failed for the wrong reason: {other}", entry.name),
            }
        }
    }
    parse_only.sort();
    assert_eq!(
        parse_only,
        vec![
            ("Dice-War", "dice".to_string()),
            ("Oware-Lite", "Sow".to_string()),
            ("Ring-Race", "track".to_string()),
            ("Snake-Track", "track".to_string()),
        ]
    );
}

#[test]
fn every_description_round_trips_through_the_printer() {
    for entry in corpus() {
        let printed = parser::pretty_print(&entry.tree);
        let reparsed = parser::parse(&printed).expect("printed text parses");
        assert_eq!(reparsed, entry.tree, "{}", entry.name);
    }
}

#[test]
fn ludeme_sets_track_description_content() {
    let entries = corpus();
    let ttt = entries.iter().find(|e| e.name == "Tic-Tac-Toe").unwrap();
    let ludemes = ttt.ludemes();
    for expected in [
        "game",
        "players",
        "equipment",
        "board",
        "square",
        "piece",
        "rules",
        "play",
        "move",
        "add",
        "to",
        "sites",
        "empty",
        "end",
        "if",
        "is",
        "line",
        "result",
        "mover",
        "win",
        "p1",
        "p2",
    ] {
        assert!(ludemes.contains(expected), "missing {expected}");
    }
    assert!(!ludemes.contains("sow"));
    assert!(!ludemes.contains("tic-tac-toe"));
    assert!(!ludemes.contains("disc"));

    let oware = entries.iter().find(|e| e.name == "Oware-Lite").unwrap();
    assert!(oware.ludemes().contains("sow"));
    let snake = entries.iter().find(|e| e.name == "Snake-Track").unwrap();
    assert!(snake.ludemes().contains("dice"));
    assert!(snake.ludemes().contains("track"));
}

#[test]
fn crossings_start_position_matches_hand_enumeration() {
    let entries = corpus();
    let spec = entries
        .iter()
        .find(|e| e.name == "Crossings-3")
        .unwrap()
        .compiled
        .as_ref()
        .unwrap();
    let st = spec.initial_state();
    let occupied = (0..spec.board.site_count())
        .filter(|&s| st.occupant(s).is_some())
        .count();
    assert_eq!(occupied, 6);

    // Hand enumeration for P1 runners on sites 0,1,2 with Forward/FL/FR:
    // site 0 -> {3,4}, site 1 -> {3,4,5}, site 2 -> {4,5}.
    let moves = spec.legal_moves(&st);
    assert_eq!(moves.len(), 7);
    let expected: BTreeSet<(usize, usize)> =
        [(0, 3), (0, 4), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5)]
            .into_iter()
            .collect();
    let got: BTreeSet<(usize, usize)> = moves
        .iter()
        .map(|m| match m {
            Move::Step { from, to, .. } => (*from, *to),
            other => panic!("unexpected move {other:?}"),
        })
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn breakthrough_and_material_start_moves_match_hand_enumeration() {
    let entries = corpus();
    let breakthrough = entries
        .iter()
        .find(|e| e.name == "Breakthrough-5")
        .unwrap()
        .compiled
        .as_ref()
        .unwrap();
    // Rank-0 pawns are boxed in by rank 1; the five rank-1 pawns have
    // 2+3+3+3+2 forward steps.
    assert_eq!(
        breakthrough
            .legal_moves(&breakthrough.initial_state())
            .len(),
        13
    );

    let material = entries
        .iter()
        .find(|e| e.name == "MaterialRules")
        .unwrap()
        .compiled
        .as_ref()
        .unwrap();
    // Discs on 0..=3 stepping in all directions: 2+3+3+2 empty targets.
    assert_eq!(material.legal_moves(&material.initial_state()).len(), 10);
}

#[test]
fn every_conditional_heuristic_is_exercised_both_ways() {
    let entries = corpus();
    let specs: Vec<_> = entries
        .iter()
        .filter_map(|e| e.compiled.as_ref().ok())
        .collect();
    for kind in HeuristicKind::ALL {
        let on = specs.iter().filter(|s| applicable(kind, s)).count();
        assert!(on >= 1, "{kind:?} is never applicable");
        let conditional = matches!(
            kind,
            HeuristicKind::LineCompletion
                | HeuristicKind::RegionProximity
                | HeuristicKind::OwnRegionsCount
                | HeuristicKind::PlayerRegionsProximity
                | HeuristicKind::PlayerSiteMapCount
                | HeuristicKind::Score
                | HeuristicKind::ComponentValues
        );
        if conditional {
            assert!(on < specs.len(), "{kind:?} is never substituted by Null");
        } else {
            assert_eq!(on, specs.len(), "{kind:?} should always apply");
        }
    }
}

#[test]
fn random_playouts_terminate_within_the_turn_limit() {
    for entry in corpus() {
        let Ok(spec) = &entry.compiled else { continue };
        for rep in 0..25u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(rep);
            let run = playout(spec, &mut rng);
            let terminal = run.states.last().unwrap();
            assert!(
                spec.outcome(terminal).is_some(),
                "{} playout {rep} ended live",
                entry.name
            );
            assert!(
                terminal.turn() <= spec.turn_limit,
                "{} playout {rep} overran the turn limit",
                entry.name
            );
        }
    }
}

#[test]
fn sampled_moves_apply_cleanly_and_foreign_moves_are_rejected() {
    for entry in corpus() {
        let Ok(spec) = &entry.compiled else { continue };
        let states = ludelab::engine::sample_states(spec, 7, 40);
        for st in &states {
            let moves = spec.legal_moves(st);
            for &mv in &moves {
                spec.apply(st, mv).expect("legal move applies");
            }
            // An add to an occupied site (or a step from an empty one) is
            // never legal.
            let bogus = match spec.play_rule {
                ludelab::engine::PlayRule::AddToEmpty => (0..spec.board.site_count())
                    .find(|&s| st.occupant(s).is_some())
                    .map(|s| Move::Add { to: s }),
                ludelab::engine::PlayRule::StepMove { .. } => (0..spec.board.site_count())
                    .find(|&s| st.occupant(s).is_none())
                    .map(|s| Move::Step {
                        from: s,
                        to: (s + 1) % spec.board.site_count(),
                        capture: false,
                    }),
            };
            if let Some(bad) = bogus {
                assert!(!moves.contains(&bad));
                assert!(spec.apply(st, bad).is_err());
            }
        }
    }
}
