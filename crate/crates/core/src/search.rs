//! Depth-limited adversarial search over compiled games.
//!
//! Two-player games use plain alpha-beta.  Games with more players use the
//! paranoid reduction: the root player maximizes and every other player is
//! treated as one minimizing coalition, which keeps the tree two-valued and
//! pruning sound.
//!
//! Terminal states score `utility * terminal_scale` (default 1e6) so real
//! outcomes dominate any heuristic value.  [`minimax`] is the no-pruning
//! reference: [`alphabeta`] returns bit-identical values at the root.
//! [`minimax_multi`] evaluates a whole heuristic portfolio in one tree walk
//! and matches per-heuristic [`minimax`] exactly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{GameSpec, GameState, Move, Player};
use crate::heuristics::{state_value, HeuristicSpec};

/// Default scale applied to terminal utilities.
pub const DEFAULT_TERMINAL_SCALE: f64 = 1e6;

/// Search parameters.  `rng_seed` records the tie-breaking seed a caller
/// used to build the move-choice RNG; the searched value itself never
/// depends on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub depth: u32,
    pub terminal_scale: f64,
    pub rng_seed: u64,
}

impl SearchConfig {
    pub fn new(depth: u32, rng_seed: u64) -> SearchConfig {
        SearchConfig {
            depth,
            terminal_scale: DEFAULT_TERMINAL_SCALE,
            rng_seed,
        }
    }
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig::new(2, 0)
    }
}

/// Per-depth scratch buffers so the hot path does not allocate per node.
struct Scratch {
    moves: Vec<Vec<Move>>,
    values: Vec<Vec<f64>>,
}

impl Scratch {
    fn new(depth: u32, lanes: usize) -> Scratch {
        Scratch {
            moves: (0..=depth).map(|_| Vec::new()).collect(),
            values: (0..=depth).map(|_| vec![0.0; lanes]).collect(),
        }
    }
}

fn leaf_value(spec: &GameSpec, st: &GameState, h: HeuristicSpec, player: Player) -> f64 {
    state_value(h, spec, st, player).expect("search requires an applicable heuristic")
}

#[allow(clippy::too_many_arguments)]
fn ab_rec(
    spec: &GameSpec,
    st: &mut GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
    mut alpha: f64,
    mut beta: f64,
    scale: f64,
    scratch: &mut Scratch,
    nodes: &mut u64,
) -> f64 {
    *nodes += 1;
    if let Some(outcome) = spec.outcome(st) {
        return outcome.utility(player) as f64 * scale;
    }
    if depth == 0 {
        return leaf_value(spec, st, h, player);
    }
    let mut moves = std::mem::take(&mut scratch.moves[depth as usize]);
    spec.legal_moves_into(st, &mut moves);
    let maximizing = st.mover == player;
    let mut best = if maximizing {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for &mv in &moves {
        let undo = spec.apply_unchecked(st, mv);
        let v = ab_rec(
            spec,
            st,
            h,
            depth - 1,
            player,
            alpha,
            beta,
            scale,
            scratch,
            nodes,
        );
        spec.undo_move(st, &undo);
        if maximizing {
            if v > best {
                best = v;
            }
            if best > alpha {
                alpha = best;
            }
        } else {
            if v < best {
                best = v;
            }
            if best < beta {
                beta = best;
            }
        }
        if alpha >= beta {
            break;
        }
    }
    scratch.moves[depth as usize] = moves;
    best
}

#[allow(clippy::too_many_arguments)]
fn minimax_rec(
    spec: &GameSpec,
    st: &mut GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
    scale: f64,
    scratch: &mut Scratch,
    nodes: &mut u64,
) -> f64 {
    *nodes += 1;
    if let Some(outcome) = spec.outcome(st) {
        return outcome.utility(player) as f64 * scale;
    }
    if depth == 0 {
        return leaf_value(spec, st, h, player);
    }
    let mut moves = std::mem::take(&mut scratch.moves[depth as usize]);
    spec.legal_moves_into(st, &mut moves);
    let maximizing = st.mover == player;
    let mut best = if maximizing {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    for &mv in &moves {
        let undo = spec.apply_unchecked(st, mv);
        let v = minimax_rec(spec, st, h, depth - 1, player, scale, scratch, nodes);
        spec.undo_move(st, &undo);
        if maximizing {
            if v > best {
                best = v;
            }
        } else if v < best {
            best = v;
        }
    }
    scratch.moves[depth as usize] = moves;
    best
}

#[allow(clippy::too_many_arguments)]
fn multi_rec(
    spec: &GameSpec,
    st: &mut GameState,
    evals: &[HeuristicSpec],
    depth: u32,
    player: Player,
    scale: f64,
    scratch: &mut Scratch,
    out: &mut [f64],
) {
    if let Some(outcome) = spec.outcome(st) {
        out.fill(outcome.utility(player) as f64 * scale);
        return;
    }
    if depth == 0 {
        for (slot, &h) in evals.iter().enumerate() {
            out[slot] = leaf_value(spec, st, h, player);
        }
        return;
    }
    let mut moves = std::mem::take(&mut scratch.moves[depth as usize]);
    spec.legal_moves_into(st, &mut moves);
    let maximizing = st.mover == player;
    out.fill(if maximizing {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    let mut child = std::mem::take(&mut scratch.values[depth as usize]);
    for &mv in &moves {
        let undo = spec.apply_unchecked(st, mv);
        multi_rec(
            spec,
            st,
            evals,
            depth - 1,
            player,
            scale,
            scratch,
            &mut child,
        );
        spec.undo_move(st, &undo);
        if maximizing {
            for (b, &v) in out.iter_mut().zip(child.iter()) {
                if v > *b {
                    *b = v;
                }
            }
        } else {
            for (b, &v) in out.iter_mut().zip(child.iter()) {
                if v < *b {
                    *b = v;
                }
            }
        }
    }
    scratch.values[depth as usize] = child;
    scratch.moves[depth as usize] = moves;
}

/// Alpha-beta value of `st` for `player` (who must be the mover) at the
/// given depth.
pub fn alphabeta(
    spec: &GameSpec,
    st: &GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
) -> f64 {
    alphabeta_counted(spec, st, h, depth, player, DEFAULT_TERMINAL_SCALE).0
}

/// As [`alphabeta`], also returning the number of visited nodes.
pub fn alphabeta_counted(
    spec: &GameSpec,
    st: &GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
    terminal_scale: f64,
) -> (f64, u64) {
    debug_assert_eq!(st.mover(), player, "search roots at the mover");
    let mut work = st.clone();
    let mut scratch = Scratch::new(depth, 1);
    let mut nodes = 0;
    let value = ab_rec(
        spec,
        &mut work,
        h,
        depth,
        player,
        f64::NEG_INFINITY,
        f64::INFINITY,
        terminal_scale,
        &mut scratch,
        &mut nodes,
    );
    (value, nodes)
}

/// No-pruning minimax reference value.
pub fn minimax(
    spec: &GameSpec,
    st: &GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
) -> f64 {
    minimax_counted(spec, st, h, depth, player, DEFAULT_TERMINAL_SCALE).0
}

/// As [`minimax`], also returning the number of visited nodes.
pub fn minimax_counted(
    spec: &GameSpec,
    st: &GameState,
    h: HeuristicSpec,
    depth: u32,
    player: Player,
    terminal_scale: f64,
) -> (f64, u64) {
    debug_assert_eq!(st.mover(), player, "search roots at the mover");
    let mut work = st.clone();
    let mut scratch = Scratch::new(depth, 1);
    let mut nodes = 0;
    let value = minimax_rec(
        spec,
        &mut work,
        h,
        depth,
        player,
        terminal_scale,
        &mut scratch,
        &mut nodes,
    );
    (value, nodes)
}

/// No-pruning minimax for several heuristics in one tree walk.  Entry `i`
/// equals `minimax(spec, st, evals[i], depth, player)` exactly: the walk
/// shares the tree (whose shape is heuristic-independent) and applies the
/// same fold per lane.
pub fn minimax_multi(
    spec: &GameSpec,
    st: &GameState,
    evals: &[HeuristicSpec],
    depth: u32,
    player: Player,
    terminal_scale: f64,
) -> Vec<f64> {
    debug_assert_eq!(st.mover(), player, "search roots at the mover");
    let mut work = st.clone();
    let mut scratch = Scratch::new(depth, evals.len());
    let mut out = vec![0.0; evals.len()];
    multi_rec(
        spec,
        &mut work,
        evals,
        depth,
        player,
        terminal_scale,
        &mut scratch,
        &mut out,
    );
    out
}

/// Pick a move for the mover: search every legal move with a full window
/// and draw uniformly among the value-maximal ones using `rng`.
///
/// `(state, heuristic, config, rng state)` fully determines the choice, so
/// identically seeded calls return identical moves.
pub fn choose_move(
    spec: &GameSpec,
    st: &GameState,
    h: HeuristicSpec,
    config: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> Move {
    debug_assert!(
        spec.outcome(st).is_none(),
        "cannot move in a terminal state"
    );
    let depth = config.depth.max(1);
    let player = st.mover();
    let moves = spec.legal_moves(st);
    debug_assert!(!moves.is_empty());
    let mut work = st.clone();
    let mut scratch = Scratch::new(depth, 1);
    let mut nodes = 0;
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<Move> = Vec::new();
    for &mv in &moves {
        let undo = spec.apply_unchecked(&mut work, mv);
        // Each child gets a fresh full window so tied moves carry their
        // exact values and the draw below is uniform over true argmaxes.
        let v = ab_rec(
            spec,
            &mut work,
            h,
            depth - 1,
            player,
            f64::NEG_INFINITY,
            f64::INFINITY,
            config.terminal_scale,
            &mut scratch,
            &mut nodes,
        );
        spec.undo_move(&mut work, &undo);
        if v > best {
            best = v;
            ties.clear();
            ties.push(mv);
        } else if v == best {
            ties.push(mv);
        }
    }
    ties[rng.gen_range(0..ties.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::sample_states;
    use crate::heuristics::{applicable, HeuristicKind, Sign};
    use crate::parser::parse;
    use rand_chacha::rand_core::SeedableRng;

    fn ttt() -> GameSpec {
        let src = r#"
            (game "Tic-Tac-Toe"
                (players 2)
                (equipment {
                    (board (square 3))
                    (piece "Disc" P1)
                    (piece "Cross" P2)
                })
                (rules
                    (play (move Add (to (sites Empty))))
                    (end (if (is Line 3) (result Mover Win)))
                )
            )
        "#;
        GameSpec::compile(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn alphabeta_matches_minimax_on_sampled_states() {
        let spec = ttt();
        let states = sample_states(&spec, 7, 120);
        let evals: Vec<HeuristicSpec> = HeuristicKind::ALL
            .iter()
            .filter(|&&k| applicable(k, &spec))
            .flat_map(|&k| [Sign::Plus, Sign::Minus].map(|s| HeuristicSpec::new(k, s)))
            .collect();
        for st in &states {
            for depth in 1..=3 {
                let multi =
                    minimax_multi(&spec, st, &evals, depth, st.mover(), DEFAULT_TERMINAL_SCALE);
                for (i, &h) in evals.iter().enumerate() {
                    let ab = alphabeta(&spec, st, h, depth, st.mover());
                    let mm = minimax(&spec, st, h, depth, st.mover());
                    assert_eq!(ab, mm, "{h:?} depth {depth}");
                    assert_eq!(mm, multi[i], "vectorized oracle lane {h:?}");
                }
            }
        }
    }

    #[test]
    fn pruning_reduces_node_count() {
        let spec = ttt();
        let st = spec.initial_state();
        let h = HeuristicSpec::new(HeuristicKind::LineCompletion, Sign::Plus);
        let (v_ab, n_ab) = alphabeta_counted(&spec, &st, h, 3, st.mover(), DEFAULT_TERMINAL_SCALE);
        let (v_mm, n_mm) = minimax_counted(&spec, &st, h, 3, st.mover(), DEFAULT_TERMINAL_SCALE);
        assert_eq!(v_ab, v_mm);
        assert!(n_ab < n_mm, "pruned {n_ab} vs full {n_mm}");
    }

    #[test]
    fn search_finds_immediate_win() {
        let spec = ttt();
        let p1 = Player::new(1);
        let p2 = Player::new(2);
        // P1 to move with discs on 0 and 1: playing 2 wins on the spot.
        let st = spec
            .build_state(&[(0, p1), (1, p1), (3, p2), (4, p2)], p1)
            .unwrap();
        let h = HeuristicSpec::null();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Depth 2 sees the opponent's counter-win on site 5, so the only
        // non-losing optimum is the immediate win.
        let mv = choose_move(&spec, &st, h, &SearchConfig::new(2, 0), &mut rng);
        assert_eq!(mv, Move::Add { to: 2 });
    }

    #[test]
    fn choose_move_is_deterministic_per_seed() {
        let spec = ttt();
        let st = spec.initial_state();
        let h = HeuristicSpec::null();
        let config = SearchConfig::new(2, 11);
        let mut a = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut b = ChaCha8Rng::seed_from_u64(config.rng_seed);
        assert_eq!(
            choose_move(&spec, &st, h, &config, &mut a),
            choose_move(&spec, &st, h, &config, &mut b)
        );
    }

    #[test]
    fn null_ties_on_empty_board_are_uniform() {
        // With the Null heuristic nothing distinguishes the nine openings
        // within depth 2, so the tie-break must spread uniformly.  Chi-square
        // over 9000 seeded draws, 8 degrees of freedom, p > 0.01.
        let spec = ttt();
        let st = spec.initial_state();
        let h = HeuristicSpec::null();
        let config = SearchConfig::new(2, 0);
        let mut counts = [0u32; 9];
        for seed in 0..9000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match choose_move(&spec, &st, h, &config, &mut rng) {
                Move::Add { to } => counts[to] += 1,
                other => panic!("unexpected move {other:?}"),
            }
        }
        let expected = 1000.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            chi2 < 20.09,
            "chi-square {chi2:.2} exceeds the 1% critical value"
        );
    }

    #[test]
    fn paranoid_search_runs_on_three_player_games() {
        let src = r#"
            (game "Tri"
                (players 3)
                (equipment {
                    (board (square 4))
                    (piece "A" P1)
                    (piece "B" P2)
                    (piece "C" P3)
                })
                (rules
                    (play (move Add (to (sites Empty))))
                    (end (if (is Line 3) (result Mover Win)))
                )
            )
        "#;
        let spec = GameSpec::compile(&parse(src).unwrap()).unwrap();
        let states = sample_states(&spec, 3, 40);
        let h = HeuristicSpec::new(HeuristicKind::LineCompletion, Sign::Plus);
        for st in &states {
            let ab = alphabeta(&spec, st, h, 2, st.mover());
            let mm = minimax(&spec, st, h, 2, st.mover());
            assert_eq!(ab, mm);
        }
    }
}
