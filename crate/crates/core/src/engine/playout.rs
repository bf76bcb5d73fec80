//! Uniform-random playouts, used for state sampling in tests and analysis.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GameSpec, GameState, Outcome};

/// States visited by one playout, initial state first and the terminal
/// state last, with its verdict.
pub struct Playout {
    pub states: Vec<GameState>,
    pub outcome: Outcome,
}

/// Play uniformly random legal moves from the initial state to termination.
/// Every compiled game terminates: the turn limit (explicit or the implicit
/// default) always fires.
pub fn playout(spec: &GameSpec, rng: &mut ChaCha8Rng) -> Playout {
    let mut states = Vec::new();
    let mut st = spec.initial_state();
    let mut moves = Vec::new();
    loop {
        states.push(st.clone());
        if let Some(outcome) = spec.outcome(&st) {
            return Playout { states, outcome };
        }
        spec.legal_moves_into(&st, &mut moves);
        debug_assert!(!moves.is_empty(), "non-terminal states have moves");
        let mv = moves[rng.gen_range(0..moves.len())];
        spec.apply_unchecked(&mut st, mv);
    }
}

/// Collect `count` non-terminal states from consecutive seeded playouts.
pub fn sample_states(spec: &GameSpec, seed: u64, count: usize) -> Vec<GameState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let playout = playout(spec, &mut rng);
        let live = playout.states.len() - 1; // last state is terminal
        for st in playout.states.into_iter().take(live) {
            if out.len() == count {
                break;
            }
            out.push(st);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn playouts_terminate_and_sampled_states_are_live() {
        let src = r#"
            (game "T"
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
        let spec = GameSpec::compile(&parse(src).unwrap()).unwrap();
        let states = sample_states(&spec, 9, 100);
        assert_eq!(states.len(), 100);
        for st in &states {
            assert!(spec.outcome(st).is_none());
        }
        // Same seed, same sample.
        let again = sample_states(&spec, 9, 100);
        assert_eq!(states, again);
    }
}
