//! Win-rate measurement for the heuristic portfolio.
//!
//! Every game is probed with the same 27-slot portfolio: the 13 non-null
//! heuristics in both signs, plus `Null`, in a fixed canonical order.  A
//! slot whose heuristic does not apply to the game resolves to `Null` but
//! keeps its label, so every game reports the same 27 rows.
//!
//! For each focus slot the protocol samples opponent line-ups (combinations
//! of the other 26 slots, one per remaining seat), then plays a fixed number
//! of matches per line-up with the focus seat and opponent rotation cycling
//! across repetitions.  Every match seed is derived from the master seed,
//! game name, focus slot, line-up index, and repetition, so the schedule is
//! reproducible and independent of execution order: matches may run on any
//! number of threads and the credits are folded sequentially in schedule
//! order afterwards.
//!
//! A match win is worth 1 credit, a draw 1/n; win rate is credit over
//! matches played.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::engine::{GameSpec, Outcome};
use crate::heuristics::{applicable, HeuristicKind, HeuristicSpec, Sign};
use crate::search::{choose_move, SearchConfig, DEFAULT_TERMINAL_SCALE};

/// Number of portfolio slots: both signs of every non-null heuristic, plus
/// the null baseline.
pub const PORTFOLIO_SIZE: usize = 27;

/// Cap on sampled opponent line-ups per focus slot.
pub const MAX_COMBINATIONS: usize = 10;

/// Minimum matches played per focus slot per game.
pub const MIN_GAMES_PER_SLOT: usize = 100;

/// Tournament parameters.  The defaults reproduce the standard protocol:
/// depth-2 search, at most [`MAX_COMBINATIONS`] line-ups, and at least
/// [`MIN_GAMES_PER_SLOT`] matches per slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TournamentConfig {
    pub search_depth: u32,
    pub per_combination_games: usize,
    pub terminal_utility_scale: f64,
    pub max_combinations: usize,
    pub min_games_per_slot: usize,
}

impl Default for TournamentConfig {
    fn default() -> TournamentConfig {
        TournamentConfig {
            search_depth: 2,
            per_combination_games: 10,
            terminal_utility_scale: DEFAULT_TERMINAL_SCALE,
            max_combinations: MAX_COMBINATIONS,
            min_games_per_slot: MIN_GAMES_PER_SLOT,
        }
    }
}

/// The canonical 27 portfolio entries: kind-major, `+` before `-`, `Null`
/// last.
pub fn portfolio() -> Vec<HeuristicSpec> {
    let mut slots = Vec::with_capacity(PORTFOLIO_SIZE);
    for &kind in HeuristicKind::ALL.iter() {
        if kind == HeuristicKind::Null {
            continue;
        }
        slots.push(HeuristicSpec::new(kind, Sign::Plus));
        slots.push(HeuristicSpec::new(kind, Sign::Minus));
    }
    slots.push(HeuristicSpec::null());
    debug_assert_eq!(slots.len(), PORTFOLIO_SIZE);
    slots
}

/// A portfolio slot resolved against one game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortfolioSlot {
    pub slot: usize,
    pub nominal: HeuristicSpec,
    pub resolved: HeuristicSpec,
}

impl PortfolioSlot {
    /// The slot label, e.g. `Material+`; always the nominal heuristic.
    pub fn label(&self) -> String {
        self.nominal.label()
    }
}

/// Resolve the portfolio against `spec`: inapplicable heuristics fall back
/// to `Null` while keeping their slot identity.
pub fn resolve_portfolio(spec: &GameSpec) -> Vec<PortfolioSlot> {
    portfolio()
        .into_iter()
        .enumerate()
        .map(|(slot, nominal)| {
            let resolved = if applicable(nominal.kind, spec) {
                nominal
            } else {
                HeuristicSpec::null()
            };
            PortfolioSlot {
                slot,
                nominal,
                resolved,
            }
        })
        .collect()
}

fn fnv1a64_update(mut h: u64, bytes: &[u8]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01B3;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    // Field separator so adjacent fields cannot alias.
    h ^= 0xFF;
    h.wrapping_mul(PRIME)
}

/// FNV-1a over a tagged record; used to derive independent RNG seeds from
/// the master seed.
pub(crate) fn derive_seed(tag: &str, game: &str, parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    h = fnv1a64_update(h, tag.as_bytes());
    h = fnv1a64_update(h, game.as_bytes());
    for &p in parts {
        h = fnv1a64_update(h, &p.to_le_bytes());
    }
    h
}

/// Exact binomial coefficient (intermediate math in u128).
fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// The `rank`-th k-combination of `0..n` in lexicographic order.
fn unrank_combination(mut rank: u64, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut remaining = k;
    for x in 0..n {
        if remaining == 0 {
            break;
        }
        let c = binomial((n - 1 - x) as u64, (remaining - 1) as u64);
        if rank < c {
            out.push(x);
            remaining -= 1;
        } else {
            rank -= c;
        }
    }
    debug_assert_eq!(remaining, 0, "rank out of range");
    out
}

/// Up to `cap` distinct combination ranks, ascending.  When everything
/// fits under the cap the full range is used; otherwise ranks are sampled
/// without replacement.
fn sample_combination_ranks(total: u64, cap: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    if total <= cap as u64 {
        return (0..total).collect();
    }
    let mut picked = BTreeSet::new();
    while picked.len() < cap {
        picked.insert(rng.gen_range(0..total));
    }
    picked.into_iter().collect()
}

/// One scheduled match.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchTask {
    /// Focus slot index this match is credited to.
    pub slot: usize,
    /// Opponent slot indices, ascending (one per non-focus seat).
    pub opponents: Vec<usize>,
    /// Seat occupied by the focus heuristic.
    pub focus_seat: usize,
    /// Heuristic per seat, including the focus seat.
    pub seats: Vec<HeuristicSpec>,
    /// Match RNG seed.
    pub seed: u64,
}

/// The full deterministic match schedule for one game.
pub fn build_schedule(
    spec: &GameSpec,
    slots: &[PortfolioSlot],
    master_seed: u64,
    config: &TournamentConfig,
) -> Vec<MatchTask> {
    let n = spec.player_count as usize;
    let k = n - 1;
    let total = binomial((slots.len() - 1) as u64, k as u64);
    let mut tasks = Vec::new();
    for focus in 0..slots.len() {
        let combo_seed = derive_seed("combos", &spec.name, &[master_seed, focus as u64]);
        let mut rng = ChaCha8Rng::seed_from_u64(combo_seed);
        let ranks = sample_combination_ranks(total, config.max_combinations, &mut rng);
        let ncombos = ranks.len();
        let games = config
            .per_combination_games
            .max(config.min_games_per_slot.div_ceil(ncombos));
        let others: Vec<usize> = (0..slots.len()).filter(|&s| s != focus).collect();
        for (ci, &rank) in ranks.iter().enumerate() {
            let opponents: Vec<usize> = unrank_combination(rank, others.len(), k)
                .into_iter()
                .map(|i| others[i])
                .collect();
            for rep in 0..games {
                // One serial index across the slot's whole schedule keeps
                // seat occupancy balanced to within one match.
                let serial = ci * games + rep;
                let focus_seat = serial % n;
                let rot = serial % k.max(1);
                let mut seats = Vec::with_capacity(n);
                let mut oi = 0;
                for seat in 0..n {
                    if seat == focus_seat {
                        seats.push(slots[focus].resolved);
                    } else {
                        let opp = opponents[(oi + rot) % k];
                        seats.push(slots[opp].resolved);
                        oi += 1;
                    }
                }
                let seed = derive_seed(
                    "match",
                    &spec.name,
                    &[master_seed, focus as u64, ci as u64, rep as u64],
                );
                tasks.push(MatchTask {
                    slot: focus,
                    opponents: opponents.clone(),
                    focus_seat,
                    seats,
                    seed,
                });
            }
        }
    }
    tasks
}

/// Play one match to termination.  All seats share one seeded RNG, so the
/// outcome is a pure function of `(spec, seats, config, seed)`.
pub fn run_match(
    spec: &GameSpec,
    seats: &[HeuristicSpec],
    config: &TournamentConfig,
    seed: u64,
) -> Outcome {
    debug_assert_eq!(seats.len(), spec.player_count as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sc = SearchConfig {
        depth: config.search_depth,
        terminal_scale: config.terminal_utility_scale,
        rng_seed: seed,
    };
    let mut st = spec.initial_state();
    loop {
        if let Some(outcome) = spec.outcome(&st) {
            return outcome;
        }
        let h = seats[st.mover().index()];
        let mv = choose_move(spec, &st, h, &sc, &mut rng);
        spec.apply_unchecked(&mut st, mv);
    }
}

fn focus_credit(outcome: &Outcome, focus_seat: usize, n: usize) -> f64 {
    if let Some(winner) = outcome.exclusive_winner {
        if winner.index() == focus_seat {
            1.0
        } else {
            0.0
        }
    } else if outcome.is_draw() {
        1.0 / n as f64
    } else {
        0.0
    }
}

/// Per-slot results for one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlotReport {
    pub slot: String,
    pub resolved_kind: String,
    pub sign: String,
    pub games_played: usize,
    pub win_credit: f64,
    pub win_rate: f64,
}

/// The tournament configuration fields recorded in every report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportConfig {
    pub search_depth: u32,
    pub per_combination_games: usize,
    pub terminal_utility_scale: f64,
}

/// Full tournament result for one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameReport {
    pub game: String,
    #[serde(rename = "n")]
    pub players: u8,
    pub master_seed: u64,
    pub config: ReportConfig,
    pub entries: Vec<SlotReport>,
}

/// Run the full 27-slot tournament for one game.  Matches execute in
/// parallel; credits fold sequentially in schedule order, so the report is
/// identical for any thread count.
pub fn run_tournament(spec: &GameSpec, master_seed: u64, config: &TournamentConfig) -> GameReport {
    let slots = resolve_portfolio(spec);
    let tasks = build_schedule(spec, &slots, master_seed, config);
    let n = spec.player_count as usize;
    let credits: Vec<f64> = tasks
        .par_iter()
        .map(|t| focus_credit(&run_match(spec, &t.seats, config, t.seed), t.focus_seat, n))
        .collect();
    let mut played = vec![0usize; slots.len()];
    let mut credit = vec![0.0f64; slots.len()];
    for (t, &c) in tasks.iter().zip(credits.iter()) {
        played[t.slot] += 1;
        credit[t.slot] += c;
    }
    let entries = slots
        .iter()
        .map(|s| SlotReport {
            slot: s.label(),
            resolved_kind: s.resolved.kind.name().to_string(),
            sign: s.resolved.sign.symbol().to_string(),
            games_played: played[s.slot],
            win_credit: credit[s.slot],
            win_rate: credit[s.slot] / played[s.slot] as f64,
        })
        .collect();
    GameReport {
        game: spec.name.clone(),
        players: spec.player_count,
        master_seed,
        config: ReportConfig {
            search_depth: config.search_depth,
            per_combination_games: config.per_combination_games,
            terminal_utility_scale: config.terminal_utility_scale,
        },
        entries,
    }
}

/// Cross-game aggregate table: average win percentage per slot and the
/// number of games where the slot is (tied-)best.
pub fn aggregate_csv(
    reports: &[GameReport],
    master_seed: u64,
    config: &TournamentConfig,
) -> String {
    let slots = portfolio();
    let mut out = format!(
        "# masterSeed={} searchDepth={} perCombinationGames={}\n",
        master_seed, config.search_depth, config.per_combination_games
    );
    out.push_str("heuristic,sign,avg_win_pct,top_count\n");
    let mut avg = vec![0.0f64; slots.len()];
    let mut top = vec![0usize; slots.len()];
    for report in reports {
        debug_assert_eq!(report.entries.len(), slots.len());
        let best = report
            .entries
            .iter()
            .map(|e| e.win_rate)
            .fold(f64::NEG_INFINITY, f64::max);
        for (i, e) in report.entries.iter().enumerate() {
            avg[i] += e.win_rate * 100.0;
            if e.win_rate == best {
                top[i] += 1;
            }
        }
    }
    let ngames = reports.len().max(1) as f64;
    for (i, h) in slots.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{:.2},{}\n",
            h.kind.name(),
            h.sign.symbol(),
            avg[i] / ngames,
            top[i]
        ));
    }
    out
}
