//! Game states, move generation, application and end-rule evaluation.
//!
//! `GameState` carries, besides the occupancy itself, a set of integer
//! accumulators (piece counts, material, per-window site counts, proximity
//! sums) that are updated incrementally as pieces are added and removed.
//! All accumulators are integers, so their values are independent of the
//! order in which moves were applied and undone; heuristics read them in
//! O(1) and convert to floats only at the end.

use super::{EndResult, EndRule, EngineError, GameSpec, Move, Occupant, PlayRule, Player, Site};

/// Terminal verdict of a game.  Utilities are per player in id order:
/// +1 win, 0 draw, -1 loss.  `exclusive_winner` is set when exactly one
/// player receives +1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Outcome {
    pub utilities: Vec<i8>,
    pub exclusive_winner: Option<Player>,
}

impl Outcome {
    pub fn utility(&self, p: Player) -> i8 {
        self.utilities[p.index()]
    }

    pub fn is_draw(&self) -> bool {
        self.utilities.iter().all(|&u| u == 0)
    }
}

/// A position in a game, including scores and the turn counter.
///
/// States are value-semantic: [`GameSpec::apply`] returns a new state and
/// never mutates its input.  Two states compare equal when occupancy, mover,
/// last mover, scores and turn all match.
#[derive(Clone, PartialEq, Debug)]
pub struct GameState {
    pub(crate) occupants: Vec<Option<Occupant>>,
    pub(crate) mover: Player,
    pub(crate) last_mover: Option<Player>,
    pub(crate) scores: Vec<i64>,
    pub(crate) turn: u32,
    // Incremental accumulators (all derivable from the fields above).
    pub(crate) empty_count: u32,
    pub(crate) piece_count: Vec<u32>,
    pub(crate) material: Vec<i64>,
    /// Per window, per player: number of window sites the player occupies.
    pub(crate) window_counts: Vec<u8>,
    /// Per player: sum of m^2 over windows the player occupies exclusively.
    pub(crate) line_sq: Vec<u64>,
    /// Per player: number of fully-owned windows.
    pub(crate) full_windows: Vec<u32>,
    pub(crate) prox_corner: Vec<u64>,
    pub(crate) prox_sides: Vec<u64>,
    pub(crate) prox_centre: Vec<u64>,
    pub(crate) prox_region: Vec<u64>,
    pub(crate) prox_player_regions: Vec<u64>,
}

impl GameState {
    pub fn mover(&self) -> Player {
        self.mover
    }

    pub fn last_mover(&self) -> Option<Player> {
        self.last_mover
    }

    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn score(&self, p: Player) -> i64 {
        self.scores[p.index()]
    }

    pub fn occupant(&self, s: Site) -> Option<Occupant> {
        self.occupants[s]
    }

    pub fn empty_sites(&self) -> u32 {
        self.empty_count
    }

    pub fn piece_count(&self, p: Player) -> u32 {
        self.piece_count[p.index()]
    }

    /// Total piece value held by `p` (sum of type value times count).
    pub fn material(&self, p: Player) -> i64 {
        self.material[p.index()]
    }

    /// Owner ids per site (0 for empty) — a compact occupancy key for
    /// position-level deduplication in tests and analysis.
    pub fn occupancy_key(&self) -> Vec<u8> {
        self.occupants
            .iter()
            .map(|o| o.map_or(0, |occ| occ.owner.id()))
            .collect()
    }
}

/// Undo record for in-place move application (search interior).
#[derive(Clone, Copy, Debug)]
pub(crate) struct Undo {
    mv: Move,
    captured: Option<Occupant>,
    prev_mover: Player,
    prev_last_mover: Option<Player>,
    score_delta: i64,
}

impl GameSpec {
    /// The start-of-game state: initial placements applied, player 1 to move.
    pub fn initial_state(&self) -> GameState {
        let n = self.player_count as usize;
        let sites = self.board.site_count();
        let mut st = GameState {
            occupants: vec![None; sites],
            mover: Player::new(1),
            last_mover: None,
            scores: vec![0; n],
            turn: 0,
            empty_count: sites as u32,
            piece_count: vec![0; n],
            material: vec![0; n],
            window_counts: vec![0; self.eval.windows.len() * n],
            line_sq: vec![0; n],
            full_windows: vec![0; n],
            prox_corner: vec![0; n],
            prox_sides: vec![0; n],
            prox_centre: vec![0; n],
            prox_region: vec![0; n],
            prox_player_regions: vec![0; n],
        };
        for &(piece, site) in &self.start {
            let owner = self.piece_types[piece].owner;
            self.add_piece(
                &mut st,
                site,
                Occupant {
                    owner,
                    piece: piece as u16,
                    count: 1,
                },
            );
        }
        st
    }

    /// Build a state from explicit placements using each owner's default
    /// piece type.  The turn counter is set to the number of pieces and the
    /// last mover to the player before `mover` (or none on turn 0).
    pub fn build_state(
        &self,
        pieces: &[(Site, Player)],
        mover: Player,
    ) -> Result<GameState, EngineError> {
        let occupants: Vec<(Site, Occupant)> = pieces
            .iter()
            .map(|&(site, owner)| {
                (
                    site,
                    Occupant {
                        owner,
                        piece: self.default_piece[owner.index()] as u16,
                        count: 1,
                    },
                )
            })
            .collect();
        let scores = vec![0; self.player_count as usize];
        self.build_state_full(&occupants, mover, &scores, pieces.len() as u32)
    }

    /// Build a state from explicit occupants, scores and turn counter.
    pub fn build_state_full(
        &self,
        pieces: &[(Site, Occupant)],
        mover: Player,
        scores: &[i64],
        turn: u32,
    ) -> Result<GameState, EngineError> {
        if mover.id() < 1 || mover.id() > self.player_count {
            return Err(EngineError::InvalidState(format!("no player {mover}")));
        }
        if scores.len() != self.player_count as usize {
            return Err(EngineError::InvalidState(
                "scores must cover every player".to_string(),
            ));
        }
        let mut st = self.blank_state();
        for &(site, occ) in pieces {
            if site >= self.board.site_count() {
                return Err(EngineError::InvalidState(format!(
                    "site {site} is off the board"
                )));
            }
            if occ.owner.id() < 1 || occ.owner.id() > self.player_count {
                return Err(EngineError::InvalidState(format!(
                    "no player {}",
                    occ.owner
                )));
            }
            if occ.piece as usize >= self.piece_types.len() || occ.count == 0 {
                return Err(EngineError::InvalidState("malformed occupant".to_string()));
            }
            if st.occupants[site].is_some() {
                return Err(EngineError::InvalidState(format!(
                    "site {site} is occupied twice"
                )));
            }
            self.add_piece(&mut st, site, occ);
        }
        st.mover = mover;
        st.scores = scores.to_vec();
        st.turn = turn;
        st.last_mover = if turn == 0 {
            None
        } else {
            let prev = (mover.id() + self.player_count - 2) % self.player_count + 1;
            Some(Player::new(prev))
        };
        Ok(st)
    }

    fn blank_state(&self) -> GameState {
        let n = self.player_count as usize;
        let sites = self.board.site_count();
        GameState {
            occupants: vec![None; sites],
            mover: Player::new(1),
            last_mover: None,
            scores: vec![0; n],
            turn: 0,
            empty_count: sites as u32,
            piece_count: vec![0; n],
            material: vec![0; n],
            window_counts: vec![0; self.eval.windows.len() * n],
            line_sq: vec![0; n],
            full_windows: vec![0; n],
            prox_corner: vec![0; n],
            prox_sides: vec![0; n],
            prox_centre: vec![0; n],
            prox_region: vec![0; n],
            prox_player_regions: vec![0; n],
        }
    }

    /// Rebuild every accumulator from the occupancy alone.  Used by tests to
    /// check that incremental updates agree with recomputation.
    pub fn recompute_caches(&self, st: &GameState) -> GameState {
        let pieces: Vec<(Site, Occupant)> = st
            .occupants
            .iter()
            .enumerate()
            .filter_map(|(s, o)| o.map(|occ| (s, occ)))
            .collect();
        let mut fresh = self
            .build_state_full(&pieces, st.mover, &st.scores, st.turn)
            .expect("existing states are valid");
        fresh.last_mover = st.last_mover;
        fresh
    }

    pub(crate) fn add_piece(&self, st: &mut GameState, site: Site, occ: Occupant) {
        debug_assert!(st.occupants[site].is_none(), "add to occupied site");
        let p = occ.owner.index();
        let cnt = occ.count as u64;
        st.occupants[site] = Some(occ);
        st.empty_count -= 1;
        st.piece_count[p] += occ.count as u32;
        st.material[p] += self.piece_types[occ.piece as usize].value * occ.count as i64;
        let ev = &self.eval;
        if ev.corner.dmax > 0 {
            st.prox_corner[p] += cnt * (ev.corner.dmax - ev.corner.dist[site]) as u64;
        }
        if ev.sides.dmax > 0 {
            st.prox_sides[p] += cnt * (ev.sides.dmax - ev.sides.dist[site]) as u64;
        }
        if ev.centre.dmax > 0 {
            st.prox_centre[p] += cnt * (ev.centre.dmax - ev.centre.dist[site]) as u64;
        }
        if ev.unowned_regions.has_targets && ev.unowned_regions.dmax > 0 {
            st.prox_region[p] +=
                cnt * (ev.unowned_regions.dmax - ev.unowned_regions.dist[site]) as u64;
        }
        let own = &ev.player_regions[p];
        if own.has_targets && own.dmax > 0 {
            st.prox_player_regions[p] += cnt * (own.dmax - own.dist[site]) as u64;
        }
        for &wi in &ev.site_windows[site] {
            self.window_site_added(st, wi as usize, p);
        }
    }

    pub(crate) fn remove_piece(&self, st: &mut GameState, site: Site) -> Occupant {
        let occ = st.occupants[site].take().expect("remove from empty site");
        let p = occ.owner.index();
        let cnt = occ.count as u64;
        st.empty_count += 1;
        st.piece_count[p] -= occ.count as u32;
        st.material[p] -= self.piece_types[occ.piece as usize].value * occ.count as i64;
        let ev = &self.eval;
        if ev.corner.dmax > 0 {
            st.prox_corner[p] -= cnt * (ev.corner.dmax - ev.corner.dist[site]) as u64;
        }
        if ev.sides.dmax > 0 {
            st.prox_sides[p] -= cnt * (ev.sides.dmax - ev.sides.dist[site]) as u64;
        }
        if ev.centre.dmax > 0 {
            st.prox_centre[p] -= cnt * (ev.centre.dmax - ev.centre.dist[site]) as u64;
        }
        if ev.unowned_regions.has_targets && ev.unowned_regions.dmax > 0 {
            st.prox_region[p] -=
                cnt * (ev.unowned_regions.dmax - ev.unowned_regions.dist[site]) as u64;
        }
        let own = &ev.player_regions[p];
        if own.has_targets && own.dmax > 0 {
            st.prox_player_regions[p] -= cnt * (own.dmax - own.dist[site]) as u64;
        }
        for &wi in &ev.site_windows[site] {
            self.window_site_removed(st, wi as usize, p);
        }
        occ
    }

    /// One more of `p`'s sites in window `wi`.
    fn window_site_added(&self, st: &mut GameState, wi: usize, p: usize) {
        let n = self.player_count as usize;
        let base = wi * n;
        let my = st.window_counts[base + p] as u64;
        let mut others_total = 0u64;
        let mut sole_other = usize::MAX;
        let mut distinct_others = 0u32;
        for q in 0..n {
            if q != p {
                let c = st.window_counts[base + q] as u64;
                if c > 0 {
                    others_total += c;
                    distinct_others += 1;
                    sole_other = q;
                }
            }
        }
        st.window_counts[base + p] += 1;
        if others_total == 0 {
            st.line_sq[p] += 2 * my + 1;
            if my + 1 == self.eval.windows[wi].len() as u64 {
                st.full_windows[p] += 1;
            }
        } else if my == 0 && distinct_others == 1 {
            // The window was exclusively the other player's; it is blocked
            // for them now.
            st.line_sq[sole_other] -= others_total * others_total;
        }
    }

    /// One fewer of `p`'s sites in window `wi`.
    fn window_site_removed(&self, st: &mut GameState, wi: usize, p: usize) {
        let n = self.player_count as usize;
        let base = wi * n;
        let my = st.window_counts[base + p] as u64;
        debug_assert!(my > 0);
        let mut others_total = 0u64;
        let mut sole_other = usize::MAX;
        let mut distinct_others = 0u32;
        for q in 0..n {
            if q != p {
                let c = st.window_counts[base + q] as u64;
                if c > 0 {
                    others_total += c;
                    distinct_others += 1;
                    sole_other = q;
                }
            }
        }
        st.window_counts[base + p] -= 1;
        if others_total == 0 {
            st.line_sq[p] -= 2 * my - 1;
            if my == self.eval.windows[wi].len() as u64 {
                st.full_windows[p] -= 1;
            }
        } else if my == 1 && distinct_others == 1 {
            // My last site left the window; it is exclusively theirs again.
            st.line_sq[sole_other] += others_total * others_total;
        }
    }

    /// Rule-generated moves for `player` (no pass), appended to `out` in
    /// ascending `(from, to)` order.
    pub(crate) fn rule_moves_into(&self, st: &GameState, player: Player, out: &mut Vec<Move>) {
        match &self.play_rule {
            PlayRule::AddToEmpty => {
                for (site, occ) in st.occupants.iter().enumerate() {
                    if occ.is_none() {
                        out.push(Move::Add { to: site });
                    }
                }
            }
            PlayRule::StepMove {
                directions,
                capture,
            } => {
                let start = out.len();
                for (from, occ) in st.occupants.iter().enumerate() {
                    let Some(occ) = occ else { continue };
                    if occ.owner != player {
                        continue;
                    }
                    for &d in directions {
                        let Some(to) = self.board.step(from, d, player) else {
                            continue;
                        };
                        match st.occupants[to] {
                            None => out.push(Move::Step {
                                from,
                                to,
                                capture: false,
                            }),
                            Some(target) if *capture && target.owner != player => {
                                out.push(Move::Step {
                                    from,
                                    to,
                                    capture: true,
                                })
                            }
                            Some(_) => {}
                        }
                    }
                }
                out[start..].sort_unstable();
            }
        }
    }

    /// Does `player` have at least one rule-generated move?
    pub fn has_rule_move(&self, st: &GameState, player: Player) -> bool {
        match &self.play_rule {
            PlayRule::AddToEmpty => st.empty_count > 0,
            PlayRule::StepMove {
                directions,
                capture,
            } => {
                for (from, occ) in st.occupants.iter().enumerate() {
                    let Some(occ) = occ else { continue };
                    if occ.owner != player {
                        continue;
                    }
                    for &d in directions {
                        if let Some(to) = self.board.step(from, d, player) {
                            match st.occupants[to] {
                                None => return true,
                                Some(t) if *capture && t.owner != player => return true,
                                Some(_) => {}
                            }
                        }
                    }
                }
                false
            }
        }
    }

    /// Number of legal moves `player` would have as mover (pass counts as
    /// one move when it would be the only option).
    pub fn mobility(&self, st: &GameState, player: Player) -> u32 {
        let count = match &self.play_rule {
            PlayRule::AddToEmpty => st.empty_count,
            PlayRule::StepMove {
                directions,
                capture,
            } => {
                let mut count = 0u32;
                for (from, occ) in st.occupants.iter().enumerate() {
                    let Some(occ) = occ else { continue };
                    if occ.owner != player {
                        continue;
                    }
                    for &d in directions {
                        if let Some(to) = self.board.step(from, d, player) {
                            match st.occupants[to] {
                                None => count += 1,
                                Some(t) if *capture && t.owner != player => count += 1,
                                Some(_) => {}
                            }
                        }
                    }
                }
                count
            }
        };
        if count == 0 && !self.has_no_moves_rule {
            1
        } else {
            count
        }
    }

    /// Number of distinct destination sites among `player`'s rule moves.
    pub fn influence(&self, st: &GameState, player: Player) -> u32 {
        match &self.play_rule {
            PlayRule::AddToEmpty => st.empty_count,
            PlayRule::StepMove {
                directions,
                capture,
            } => {
                let mut seen = [0u64; 16]; // boards cap at 32*32 = 1024 sites
                let mut count = 0u32;
                for (from, occ) in st.occupants.iter().enumerate() {
                    let Some(occ) = occ else { continue };
                    if occ.owner != player {
                        continue;
                    }
                    for &d in directions {
                        if let Some(to) = self.board.step(from, d, player) {
                            let reachable = match st.occupants[to] {
                                None => true,
                                Some(t) => *capture && t.owner != player,
                            };
                            if reachable {
                                let (word, bit) = (to / 64, to % 64);
                                if seen[word] & (1 << bit) == 0 {
                                    seen[word] |= 1 << bit;
                                    count += 1;
                                }
                            }
                        }
                    }
                }
                count
            }
        }
    }

    /// Legal moves for the mover.  Non-empty for every non-terminal state:
    /// when no rule move exists and no no-moves end rule is declared, the
    /// single legal move is `Pass`.
    pub fn legal_moves(&self, st: &GameState) -> Vec<Move> {
        let mut out = Vec::new();
        self.legal_moves_into(st, &mut out);
        out
    }

    /// As [`legal_moves`](Self::legal_moves), reusing `out`'s allocation.
    pub fn legal_moves_into(&self, st: &GameState, out: &mut Vec<Move>) {
        out.clear();
        self.rule_moves_into(st, st.mover, out);
        if out.is_empty() && !self.has_no_moves_rule {
            out.push(Move::Pass);
        }
    }

    /// Is `mv` legal for the mover in `st`?  Agrees with membership in
    /// [`legal_moves`](Self::legal_moves).
    pub fn is_legal(&self, st: &GameState, mv: Move) -> bool {
        let sites = self.board.site_count();
        match mv {
            Move::Add { to } => {
                matches!(self.play_rule, PlayRule::AddToEmpty)
                    && to < sites
                    && st.occupants[to].is_none()
            }
            Move::Step { from, to, capture } => {
                let PlayRule::StepMove {
                    directions,
                    capture: capture_allowed,
                } = &self.play_rule
                else {
                    return false;
                };
                if from >= sites || to >= sites {
                    return false;
                }
                if !st.occupants[from].is_some_and(|o| o.owner == st.mover) {
                    return false;
                }
                if !directions
                    .iter()
                    .any(|&d| self.board.step(from, d, st.mover) == Some(to))
                {
                    return false;
                }
                match st.occupants[to] {
                    None => !capture,
                    Some(t) => capture && *capture_allowed && t.owner != st.mover,
                }
            }
            Move::Pass => !self.has_no_moves_rule && !self.has_rule_move(st, st.mover),
        }
    }

    /// Apply a move, returning the successor state.  The input state is
    /// never mutated.
    pub fn apply(&self, st: &GameState, mv: Move) -> Result<GameState, EngineError> {
        if !self.is_legal(st, mv) {
            return Err(EngineError::IllegalMove(mv));
        }
        let mut next = st.clone();
        self.apply_unchecked(&mut next, mv);
        Ok(next)
    }

    /// Apply a known-legal move in place.  Interior of search and match
    /// loops; callers must guarantee legality.
    pub(crate) fn apply_unchecked(&self, st: &mut GameState, mv: Move) -> Undo {
        let mover = st.mover;
        let mut undo = Undo {
            mv,
            captured: None,
            prev_mover: mover,
            prev_last_mover: st.last_mover,
            score_delta: 0,
        };
        match mv {
            Move::Add { to } => {
                let piece = self.default_piece[mover.index()];
                self.add_piece(
                    st,
                    to,
                    Occupant {
                        owner: mover,
                        piece: piece as u16,
                        count: 1,
                    },
                );
            }
            Move::Step { from, to, capture } => {
                if capture {
                    let victim = self.remove_piece(st, to);
                    undo.captured = Some(victim);
                    if let Some(points) = self.points_per_capture {
                        let delta = points * victim.count as i64;
                        st.scores[mover.index()] += delta;
                        undo.score_delta = delta;
                    }
                }
                let occ = self.remove_piece(st, from);
                self.add_piece(st, to, occ);
            }
            Move::Pass => {}
        }
        st.last_mover = Some(mover);
        st.mover = self.next_player(mover);
        st.turn += 1;
        undo
    }

    /// Reverse a move applied by [`apply_unchecked`](Self::apply_unchecked).
    pub(crate) fn undo_move(&self, st: &mut GameState, undo: &Undo) {
        st.turn -= 1;
        st.mover = undo.prev_mover;
        st.last_mover = undo.prev_last_mover;
        match undo.mv {
            Move::Add { to } => {
                self.remove_piece(st, to);
            }
            Move::Step { from, to, .. } => {
                let occ = self.remove_piece(st, to);
                self.add_piece(st, from, occ);
                if let Some(victim) = undo.captured {
                    self.add_piece(st, to, victim);
                    st.scores[undo.prev_mover.index()] -= undo.score_delta;
                }
            }
            Move::Pass => {}
        }
    }

    /// Evaluate the end rules in description order.  `None` while the game
    /// is still live.
    pub fn outcome(&self, st: &GameState) -> Option<Outcome> {
        for rule in &self.end_rules {
            match rule {
                EndRule::LineOf { result, .. } => {
                    if let Some(subject) = self.line_subject(st) {
                        return Some(self.result_outcome(subject, *result));
                    }
                }
                EndRule::NoMoves { result } => {
                    if !self.has_rule_move(st, st.mover) {
                        return Some(self.result_outcome(st.mover, *result));
                    }
                }
                EndRule::ReachRegion { region, result } => {
                    if let Some(subject) = st.last_mover {
                        if self.player_in_region(st, subject, region) {
                            return Some(self.result_outcome(subject, *result));
                        }
                    }
                }
                EndRule::TurnLimit { turns } => {
                    if st.turn >= *turns {
                        return Some(self.score_outcome(st));
                    }
                }
            }
        }
        None
    }

    /// The player holding a full window, if any.  When several players hold
    /// full windows simultaneously the last mover is preferred (their move
    /// completed the line), falling back to the lowest player id.
    fn line_subject(&self, st: &GameState) -> Option<Player> {
        if let Some(lm) = st.last_mover {
            if st.full_windows[lm.index()] > 0 {
                return Some(lm);
            }
        }
        (0..self.player_count as usize)
            .find(|&p| st.full_windows[p] > 0)
            .map(|p| Player::new(p as u8 + 1))
    }

    /// Does `p` occupy a site of the region named `name`?  A region owned by
    /// `p` takes precedence over an unowned one of the same name.
    fn player_in_region(&self, st: &GameState, p: Player, name: &str) -> bool {
        let region = self
            .regions
            .iter()
            .find(|r| r.name == name && r.owner == Some(p))
            .or_else(|| {
                self.regions
                    .iter()
                    .find(|r| r.name == name && r.owner.is_none())
            });
        let Some(region) = region else { return false };
        region
            .sites
            .iter()
            .any(|&s| st.occupants[s].is_some_and(|o| o.owner == p))
    }

    fn result_outcome(&self, subject: Player, result: EndResult) -> Outcome {
        let n = self.player_count as usize;
        match result {
            EndResult::Win => {
                let mut utilities = vec![-1i8; n];
                utilities[subject.index()] = 1;
                Outcome {
                    utilities,
                    exclusive_winner: Some(subject),
                }
            }
            EndResult::Loss => {
                // Compilation restricts Loss to 2-player games.
                let winner = self.next_player(subject);
                let mut utilities = vec![0i8; n];
                utilities[subject.index()] = -1;
                utilities[winner.index()] = 1;
                Outcome {
                    utilities,
                    exclusive_winner: Some(winner),
                }
            }
            EndResult::Draw => Outcome {
                utilities: vec![0; n],
                exclusive_winner: None,
            },
        }
    }

    /// Turn-limit resolution: a strict score maximum wins, otherwise draw.
    fn score_outcome(&self, st: &GameState) -> Outcome {
        let max = *st.scores.iter().max().expect("players exist");
        let leaders: Vec<usize> = (0..st.scores.len())
            .filter(|&p| st.scores[p] == max)
            .collect();
        if leaders.len() == 1 {
            self.result_outcome(Player::new(leaders[0] as u8 + 1), EndResult::Win)
        } else {
            Outcome {
                utilities: vec![0; st.scores.len()],
                exclusive_winner: None,
            }
        }
    }
}
