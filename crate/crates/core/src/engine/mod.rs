//! Compiler and rules engine for the supported game-description subset.
//!
//! [`GameSpec::compile`] turns a parsed [`LudemeTree`](crate::parser::LudemeTree)
//! into an executable specification: a rectangular board, per-player piece
//! types, optional regions and site maps, one play rule (add-to-empty or
//! directional stepping with capture-by-replacement) and an ordered list of
//! end rules.  [`GameState`] values are immutable from the caller's point of
//! view: applying a move returns a fresh state.
//!
//! Descriptions using ludemes outside the subset (sowing, dice, tracks, ...)
//! compile to [`CompileError::UnsupportedLudeme`]; they still parse and
//! contribute ludeme features.

mod board;
mod compile;
mod corpus;
mod playout;
mod state;

pub use board::Board;
pub use corpus::{load_corpus, read_manifest, CorpusEntry, CorpusError, ManifestEntry};
pub use playout::{playout, sample_states, Playout};
pub use state::{GameState, Outcome};

use thiserror::Error;

/// Board site index in row-major order: `site = row * cols + col`.
pub type Site = usize;

/// 1-based player identifier (`P1` is `Player::new(1)`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Player(u8);

impl Player {
    pub fn new(id: u8) -> Player {
        assert!(id >= 1, "player ids are 1-based");
        Player(id)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// 0-based index for table lookups.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// A piece stack on a site.  The shipped subset always uses `count == 1`,
/// but counts are carried so material totals stay meaningful.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Occupant {
    pub owner: Player,
    /// Index into [`GameSpec::piece_types`].
    pub piece: u16,
    pub count: u16,
}

/// A move in a game.  `Pass` is legal exactly when the mover has no
/// rule-generated move and no no-moves end rule exists.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Move {
    Add { to: Site },
    Step { from: Site, to: Site, capture: bool },
    Pass,
}

/// Step directions relative to the moving player's facing.  Player 1 faces
/// increasing rows; every other player faces decreasing rows (the board is
/// rotated 180 degrees from their perspective).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Direction {
    Forward,
    ForwardLeft,
    ForwardRight,
    Left,
    Right,
    Backward,
    BackwardLeft,
    BackwardRight,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Forward,
        Direction::ForwardLeft,
        Direction::ForwardRight,
        Direction::Left,
        Direction::Right,
        Direction::Backward,
        Direction::BackwardLeft,
        Direction::BackwardRight,
    ];

    /// (row, col) offset for a player facing increasing rows.  "Left" is the
    /// lower-column side from that facing.
    pub(crate) fn base_offset(self) -> (i32, i32) {
        match self {
            Direction::Forward => (1, 0),
            Direction::ForwardLeft => (1, -1),
            Direction::ForwardRight => (1, 1),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
            Direction::Backward => (-1, 0),
            Direction::BackwardLeft => (-1, -1),
            Direction::BackwardRight => (-1, 1),
        }
    }
}

/// The single play rule of a game.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PlayRule {
    /// The mover places one of their default pieces on any empty site.
    AddToEmpty,
    /// The mover steps one of their pieces one site along an allowed
    /// direction; with `capture` the destination may hold an enemy piece,
    /// which is replaced.
    StepMove {
        directions: Vec<Direction>,
        capture: bool,
    },
}

/// Result attached to a triggered end condition, from the subject's
/// perspective.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EndResult {
    Win,
    Loss,
    Draw,
}

/// End rules, checked in description order after every move.
#[derive(Clone, PartialEq, Debug)]
pub enum EndRule {
    /// A player holds `length` contiguous sites along a row, column or
    /// diagonal.
    LineOf { length: u32, result: EndResult },
    /// The player to move has no rule-generated move.
    NoMoves { result: EndResult },
    /// The last mover occupies a site of the named region (their own copy if
    /// the region is owned, otherwise the unowned one).
    ReachRegion { region: String, result: EndResult },
    /// The turn counter reached the limit: highest score wins, ties draw.
    TurnLimit { turns: u32 },
}

/// Piece type declared in the equipment section.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PieceType {
    pub name: String,
    pub owner: Player,
    pub value: i64,
}

/// Named region, optionally owned by a player.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Region {
    pub name: String,
    pub owner: Option<Player>,
    pub sites: Vec<Site>,
}

/// Per-site distance table used by proximity heuristics: `weight(site) =
/// (dmax - dist[site]) / dmax` when there are targets and `dmax > 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProxTable {
    pub dist: Vec<u32>,
    pub dmax: u32,
    pub has_targets: bool,
}

/// Precomputed lookup tables for evaluation and end-rule checks.
#[derive(Clone, PartialEq, Debug)]
pub struct EvalTables {
    /// Every straight window of `line_target` sites (rows, columns, both
    /// diagonals).  Empty when the game has no line rule.
    pub windows: Vec<Vec<Site>>,
    /// Windows containing each site.
    pub site_windows: Vec<Vec<u16>>,
    pub corner: ProxTable,
    pub sides: ProxTable,
    pub centre: ProxTable,
    /// Union of unowned region sites.
    pub unowned_regions: ProxTable,
    /// Per player: distances to the union of that player's owned regions.
    pub player_regions: Vec<ProxTable>,
    /// Per player: sorted, deduplicated union of owned-region sites.
    pub player_region_sites: Vec<Vec<Site>>,
    /// Per player: sorted, deduplicated site-map targets.
    pub map_sites: Vec<Vec<Site>>,
}

/// Errors from compiling a description into a playable game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("unsupported ludeme `{0}`")]
    UnsupportedLudeme(String),
    #[error("missing section `{0}`")]
    MissingSection(String),
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("invalid description: {0}")]
    InvalidDescription(String),
}

/// Errors from driving a compiled game.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("illegal move {0:?}")]
    IllegalMove(Move),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// A compiled, playable game.
#[derive(Clone, PartialEq, Debug)]
pub struct GameSpec {
    pub name: String,
    pub player_count: u8,
    pub board: Board,
    pub piece_types: Vec<PieceType>,
    pub regions: Vec<Region>,
    pub play_rule: PlayRule,
    pub end_rules: Vec<EndRule>,
    /// Points credited to the mover per captured piece, when a scoring rule
    /// is present.
    pub points_per_capture: Option<i64>,
    /// Line length of the line end rule, if any.
    pub line_target: Option<u32>,
    /// Initial placements: (piece type index, site).
    pub start: Vec<(usize, Site)>,
    /// True when the description declared a site map.
    pub has_site_maps: bool,
    pub eval: EvalTables,
    /// Per player: piece type placed by add moves (first declared type).
    pub(crate) default_piece: Vec<usize>,
    pub(crate) has_no_moves_rule: bool,
    /// Effective turn limit (a default of 150 is appended when the
    /// description has no explicit limit).
    pub turn_limit: u32,
}

impl GameSpec {
    pub fn players(&self) -> impl Iterator<Item = Player> {
        (1..=self.player_count).map(Player::new)
    }

    pub fn next_player(&self, p: Player) -> Player {
        Player::new(p.id() % self.player_count + 1)
    }

    /// The effective turn limit, including the implicit default of 150.
    pub fn turn_limit(&self) -> u32 {
        self.turn_limit
    }

    pub fn has_no_moves_rule(&self) -> bool {
        self.has_no_moves_rule
    }

    /// Piece type placed by the player's add moves.
    pub fn default_piece(&self, p: Player) -> usize {
        self.default_piece[p.index()]
    }
}

pub(crate) const DEFAULT_TURN_LIMIT: u32 = 150;
