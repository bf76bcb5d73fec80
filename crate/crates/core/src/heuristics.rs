//! The heuristic portfolio: 13 state features, each usable with either
//! sign, plus the Null baseline.
//!
//! Every heuristic defines a raw per-player value `raw(p) >= 0`; the value
//! of a state for player `p` is
//!
//! ```text
//! state_value(p) = sign * (raw(p) - mean of raw(q) over opponents q)
//! ```
//!
//! so state values always sum to zero across players.  The exact formulas
//! are workbench definitions, documented per variant below; raw values are
//! computed from integer accumulators and converted to floats at the end,
//! which keeps them independent of move-application order.

use thiserror::Error;

use crate::engine::{GameSpec, GameState, Player, ProxTable};

/// The 14 heuristic kinds, in canonical portfolio order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum HeuristicKind {
    /// Total piece count held by the player.
    Material,
    /// Legal move count (a forced pass counts as one move).
    Mobility,
    /// Number of distinct destination sites among the player's moves.
    Influence,
    /// Piece-weighted closeness to the nearest corner.
    CornerProximity,
    /// Piece-weighted closeness to the board perimeter.
    SidesProximity,
    /// Sum over open line windows of (pieces in window / window length)^2.
    LineCompletion,
    /// Piece-weighted closeness to the centre block.
    CentreProximity,
    /// Piece-weighted closeness to unowned regions.
    RegionProximity,
    /// Pieces sitting in the player's owned regions (any owner's pieces).
    OwnRegionsCount,
    /// Piece-weighted closeness to the player's owned regions.
    PlayerRegionsProximity,
    /// Pieces sitting on the player's site-map targets (any owner's pieces).
    PlayerSiteMapCount,
    /// Current score.
    Score,
    /// Total piece value held by the player.
    ComponentValues,
    /// Constant zero baseline.
    Null,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 14] = [
        HeuristicKind::Material,
        HeuristicKind::Mobility,
        HeuristicKind::Influence,
        HeuristicKind::CornerProximity,
        HeuristicKind::SidesProximity,
        HeuristicKind::LineCompletion,
        HeuristicKind::CentreProximity,
        HeuristicKind::RegionProximity,
        HeuristicKind::OwnRegionsCount,
        HeuristicKind::PlayerRegionsProximity,
        HeuristicKind::PlayerSiteMapCount,
        HeuristicKind::Score,
        HeuristicKind::ComponentValues,
        HeuristicKind::Null,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Material => "Material",
            HeuristicKind::Mobility => "Mobility",
            HeuristicKind::Influence => "Influence",
            HeuristicKind::CornerProximity => "CornerProximity",
            HeuristicKind::SidesProximity => "SidesProximity",
            HeuristicKind::LineCompletion => "LineCompletion",
            HeuristicKind::CentreProximity => "CentreProximity",
            HeuristicKind::RegionProximity => "RegionProximity",
            HeuristicKind::OwnRegionsCount => "OwnRegionsCount",
            HeuristicKind::PlayerRegionsProximity => "PlayerRegionsProximity",
            HeuristicKind::PlayerSiteMapCount => "PlayerSiteMapCount",
            HeuristicKind::Score => "Score",
            HeuristicKind::ComponentValues => "ComponentValues",
            HeuristicKind::Null => "Null",
        }
    }

    pub fn from_name(name: &str) -> Option<HeuristicKind> {
        HeuristicKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
    }
}

/// Sign applied to a heuristic's state value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Sign> {
        match s {
            "+" => Some(Sign::Plus),
            "-" => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// A signed heuristic.  `Null` is always normalized to the positive sign
/// (its value is identically zero).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    pub sign: Sign,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind, sign: Sign) -> HeuristicSpec {
        let sign = if kind == HeuristicKind::Null {
            Sign::Plus
        } else {
            sign
        };
        HeuristicSpec { kind, sign }
    }

    pub fn null() -> HeuristicSpec {
        HeuristicSpec::new(HeuristicKind::Null, Sign::Plus)
    }

    /// Display label, e.g. `Material+` or `Null`.
    pub fn label(&self) -> String {
        if self.kind == HeuristicKind::Null {
            "Null".to_string()
        } else {
            format!("{}{}", self.kind.name(), self.sign.symbol())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeuristicError {
    #[error("heuristic {kind:?} is not applicable to game `{game}`")]
    NotApplicable { kind: HeuristicKind, game: String },
}

/// Is the heuristic meaningful for this game?
///
/// * `LineCompletion` needs a line end rule.
/// * `RegionProximity` needs at least one unowned region.
/// * `OwnRegionsCount` / `PlayerRegionsProximity` need at least one owned
///   region.
/// * `PlayerSiteMapCount` needs a site map.
/// * `Score` needs a scoring rule.
/// * `ComponentValues` needs a piece type whose value differs from 1.
/// * Everything else (including `Null`) is always applicable.
pub fn applicable(kind: HeuristicKind, spec: &GameSpec) -> bool {
    match kind {
        HeuristicKind::LineCompletion => spec.line_target.is_some(),
        HeuristicKind::RegionProximity => spec.regions.iter().any(|r| r.owner.is_none()),
        HeuristicKind::OwnRegionsCount | HeuristicKind::PlayerRegionsProximity => {
            spec.regions.iter().any(|r| r.owner.is_some())
        }
        HeuristicKind::PlayerSiteMapCount => spec.has_site_maps,
        HeuristicKind::Score => spec.points_per_capture.is_some(),
        HeuristicKind::ComponentValues => spec.piece_types.iter().any(|t| t.value != 1),
        _ => true,
    }
}

/// Piece-weighted proximity: sum over the player's pieces of
/// `count * (dmax - dist(site)) / dmax`.  With a single target distance
/// class (`dmax == 0`) every piece weighs 1; with no targets the value is 0.
fn proximity(table: &ProxTable, accumulated: u64, piece_count: u32) -> f64 {
    if !table.has_targets {
        0.0
    } else if table.dmax == 0 {
        piece_count as f64
    } else {
        accumulated as f64 / table.dmax as f64
    }
}

/// Raw non-negative value of `kind` for `player`.  Errors when the
/// heuristic is not applicable to the game.
pub fn raw_value(
    kind: HeuristicKind,
    spec: &GameSpec,
    st: &GameState,
    player: Player,
) -> Result<f64, HeuristicError> {
    if !applicable(kind, spec) {
        return Err(HeuristicError::NotApplicable {
            kind,
            game: spec.name.clone(),
        });
    }
    let p = player.index();
    let value = match kind {
        HeuristicKind::Material => st.piece_count[p] as f64,
        HeuristicKind::Mobility => spec.mobility(st, player) as f64,
        HeuristicKind::Influence => spec.influence(st, player) as f64,
        HeuristicKind::CornerProximity => {
            proximity(&spec.eval.corner, st.prox_corner[p], st.piece_count[p])
        }
        HeuristicKind::SidesProximity => {
            proximity(&spec.eval.sides, st.prox_sides[p], st.piece_count[p])
        }
        HeuristicKind::CentreProximity => {
            proximity(&spec.eval.centre, st.prox_centre[p], st.piece_count[p])
        }
        HeuristicKind::RegionProximity => proximity(
            &spec.eval.unowned_regions,
            st.prox_region[p],
            st.piece_count[p],
        ),
        HeuristicKind::PlayerRegionsProximity => proximity(
            &spec.eval.player_regions[p],
            st.prox_player_regions[p],
            st.piece_count[p],
        ),
        HeuristicKind::LineCompletion => {
            let len = spec.line_target.expect("applicability checked") as f64;
            st.line_sq[p] as f64 / (len * len)
        }
        HeuristicKind::OwnRegionsCount => spec.eval.player_region_sites[p]
            .iter()
            .map(|&s| st.occupants[s].map_or(0, |o| o.count as u64))
            .sum::<u64>() as f64,
        HeuristicKind::PlayerSiteMapCount => spec.eval.map_sites[p]
            .iter()
            .map(|&s| st.occupants[s].map_or(0, |o| o.count as u64))
            .sum::<u64>() as f64,
        HeuristicKind::Score => st.scores[p] as f64,
        HeuristicKind::ComponentValues => st.material[p] as f64,
        HeuristicKind::Null => 0.0,
    };
    Ok(value)
}

/// Signed, opponent-relative value of the state for `player`:
/// `sign * (raw(player) - mean raw(opponent))`.  `Null` is exactly 0.
pub fn state_value(
    h: HeuristicSpec,
    spec: &GameSpec,
    st: &GameState,
    player: Player,
) -> Result<f64, HeuristicError> {
    if h.kind == HeuristicKind::Null {
        return Ok(0.0);
    }
    let own = raw_value(h.kind, spec, st, player)?;
    let mut opponents = 0.0;
    for q in spec.players() {
        if q != player {
            opponents += raw_value(h.kind, spec, st, q)?;
        }
    }
    let mean_opp = opponents / (spec.player_count as f64 - 1.0);
    Ok(h.sign.factor() * (own - mean_opp))
}
