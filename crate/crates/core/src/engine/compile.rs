//! Compilation of parsed descriptions into [`GameSpec`] values.

use crate::parser::LudemeTree;

use super::{
    Board, CompileError, Direction, EndResult, EndRule, EvalTables, GameSpec, PieceType, PlayRule,
    Player, ProxTable, Region, Site, DEFAULT_TURN_LIMIT,
};

type Result<T> = std::result::Result<T, CompileError>;

fn invalid(msg: impl Into<String>) -> CompileError {
    CompileError::InvalidDescription(msg.into())
}

fn as_compound(node: &LudemeTree) -> Result<(&str, &[LudemeTree])> {
    match node {
        LudemeTree::Compound { head, args } => Ok((head.as_str(), args.as_slice())),
        other => Err(invalid(format!("expected a compound, found `{other}`"))),
    }
}

fn integer_arg(node: &LudemeTree, what: &str) -> Result<i64> {
    let n = node
        .as_number()
        .ok_or_else(|| invalid(format!("{what} must be a number")))?;
    if n.fract() != 0.0 || n.abs() > 1e9 {
        return Err(invalid(format!("{what} must be an integer, found {n}")));
    }
    Ok(n as i64)
}

fn player_keyword(node: &LudemeTree, player_count: u8) -> Result<Player> {
    let kw = node
        .as_keyword()
        .ok_or_else(|| invalid("expected a player keyword like P1"))?;
    let id = kw
        .strip_prefix('P')
        .and_then(|rest| rest.parse::<u8>().ok())
        .ok_or_else(|| invalid(format!("expected a player keyword like P1, found `{kw}`")))?;
    if id < 1 || id > player_count {
        return Err(invalid(format!(
            "player {kw} is out of range for a {player_count}-player game"
        )));
    }
    Ok(Player::new(id))
}

/// Resolve a `(sites ...)` form into an explicit site list.  `Empty` is not a
/// site list (it only appears as the add-move target) and is rejected here.
fn site_list(board: &Board, node: &LudemeTree) -> Result<Vec<Site>> {
    let (head, args) = as_compound(node)?;
    if head != "sites" {
        return Err(CompileError::UnsupportedLudeme(head.to_string()));
    }
    if args.len() != 1 {
        return Err(invalid("(sites ...) takes exactly one argument"));
    }
    let mut sites = match &args[0] {
        LudemeTree::Keyword(kw) => match kw.as_str() {
            "Top" => (0..board.cols)
                .map(|c| board.site(board.rows - 1, c))
                .collect(),
            "Bottom" => (0..board.cols).map(|c| board.site(0, c)).collect(),
            "Left" => (0..board.rows).map(|r| board.site(r, 0)).collect(),
            "Right" => (0..board.rows)
                .map(|r| board.site(r, board.cols - 1))
                .collect(),
            "Corners" => board.corners().to_vec(),
            "Centre" => board.centre().to_vec(),
            "All" => (0..board.site_count()).collect(),
            "Empty" => {
                return Err(invalid(
                    "(sites Empty) is only valid as the target of an add move",
                ))
            }
            other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
        },
        LudemeTree::List(items) => {
            let mut sites = Vec::with_capacity(items.len());
            for item in items {
                let s = integer_arg(item, "site index")?;
                if s < 0 || s as usize >= board.site_count() {
                    return Err(invalid(format!("site index {s} is out of range")));
                }
                sites.push(s as Site);
            }
            sites
        }
        other => return Err(invalid(format!("malformed site list `{other}`"))),
    };
    sites.sort_unstable();
    sites.dedup();
    if sites.is_empty() {
        return Err(invalid("site list is empty"));
    }
    Ok(sites)
}

struct Equipment {
    board: Board,
    piece_types: Vec<PieceType>,
    regions: Vec<Region>,
    map_pairs: Vec<(Player, Vec<Site>)>,
    has_site_maps: bool,
}

fn compile_board(node: &LudemeTree) -> Result<Board> {
    let (_, args) = as_compound(node)?;
    if args.len() != 1 {
        return Err(CompileError::InvalidBoard(
            "(board ...) takes exactly one shape".into(),
        ));
    }
    let (shape, shape_args) = as_compound(&args[0])?;
    let dim = |node: &LudemeTree, what: &str| -> Result<usize> {
        let v = integer_arg(node, what)?;
        if !(2..=32).contains(&v) {
            return Err(CompileError::InvalidBoard(format!(
                "{what} must be between 2 and 32, found {v}"
            )));
        }
        Ok(v as usize)
    };
    match shape {
        "square" => {
            if shape_args.len() != 1 {
                return Err(CompileError::InvalidBoard(
                    "(square k) takes one size".into(),
                ));
            }
            Ok(Board::square(dim(&shape_args[0], "square size")?))
        }
        "rectangle" => {
            if shape_args.len() != 2 {
                return Err(CompileError::InvalidBoard(
                    "(rectangle rows cols) takes two sizes".into(),
                ));
            }
            Ok(Board::rectangle(
                dim(&shape_args[0], "rectangle rows")?,
                dim(&shape_args[1], "rectangle cols")?,
            ))
        }
        other => Err(CompileError::UnsupportedLudeme(other.to_string())),
    }
}

fn compile_equipment(node: &LudemeTree, player_count: u8) -> Result<Equipment> {
    let (_, args) = as_compound(node)?;
    let items: &[LudemeTree] = match args {
        [LudemeTree::List(items)] => items,
        other => other,
    };
    let mut board = None;
    let mut piece_types: Vec<PieceType> = Vec::new();
    let mut regions: Vec<Region> = Vec::new();
    let mut map_pairs: Vec<(Player, Vec<Site>)> = Vec::new();
    let mut has_site_maps = false;

    // Pieces and boards are collected first so regions and maps can validate
    // sites against the board regardless of declaration order.
    for item in items {
        let (head, _) = as_compound(item)?;
        if head == "board" {
            if board.is_some() {
                return Err(CompileError::InvalidBoard(
                    "multiple boards declared".into(),
                ));
            }
            board = Some(compile_board(item)?);
        }
    }
    let board = board.ok_or(CompileError::MissingSection("board".into()))?;

    for item in items {
        let (head, item_args) = as_compound(item)?;
        match head {
            "board" => {}
            "piece" => {
                let name = item_args
                    .first()
                    .and_then(|a| a.as_str())
                    .ok_or_else(|| invalid("(piece ...) needs a quoted name"))?;
                let owner = player_keyword(
                    item_args
                        .get(1)
                        .ok_or_else(|| invalid("(piece ...) needs an owner"))?,
                    player_count,
                )?;
                let mut value = 1i64;
                for extra in &item_args[2..] {
                    let (ehead, eargs) = as_compound(extra)?;
                    match ehead {
                        "value" => {
                            if eargs.len() != 1 {
                                return Err(invalid("(value n) takes one number"));
                            }
                            value = integer_arg(&eargs[0], "piece value")?;
                        }
                        other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
                    }
                }
                if piece_types
                    .iter()
                    .any(|p| p.name == name && p.owner == owner)
                {
                    return Err(invalid(format!("duplicate piece `{name}` for {owner}")));
                }
                piece_types.push(PieceType {
                    name: name.to_string(),
                    owner,
                    value,
                });
            }
            "regions" => {
                let name = item_args
                    .first()
                    .and_then(|a| a.as_str())
                    .ok_or_else(|| invalid("(regions ...) needs a quoted name"))?;
                let (owner, sites_node) = match item_args.len() {
                    2 => (None, &item_args[1]),
                    3 => (
                        Some(player_keyword(&item_args[1], player_count)?),
                        &item_args[2],
                    ),
                    _ => return Err(invalid("(regions ...) takes a name, optional owner, sites")),
                };
                let sites = site_list(&board, sites_node)?;
                if regions.iter().any(|r| r.name == name && r.owner == owner) {
                    return Err(invalid(format!("duplicate region `{name}`")));
                }
                regions.push(Region {
                    name: name.to_string(),
                    owner,
                    sites,
                });
            }
            "map" => {
                has_site_maps = true;
                let pairs: &[LudemeTree] = match item_args {
                    [LudemeTree::List(items)] => items,
                    other => other,
                };
                for pair in pairs {
                    let (phead, pargs) = as_compound(pair)?;
                    if phead != "pair" {
                        return Err(CompileError::UnsupportedLudeme(phead.to_string()));
                    }
                    if pargs.len() != 2 {
                        return Err(invalid("(pair P sites) takes an owner and a site list"));
                    }
                    let p = player_keyword(&pargs[0], player_count)?;
                    if map_pairs.iter().any(|(q, _)| *q == p) {
                        return Err(invalid(format!("duplicate map entry for {p}")));
                    }
                    let sites = site_list(&board, &pargs[1])?;
                    map_pairs.push((p, sites));
                }
            }
            other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
        }
    }

    if piece_types.is_empty() {
        return Err(invalid("equipment declares no pieces"));
    }
    for id in 1..=player_count {
        let p = Player::new(id);
        if !piece_types.iter().any(|t| t.owner == p) {
            return Err(invalid(format!("player {p} has no piece type")));
        }
    }
    Ok(Equipment {
        board,
        piece_types,
        regions,
        map_pairs,
        has_site_maps,
    })
}

fn compile_directions(node: &LudemeTree) -> Result<Vec<Direction>> {
    let (head, args) = as_compound(node)?;
    if head != "directions" {
        return Err(CompileError::UnsupportedLudeme(head.to_string()));
    }
    let items: &[LudemeTree] = match args {
        [LudemeTree::List(items)] => items,
        other => other,
    };
    let mut dirs = Vec::new();
    for item in items {
        let kw = item
            .as_keyword()
            .ok_or_else(|| invalid("directions must be keywords"))?;
        match kw {
            "Forward" => dirs.push(Direction::Forward),
            "Backward" => dirs.push(Direction::Backward),
            "Left" => dirs.push(Direction::Left),
            "Right" => dirs.push(Direction::Right),
            "FL" => dirs.push(Direction::ForwardLeft),
            "FR" => dirs.push(Direction::ForwardRight),
            "BL" => dirs.push(Direction::BackwardLeft),
            "BR" => dirs.push(Direction::BackwardRight),
            "All" => dirs.extend(Direction::ALL),
            other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
        }
    }
    dirs.sort_unstable();
    dirs.dedup();
    if dirs.is_empty() {
        return Err(invalid("step rule has no directions"));
    }
    Ok(dirs)
}

fn compile_play(node: &LudemeTree) -> Result<PlayRule> {
    let (_, args) = as_compound(node)?;
    if args.len() != 1 {
        return Err(invalid("(play ...) takes exactly one move rule"));
    }
    let (head, margs) = as_compound(&args[0])?;
    if head != "move" {
        return Err(CompileError::UnsupportedLudeme(head.to_string()));
    }
    let kind = margs
        .first()
        .and_then(|a| a.as_keyword())
        .ok_or_else(|| invalid("(move ...) needs a move kind keyword"))?;
    match kind {
        "Add" => {
            // Exactly: (move Add (to (sites Empty)))
            if margs.len() != 2 {
                return Err(invalid("(move Add ...) takes a single (to ...) target"));
            }
            let (to_head, to_args) = as_compound(&margs[1])?;
            if to_head != "to" {
                return Err(CompileError::UnsupportedLudeme(to_head.to_string()));
            }
            match to_args {
                [LudemeTree::Compound { head, args }]
                    if head == "sites"
                        && args.len() == 1
                        && args[0].as_keyword() == Some("Empty") =>
                {
                    Ok(PlayRule::AddToEmpty)
                }
                _ => Err(invalid("add moves must target (sites Empty)")),
            }
        }
        "Step" => {
            let mut directions = None;
            let mut capture = false;
            for extra in &margs[1..] {
                let (ehead, eargs) = as_compound(extra)?;
                match ehead {
                    "directions" => {
                        if directions.is_some() {
                            return Err(invalid("step rule declares directions twice"));
                        }
                        directions = Some(compile_directions(extra)?);
                    }
                    "capture" => match eargs {
                        [kw] if kw.as_keyword() == Some("Replace") => capture = true,
                        _ => return Err(invalid("only (capture Replace) captures are supported")),
                    },
                    other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
                }
            }
            let directions =
                directions.ok_or_else(|| invalid("step rule needs (directions ...)"))?;
            Ok(PlayRule::StepMove {
                directions,
                capture,
            })
        }
        other => Err(CompileError::UnsupportedLudeme(other.to_string())),
    }
}

fn compile_end_result(node: &LudemeTree, player_count: u8) -> Result<Option<EndResult>> {
    let (head, args) = as_compound(node)?;
    match head {
        "result" => {
            let role = args
                .first()
                .and_then(|a| a.as_keyword())
                .ok_or_else(|| invalid("(result ...) needs a role"))?;
            if role != "Mover" {
                return Err(invalid(format!(
                    "only Mover results are supported, found `{role}`"
                )));
            }
            let verdict = args
                .get(1)
                .and_then(|a| a.as_keyword())
                .ok_or_else(|| invalid("(result Mover ...) needs a verdict"))?;
            let result = match verdict {
                "Win" => EndResult::Win,
                "Loss" => EndResult::Loss,
                "Draw" => EndResult::Draw,
                other => return Err(invalid(format!("unknown verdict `{other}`"))),
            };
            if result == EndResult::Loss && player_count > 2 {
                return Err(invalid("Loss results are only supported in 2-player games"));
            }
            Ok(Some(result))
        }
        "byScore" => Ok(None),
        other => Err(CompileError::UnsupportedLudeme(other.to_string())),
    }
}

fn compile_end_rule(node: &LudemeTree, player_count: u8, regions: &[Region]) -> Result<EndRule> {
    let (head, args) = as_compound(node)?;
    if head != "if" {
        return Err(CompileError::UnsupportedLudeme(head.to_string()));
    }
    if args.len() != 2 {
        return Err(invalid("(if cond result) takes a condition and a result"));
    }
    let (cond_head, cond_args) = as_compound(&args[0])?;
    let result = compile_end_result(&args[1], player_count)?;

    match cond_head {
        "is" => {
            let what = cond_args
                .first()
                .and_then(|a| a.as_keyword())
                .ok_or_else(|| invalid("(is ...) needs a condition keyword"))?;
            match what {
                "Line" => {
                    let length = integer_arg(
                        cond_args
                            .get(1)
                            .ok_or_else(|| invalid("(is Line n) needs a length"))?,
                        "line length",
                    )?;
                    if length < 2 {
                        return Err(invalid("line length must be at least 2"));
                    }
                    let result = result.ok_or_else(|| invalid("line rules need a Mover result"))?;
                    Ok(EndRule::LineOf {
                        length: length as u32,
                        result,
                    })
                }
                "In" => {
                    let region = cond_args
                        .get(1)
                        .and_then(|a| a.as_str())
                        .ok_or_else(|| invalid("(is In \"Region\") needs a region name"))?;
                    if !regions.iter().any(|r| r.name == region) {
                        return Err(invalid(format!("end rule names unknown region `{region}`")));
                    }
                    let result =
                        result.ok_or_else(|| invalid("region rules need a Mover result"))?;
                    Ok(EndRule::ReachRegion {
                        region: region.to_string(),
                        result,
                    })
                }
                "TurnLimit" => {
                    let turns = integer_arg(
                        cond_args
                            .get(1)
                            .ok_or_else(|| invalid("(is TurnLimit n) needs a turn count"))?,
                        "turn limit",
                    )?;
                    if turns < 1 {
                        return Err(invalid("turn limit must be at least 1"));
                    }
                    if result.is_some() {
                        return Err(invalid("turn limits resolve (byScore); ties draw"));
                    }
                    Ok(EndRule::TurnLimit {
                        turns: turns as u32,
                    })
                }
                other => Err(CompileError::UnsupportedLudeme(other.to_string())),
            }
        }
        "no" => match cond_args.first().and_then(|a| a.as_keyword()) {
            Some("Moves") => {
                let result = result.ok_or_else(|| invalid("no-moves rules need a result"))?;
                Ok(EndRule::NoMoves { result })
            }
            _ => Err(invalid("unknown (no ...) condition")),
        },
        other => Err(CompileError::UnsupportedLudeme(other.to_string())),
    }
}

fn compile_start(
    node: &LudemeTree,
    board: &Board,
    piece_types: &[PieceType],
    player_count: u8,
) -> Result<Vec<(usize, Site)>> {
    let (_, args) = as_compound(node)?;
    let items: &[LudemeTree] = match args {
        [LudemeTree::List(items)] => items,
        other => other,
    };
    let mut placements = Vec::new();
    let mut used = vec![false; board.site_count()];
    for item in items {
        let (head, pargs) = as_compound(item)?;
        if head != "place" {
            return Err(CompileError::UnsupportedLudeme(head.to_string()));
        }
        let name = pargs
            .first()
            .and_then(|a| a.as_str())
            .ok_or_else(|| invalid("(place ...) needs a piece name"))?;
        let owner = player_keyword(
            pargs
                .get(1)
                .ok_or_else(|| invalid("(place ...) needs an owner"))?,
            player_count,
        )?;
        let piece = piece_types
            .iter()
            .position(|t| t.name == name && t.owner == owner)
            .ok_or_else(|| invalid(format!("placement of unknown piece `{name}` for {owner}")))?;
        let sites = site_list(
            board,
            pargs
                .get(2)
                .ok_or_else(|| invalid("(place ...) needs a site list"))?,
        )?;
        for s in sites {
            if used[s] {
                return Err(invalid(format!("site {s} is placed twice")));
            }
            used[s] = true;
            placements.push((piece, s));
        }
    }
    Ok(placements)
}

fn prox_table(board: &Board, targets: &[Site]) -> ProxTable {
    if targets.is_empty() {
        return ProxTable {
            dist: vec![0; board.site_count()],
            dmax: 0,
            has_targets: false,
        };
    }
    let dist = board.distances_to(targets);
    let dmax = *dist.iter().max().expect("boards are non-empty");
    ProxTable {
        dist,
        dmax,
        has_targets: true,
    }
}

fn build_eval_tables(
    board: &Board,
    regions: &[Region],
    map_pairs: &[(Player, Vec<Site>)],
    line_target: Option<u32>,
    player_count: u8,
) -> EvalTables {
    let mut windows: Vec<Vec<Site>> = Vec::new();
    if let Some(len) = line_target {
        let len = len as usize;
        // Window enumeration order: direction-major (right, down, down-right,
        // down-left), then row-major start sites.
        for (dr, dc) in [(0i32, 1i32), (1, 0), (1, 1), (1, -1)] {
            for r in 0..board.rows {
                for c in 0..board.cols {
                    let end_r = r as i32 + dr * (len as i32 - 1);
                    let end_c = c as i32 + dc * (len as i32 - 1);
                    if end_r < 0
                        || end_c < 0
                        || end_r >= board.rows as i32
                        || end_c >= board.cols as i32
                    {
                        continue;
                    }
                    let window: Vec<Site> = (0..len)
                        .map(|i| {
                            let rr = (r as i32 + dr * i as i32) as usize;
                            let cc = (c as i32 + dc * i as i32) as usize;
                            board.site(rr, cc)
                        })
                        .collect();
                    windows.push(window);
                }
            }
        }
    }
    let mut site_windows = vec![Vec::new(); board.site_count()];
    for (wi, window) in windows.iter().enumerate() {
        for &s in window {
            site_windows[s].push(wi as u16);
        }
    }

    let unowned_union = {
        let mut sites: Vec<Site> = regions
            .iter()
            .filter(|r| r.owner.is_none())
            .flat_map(|r| r.sites.iter().copied())
            .collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    };
    let mut player_regions = Vec::new();
    let mut player_region_sites = Vec::new();
    let mut map_sites = Vec::new();
    for id in 1..=player_count {
        let p = Player::new(id);
        let mut sites: Vec<Site> = regions
            .iter()
            .filter(|r| r.owner == Some(p))
            .flat_map(|r| r.sites.iter().copied())
            .collect();
        sites.sort_unstable();
        sites.dedup();
        player_regions.push(prox_table(board, &sites));
        player_region_sites.push(sites);
        let mut mapped: Vec<Site> = map_pairs
            .iter()
            .filter(|(q, _)| *q == p)
            .flat_map(|(_, sites)| sites.iter().copied())
            .collect();
        mapped.sort_unstable();
        mapped.dedup();
        map_sites.push(mapped);
    }

    EvalTables {
        site_windows,
        corner: prox_table(board, board.corners()),
        sides: prox_table(board, board.edges()),
        centre: prox_table(board, board.centre()),
        unowned_regions: prox_table(board, &unowned_union),
        player_regions,
        player_region_sites,
        map_sites,
        windows,
    }
}

impl GameSpec {
    /// Compile a parsed description.  Descriptions using ludemes outside the
    /// supported subset fail with [`CompileError::UnsupportedLudeme`].
    pub fn compile(tree: &LudemeTree) -> Result<GameSpec> {
        let (head, args) = as_compound(tree)?;
        if head != "game" {
            return Err(invalid("description root must be (game ...)"));
        }
        let name = args
            .first()
            .and_then(|a| a.as_str())
            .ok_or_else(|| invalid("(game ...) needs a quoted name"))?
            .to_string();
        if name.is_empty() {
            return Err(invalid("game name is empty"));
        }
        let section = |want: &str| -> Result<&LudemeTree> {
            args[1..]
                .iter()
                .find(|a| a.head() == Some(want))
                .ok_or(CompileError::MissingSection(want.to_string()))
        };
        for extra in &args[1..] {
            let (h, _) = as_compound(extra)?;
            if !matches!(h, "players" | "equipment" | "rules") {
                return Err(CompileError::UnsupportedLudeme(h.to_string()));
            }
        }

        let players_args = section("players")?.args();
        if players_args.len() != 1 {
            return Err(invalid("(players n) takes one count"));
        }
        let player_count = integer_arg(&players_args[0], "player count")?;
        if !(2..=8).contains(&player_count) {
            return Err(invalid(format!(
                "player count must be between 2 and 8, found {player_count}"
            )));
        }
        let player_count = player_count as u8;

        let equipment = compile_equipment(section("equipment")?, player_count)?;

        let rules = section("rules")?;
        let (_, rule_args) = as_compound(rules)?;
        let mut play = None;
        let mut end_nodes = None;
        let mut start = Vec::new();
        let mut points_per_capture = None;
        for item in rule_args {
            let (h, iargs) = as_compound(item)?;
            match h {
                "play" => {
                    if play.is_some() {
                        return Err(invalid("multiple play rules declared"));
                    }
                    play = Some(compile_play(item)?);
                }
                "end" => {
                    if end_nodes.is_some() {
                        return Err(invalid("multiple end sections declared"));
                    }
                    end_nodes = Some(item);
                }
                "start" => {
                    start = compile_start(
                        item,
                        &equipment.board,
                        &equipment.piece_types,
                        player_count,
                    )?;
                }
                "scoring" => {
                    let (shead, sargs) = match iargs {
                        [one] => as_compound(one)?,
                        _ => return Err(invalid("(scoring ...) takes one rule")),
                    };
                    if shead != "capture" {
                        return Err(CompileError::UnsupportedLudeme(shead.to_string()));
                    }
                    if sargs.len() != 1 {
                        return Err(invalid("(capture n) takes one point value"));
                    }
                    points_per_capture = Some(integer_arg(&sargs[0], "capture points")?);
                }
                other => return Err(CompileError::UnsupportedLudeme(other.to_string())),
            }
        }
        let play_rule = play.ok_or(CompileError::MissingSection("play".to_string()))?;
        let end_nodes = end_nodes.ok_or(CompileError::MissingSection("end".to_string()))?;

        let (_, end_args) = as_compound(end_nodes)?;
        let end_items: &[LudemeTree] = match end_args {
            [LudemeTree::List(items)] => items,
            other => other,
        };
        if end_items.is_empty() {
            return Err(invalid("end section declares no rules"));
        }
        let mut end_rules = Vec::new();
        for item in end_items {
            end_rules.push(compile_end_rule(item, player_count, &equipment.regions)?);
        }

        let mut line_target = None;
        for rule in &end_rules {
            if let EndRule::LineOf { length, .. } = rule {
                match line_target {
                    None => line_target = Some(*length),
                    Some(t) if t == *length => {}
                    Some(_) => return Err(invalid("conflicting line lengths declared")),
                }
            }
        }
        if let Some(len) = line_target {
            let max_dim = equipment.board.rows.max(equipment.board.cols) as u32;
            if len > max_dim {
                return Err(invalid(format!("line length {len} does not fit the board")));
            }
        }

        let turn_limits: Vec<u32> = end_rules
            .iter()
            .filter_map(|r| match r {
                EndRule::TurnLimit { turns } => Some(*turns),
                _ => None,
            })
            .collect();
        if turn_limits.len() > 1 {
            return Err(invalid("multiple turn limits declared"));
        }
        let turn_limit = match turn_limits.first() {
            Some(&t) => t,
            None => {
                end_rules.push(EndRule::TurnLimit {
                    turns: DEFAULT_TURN_LIMIT,
                });
                DEFAULT_TURN_LIMIT
            }
        };

        if matches!(play_rule, PlayRule::StepMove { .. }) && start.is_empty() {
            return Err(invalid("step games need initial placements"));
        }

        let mut default_piece = Vec::new();
        for id in 1..=player_count {
            let p = Player::new(id);
            let idx = equipment
                .piece_types
                .iter()
                .position(|t| t.owner == p)
                .expect("validated above");
            default_piece.push(idx);
        }

        let has_no_moves_rule = end_rules
            .iter()
            .any(|r| matches!(r, EndRule::NoMoves { .. }));
        let eval = build_eval_tables(
            &equipment.board,
            &equipment.regions,
            &equipment.map_pairs,
            line_target,
            player_count,
        );
        if line_target.is_some() && eval.windows.is_empty() {
            return Err(invalid("line rule has no candidate windows"));
        }

        Ok(GameSpec {
            name,
            player_count,
            board: equipment.board,
            piece_types: equipment.piece_types,
            regions: equipment.regions,
            play_rule,
            end_rules,
            points_per_capture,
            line_target,
            start,
            has_site_maps: equipment.has_site_maps,
            eval,
            default_piece,
            has_no_moves_rule,
            turn_limit,
        })
    }
}
