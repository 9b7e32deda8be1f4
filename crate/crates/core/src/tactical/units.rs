//! Per-unit tactical planning.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::engine::hex::{Coord, Owner};
use crate::engine::rules::{UnitClass, UnitKind};
use crate::engine::turn::hostile_at;
use crate::engine::{GameState, Unit};

use super::flavor::{Flavor, FlavorVector};
use super::zones::{Dominance, TacticalMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action")]
pub enum UnitAction {
    Move { to: Coord },
    Attack { target: Coord },
    Fortify,
    FoundCity,
    ImproveTile,
    Explore { to: Coord },
}

/// Military move families, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MoveKind {
    Attack,
    Advance,
    Defend,
    Fortify,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredMove {
    pub kind: MoveKind,
    pub score: f64,
    pub action: UnitAction,
}

/// Settlers look for sites at most this many steps away.
pub const SETTLE_SEARCH: u32 = 8;
/// Attacks below this estimated win chance are never considered.
pub const MIN_ATTACK_ODDS: f64 = 0.4;
/// Own strength over the summed enemy strength needed before advancing.
pub const ADVANCE_RATIO: f64 = 0.8;

pub fn plan_unit_turn(unit: &Unit, state: &GameState, map: &TacticalMap, flavors: &FlavorVector) -> UnitAction {
    match unit.kind {
        UnitKind::Scout => explore(unit, state),
        UnitKind::Settler => settle(unit, state, flavors),
        UnitKind::Worker => improve(unit, state),
        _ => best_military_move(unit, state, map, flavors).action,
    }
}

fn free(state: &GameState, unit: &Unit, c: Coord) -> bool {
    state.map.is_passable(c)
        && state.unit_at(c).is_none_or(|u| u.id == unit.id)
        && state.city_at(c).is_none_or(|x| x.owner == Owner::Player(unit.owner))
}

/// First step on a shortest path from the unit to the nearest tile
/// satisfying `goal`, walking through passable tiles. Other units only
/// block the first step. Returns the goal distance too.
pub fn step_toward(
    state: &GameState,
    unit: &Unit,
    limit: u32,
    goal: impl Fn(Coord) -> bool,
) -> Option<(Coord, u32)> {
    let n = state.map.len();
    let mut dist = vec![u32::MAX; n];
    let mut first: Vec<Option<Coord>> = vec![None; n];
    let start = state.tile_index(unit.at);
    dist[start] = 0;
    let mut queue = VecDeque::from([unit.at]);
    while let Some(c) = queue.pop_front() {
        let i = state.tile_index(c);
        if dist[i] >= limit {
            continue;
        }
        for nb in state.map.neighbors(c).collect::<Vec<_>>() {
            let j = state.tile_index(nb);
            if dist[j] != u32::MAX || !state.map.is_passable(nb) {
                continue;
            }
            if dist[i] == 0 && !free(state, unit, nb) {
                continue;
            }
            if state.city_at(nb).is_some_and(|x| x.owner != Owner::Player(unit.owner)) {
                continue;
            }
            dist[j] = dist[i] + 1;
            first[j] = first[i].or(Some(nb));
            if goal(nb) {
                return first[j].map(|f| (f, dist[j]));
            }
            queue.push_back(nb);
        }
    }
    None
}

fn unrevealed_in_sight(state: &GameState, unit: &Unit, at: Coord) -> usize {
    state
        .map
        .within(at, unit.kind.stats().sight)
        .into_iter()
        .filter(|c| !state.is_revealed(unit.owner, *c))
        .count()
}

fn explore(unit: &Unit, state: &GameState) -> UnitAction {
    let best = state
        .map
        .neighbors(unit.at)
        .filter(|c| free(state, unit, *c))
        .map(|c| (unrevealed_in_sight(state, unit, c), std::cmp::Reverse(c)))
        .max();
    if let Some((n, std::cmp::Reverse(to))) = best {
        if n > 0 {
            return UnitAction::Explore { to };
        }
    }
    let frontier = |c: Coord| state.map.neighbors(c).any(|n| !state.is_revealed(unit.owner, n));
    match step_toward(state, unit, u32::MAX, frontier) {
        Some((to, _)) => UnitAction::Explore { to },
        None => UnitAction::Fortify,
    }
}

/// Yield value of a prospective city site: the center and its ring as far
/// as the owner has revealed them.
pub fn site_value(state: &GameState, player: u8, at: Coord) -> i32 {
    state
        .map
        .within(at, 1)
        .into_iter()
        .filter(|c| state.is_revealed(player, *c))
        .filter_map(|c| state.map.tile(c))
        .map(|t| {
            let y = t.yields();
            3 * y.food + 2 * y.production + y.gold
        })
        .sum()
}

fn settle(unit: &Unit, state: &GameState, flavors: &FlavorVector) -> UnitAction {
    if flavors.get(Flavor::Expansion) == 0 {
        return UnitAction::Fortify;
    }
    let p = unit.owner;
    let dist = bfs_distances(state, unit, SETTLE_SEARCH);
    let best = state
        .map
        .coords()
        .filter(|c| dist[state.tile_index(*c)] != u32::MAX)
        .filter(|c| state.is_revealed(p, *c) && state.can_found_city(p, *c))
        .filter(|c| *c == unit.at || state.unit_at(*c).is_none())
        .map(|c| (site_value(state, p, c) - 3 * dist[state.tile_index(c)] as i32, std::cmp::Reverse(c)))
        .max();
    let Some((_, std::cmp::Reverse(site))) = best else {
        return UnitAction::Fortify;
    };
    if site == unit.at {
        return UnitAction::FoundCity;
    }
    match step_toward(state, unit, SETTLE_SEARCH, |c| c == site) {
        Some((to, _)) => UnitAction::Move { to },
        None => UnitAction::Fortify,
    }
}

fn bfs_distances(state: &GameState, unit: &Unit, limit: u32) -> Vec<u32> {
    let mut dist = vec![u32::MAX; state.map.len()];
    dist[state.tile_index(unit.at)] = 0;
    let mut queue = VecDeque::from([unit.at]);
    while let Some(c) = queue.pop_front() {
        let d = dist[state.tile_index(c)];
        if d >= limit {
            continue;
        }
        for nb in state.map.neighbors(c).collect::<Vec<_>>() {
            let j = state.tile_index(nb);
            if dist[j] == u32::MAX && free(state, unit, nb) {
                dist[j] = d + 1;
                queue.push_back(nb);
            }
        }
    }
    dist
}

fn improvable(state: &GameState, unit: &Unit, c: Coord) -> bool {
    state.map.tile(c).is_some_and(|t| {
        t.owner == Some(Owner::Player(unit.owner)) && !t.improved && t.terrain.improvement_bonus().is_some()
    })
}

fn improve(unit: &Unit, state: &GameState) -> UnitAction {
    if improvable(state, unit, unit.at) {
        return UnitAction::ImproveTile;
    }
    match step_toward(state, unit, 10, |c| improvable(state, unit, c) && state.unit_at(c).is_none()) {
        Some((to, _)) => UnitAction::Move { to },
        None => UnitAction::Fortify,
    }
}

/// Estimated win chance of attacking `target`, plus whether the expected
/// damage would finish it.
pub fn attack_odds(state: &GameState, unit: &Unit, target: Coord) -> Option<(f64, bool)> {
    let att = state.attack_strength(unit);
    let melee = unit.kind.class() != UnitClass::Ranged;
    let (def, hp, capturable) = if let Some(c) = state.city_at(target) {
        (state.city_strength(c), c.hp, melee)
    } else {
        let u = state.unit_at(target)?;
        (state.defense_strength(u), u.hp, true)
    };
    let r = att / def.max(0.5);
    let kills = capturable && crate::engine::combat::BASE_DAMAGE * r >= hp as f64;
    Some((r / (1.0 + r), kills))
}

/// Every scored military option for a unit, unsorted.
pub fn military_moves(unit: &Unit, state: &GameState, map: &TacticalMap, flavors: &FlavorVector) -> Vec<ScoredMove> {
    let offense = flavors.get(Flavor::Offense) as f64;
    let defense = flavors.get(Flavor::Defense) as f64;
    let p = unit.owner;
    let ps = &state.players[p as usize];
    let mut out = vec![ScoredMove { kind: MoveKind::Fortify, score: 1.0, action: UnitAction::Fortify }];

    let reach = unit.kind.stats().range.max(1);
    for t in state.map.within(unit.at, reach) {
        if t == unit.at || !state.is_visible(p, t) || !hostile_at(state, p, t) {
            continue;
        }
        let Some((odds, kills)) = attack_odds(state, unit, t) else { continue };
        if odds <= MIN_ATTACK_ODDS {
            continue;
        }
        let mut score = offense * (4.0 * odds - 1.0 + 1.5);
        if kills {
            score += 30.0;
        }
        if state.city_at(t).is_some() {
            score += 20.0 + map.zone_at(state, t).zone_value as f64 / 2.0;
        }
        out.push(ScoredMove { kind: MoveKind::Attack, score, action: UnitAction::Attack { target: t } });
    }

    // Units only push out once the army can match everyone we fight.
    let strong_enough = super::builtin::war_ratio(state, p).is_some_and(|r| r >= ADVANCE_RATIO);
    if strong_enough && offense > 0.0 {
        let targets: Vec<Coord> = state
            .cities
            .values()
            .filter(|c| c.owner.player().is_some_and(|o| ps.at_war_with(o)) && state.is_revealed(p, c.at))
            .map(|c| c.at)
            .collect();
        let staging = |c: Coord| targets.iter().any(|t| t.distance(c) <= reach) && state.unit_at(c).is_none();
        if !targets.is_empty() && !staging(unit.at) {
            if let Some((to, _)) = step_toward(state, unit, 24, staging) {
                out.push(ScoredMove { kind: MoveKind::Advance, score: offense * 1.5, action: UnitAction::Move { to } });
            }
        }
    }

    let home = state.player_cities(p).min_by_key(|c| (c.at.distance(unit.at), c.id));
    if let Some(home) = home {
        let zone = map.zone_at(state, home.at);
        let mut danger = 0.3 + (zone.enemy_strength as f64 / (zone.friendly_strength as f64 + 1.0)).min(3.0);
        if matches!(zone.dominance, Dominance::Enemy | Dominance::Contested) {
            danger += 0.5;
        }
        let mut score = defense * danger;
        if unit.at == home.at {
            score += defense * 0.5;
        }
        let action = if unit.at.distance(home.at) <= 1 {
            Some(UnitAction::Fortify)
        } else {
            let h = home.at;
            step_toward(state, unit, 24, |c| c.distance(h) <= 1 && state.unit_at(c).is_none())
                .map(|(to, _)| UnitAction::Move { to })
        };
        if let Some(action) = action {
            out.push(ScoredMove { kind: MoveKind::Defend, score, action });
        }
    }
    out
}

/// Highest score wins; ties prefer attack, then advance, defend, fortify.
pub fn best_military_move(unit: &Unit, state: &GameState, map: &TacticalMap, flavors: &FlavorVector) -> ScoredMove {
    military_moves(unit, state, map, flavors)
        .into_iter()
        .fold(None::<ScoredMove>, |best, m| match best {
            Some(b) if b.score > m.score || (b.score == m.score && b.kind <= m.kind) => Some(b),
            _ => Some(m),
        })
        .expect("fortify is always available")
}
