use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::hex::{Coord, Owner};
use crate::engine::{CityId, EngineError, GameState, PlayerId};

/// Tiles farther than this from every known city fall into wilderness.
pub const ZONE_RADIUS: u32 = 4;

named_enum! {
    pub enum Dominance {
        Friendly,
        Neutral,
        Enemy,
        Contested,
    }
}

/// Dominance from summed strengths: a side dominates at 1.5x the other;
/// no forces at all is Neutral; anything else is Contested.
pub fn dominance(friendly: i64, enemy: i64) -> Dominance {
    if friendly == 0 && enemy == 0 {
        Dominance::Neutral
    } else if 2 * friendly >= 3 * enemy {
        Dominance::Friendly
    } else if 2 * enemy >= 3 * friendly {
        Dominance::Enemy
    } else {
        Dominance::Contested
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticalZone {
    pub id: usize,
    pub city: Option<CityId>,
    pub owner: Option<Owner>,
    pub dominance: Dominance,
    pub friendly_strength: i64,
    pub enemy_strength: i64,
    pub neutral_strength: i64,
    pub zone_value: i64,
    pub plots: usize,
    pub center: Coord,
    pub neighbors: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ZoneKey {
    City(CityId),
    Wild(u16),
}

/// Zone id of every tile, in tile-index order.
pub fn zone_assignment(state: &GameState, viewer: PlayerId) -> (Vec<usize>, Vec<(Option<CityId>, Coord)>) {
    let known: Vec<(CityId, Coord)> = state
        .cities
        .values()
        .filter(|c| c.owner == Owner::Player(viewer) || state.is_revealed(viewer, c.at))
        .map(|c| (c.id, c.at))
        .collect();
    let keys: Vec<ZoneKey> = state
        .map
        .coords()
        .map(|t| {
            known
                .iter()
                .map(|(id, at)| (at.distance(t), *id))
                .filter(|(d, _)| *d <= ZONE_RADIUS)
                .min()
                .map_or_else(|| ZoneKey::Wild(state.map.tile(t).expect("in map").area), |(_, id)| ZoneKey::City(id))
        })
        .collect();
    let distinct: BTreeSet<ZoneKey> = keys.iter().copied().collect();
    let index: BTreeMap<ZoneKey, usize> = distinct.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let meta = distinct
        .iter()
        .map(|k| match k {
            ZoneKey::City(id) => (Some(*id), state.cities[id].at),
            ZoneKey::Wild(_) => {
                let first = keys.iter().position(|x| x == k).expect("key occurs");
                (None, state.map.coord(first))
            }
        })
        .collect();
    (keys.iter().map(|k| index[k]).collect(), meta)
}

/// Zones plus the zone id of every tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TacticalMap {
    pub zones: Vec<TacticalZone>,
    pub tile_zone: Vec<usize>,
}

impl TacticalMap {
    pub fn zone_at(&self, state: &GameState, at: Coord) -> &TacticalZone {
        &self.zones[self.tile_zone[state.tile_index(at)]]
    }

    pub fn city_zone(&self, city: CityId) -> Option<&TacticalZone> {
        self.zones.iter().find(|z| z.city == Some(city))
    }
}

/// Partitions the map into tactical zones as seen by `viewer`. Only units
/// the viewer can currently see are counted.
pub fn compute_tactical_zones(state: &GameState, viewer: PlayerId) -> Result<Vec<TacticalZone>, EngineError> {
    tactical_map(state, viewer).map(|m| m.zones)
}

pub fn tactical_map(state: &GameState, viewer: PlayerId) -> Result<TacticalMap, EngineError> {
    let me = state.live_player(viewer)?;
    let (assign, meta) = zone_assignment(state, viewer);
    let mut zones: Vec<TacticalZone> = meta
        .iter()
        .enumerate()
        .map(|(id, (city, center))| {
            let c = city.map(|c| &state.cities[&c]);
            let zone_value = c.map_or(0, |c| {
                let capital = state.players.iter().any(|p| p.original_capital == c.id);
                c.population as i64 * 10 + c.buildings.len() as i64 * 5 + if capital { 20 } else { 0 }
            });
            TacticalZone {
                id,
                city: *city,
                owner: c.map(|c| c.owner),
                dominance: Dominance::Neutral,
                friendly_strength: 0,
                enemy_strength: 0,
                neutral_strength: 0,
                zone_value,
                plots: 0,
                center: *center,
                neighbors: Vec::new(),
            }
        })
        .collect();

    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); zones.len()];
    for (i, z) in assign.iter().enumerate() {
        zones[*z].plots += 1;
        for n in state.map.neighbors(state.map.coord(i)) {
            let nz = assign[state.map.index(n).expect("in map")];
            if nz != *z {
                adj[*z].insert(nz);
            }
        }
    }

    for u in state.units.values() {
        if u.owner != viewer && !state.is_visible(viewer, u.at) {
            continue;
        }
        let s = state.defense_strength(u).round() as i64;
        let z = &mut zones[assign[state.tile_index(u.at)]];
        if u.owner == viewer {
            z.friendly_strength += s;
        } else if me.at_war_with(u.owner) {
            z.enemy_strength += s;
        } else {
            z.neutral_strength += s;
        }
    }
    for z in zones.iter_mut() {
        let Some(c) = z.city.map(|c| &state.cities[&c]) else { continue };
        let s = state.city_strength(c).round() as i64;
        match c.owner {
            Owner::Player(o) if o == viewer => z.friendly_strength += s,
            Owner::Player(o) if me.at_war_with(o) => z.enemy_strength += s,
            _ => z.neutral_strength += s,
        }
    }
    for (z, n) in zones.iter_mut().zip(adj) {
        z.dominance = dominance(z.friendly_strength, z.enemy_strength);
        z.neighbors = n.into_iter().collect();
    }
    Ok(TacticalMap { zones, tile_zone: assign })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rule() {
        assert_eq!(dominance(49, 0), Dominance::Friendly);
        assert_eq!(dominance(30, 30), Dominance::Contested);
        assert_eq!(dominance(0, 0), Dominance::Neutral);
        assert_eq!(dominance(0, 5), Dominance::Enemy);
        assert_eq!(dominance(15, 10), Dominance::Friendly);
        assert_eq!(dominance(14, 10), Dominance::Contested);
        assert_eq!(dominance(10, 15), Dominance::Enemy);
    }
}
