use std::collections::BTreeMap;

use super::hex::{Coord, HexMap, Owner, Terrain};
use super::rules::{Building, UnitKind};
use super::state::*;
use super::EngineError;
use crate::data::tables;
use crate::strategy::{GrandStrategy, StrategySet};

pub const CITY_STATE_NAMES: [&str; 2] = ["Kessa", "Orlin"];

const TERRAIN_WEIGHTS: [(Terrain, u32); 7] = [
    (Terrain::Grassland, 30),
    (Terrain::Plains, 25),
    (Terrain::Forest, 15),
    (Terrain::Hills, 12),
    (Terrain::Desert, 6),
    (Terrain::Tundra, 5),
    (Terrain::Mountain, 7),
];

/// Builds the turn-0 state. Everything random is drawn from `config.seed`.
pub fn new_game(config: GameConfig) -> Result<GameState, EngineError> {
    config.validate()?;
    let mut rng = GameRng::new(config.seed);
    let (w, h) = (config.map_width, config.map_height);

    let mut map = HexMap::filled(w, h, Terrain::Coast);
    let total: u32 = TERRAIN_WEIGHTS.iter().map(|(_, wt)| wt).sum();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut roll = rng.below(total as usize) as u32;
            let terrain = TERRAIN_WEIGHTS
                .iter()
                .find(|(_, wt)| {
                    if roll < *wt {
                        true
                    } else {
                        roll -= wt;
                        false
                    }
                })
                .map(|(t, _)| *t)
                .expect("weights cover the roll");
            map.tile_mut(Coord::new(x, y)).expect("interior").terrain = terrain;
        }
    }

    let n = config.player_count;
    let spots = ring_spots(w, h, n, 0.30, 45.0);
    let cs_spots: Vec<Coord> = {
        let step = 360.0 / n as f64;
        let ring = ring_spots(w, h, n, 0.36, 45.0 + step / 2.0);
        vec![ring[0], ring[n / 2]]
    };
    for c in spots.iter().chain(&cs_spots) {
        clear_site(&mut map, *c);
    }
    for c in spots.iter().skip(1).chain(&cs_spots) {
        connect(&mut map, spots[0], *c);
    }
    map.recompute_areas();

    let mut seats: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut seats);

    let pool = config.archetype_pool_size;
    let archetypes: Vec<usize> = if pool >= n {
        let mut all: Vec<usize> = (0..pool).collect();
        rng.shuffle(&mut all);
        all.truncate(n);
        all
    } else {
        (0..n).map(|_| rng.below(pool)).collect()
    };

    let tiles = map.len();
    let players = (0..n)
        .map(|i| {
            let arch = &tables().archetypes[archetypes[i]];
            let grand = GrandStrategy::ALL
                .iter()
                .copied()
                .max_by_key(|g| (arch.grand_bias[g.index()], std::cmp::Reverse(g.index())))
                .expect("non-empty");
            PlayerState {
                id: i as PlayerId,
                archetype: archetypes[i],
                alive: true,
                original_capital: 0,
                eliminated_turn: None,
                treasury: 0,
                gold_rate: 0,
                science_rate: 0,
                culture_rate: 0,
                culture_stock: 0,
                culture_total: 0,
                faith: 0,
                faith_rate: 0,
                tourism_rate: 0,
                tourism_to: vec![0; n],
                happiness: 0,
                techs_known: Default::default(),
                research: None,
                research_progress: 0,
                policies_adopted: Vec::new(),
                ideology: None,
                delegates: 0,
                spaceship_parts: 0,
                diplomacy: vec![Relation::default(); n],
                influence: vec![0; cs_spots.len()],
                flavors: arch.flavors,
                strategy: StrategySet::new(grand),
                persona: arch.persona,
                next_research: None,
                next_policy: None,
                revealed: TileSet::new(tiles),
                visible: TileSet::new(tiles),
            }
        })
        .collect();

    let mut state = GameState {
        config,
        turn: 0,
        map,
        players,
        cities: BTreeMap::new(),
        units: BTreeMap::new(),
        city_states: Vec::new(),
        event_log: Vec::new(),
        rng,
        victory: None,
        world_leader: None,
        next_city_id: 0,
        next_unit_id: 0,
    };

    for (k, at) in cs_spots.iter().enumerate() {
        let id = state.found_city(Owner::CityState(k as u8), *at, CITY_STATE_NAMES[k % 2].to_string());
        let city = state.cities.get_mut(&id).expect("just founded");
        city.population = 3;
        city.buildings.insert(Building::Walls);
        city.hp = city.max_hp();
        state.city_states.push(CityStateInfo { id: k as u8, name: city.name.clone(), city: id, patron: None });
    }
    for p in 0..n {
        let at = spots[seats[p]];
        let name = tables().archetypes[state.players[p].archetype].cities[0].clone();
        let capital = state.found_city(Owner::Player(p as PlayerId), at, name);
        state.players[p].original_capital = capital;
        for kind in [UnitKind::Warrior, UnitKind::Scout] {
            let spot = state.free_spawn_tile(at).ok_or(EngineError::InvalidConfig {
                field: "map_width",
                reason: "no room for starting units".into(),
            })?;
            state.spawn_unit(p as PlayerId, kind, spot);
        }
    }
    for p in 0..n {
        state.refresh_visibility(p as PlayerId);
    }
    Ok(state)
}

/// `n` points on an ellipse around the map center, starting at `offset_deg`.
fn ring_spots(w: i32, h: i32, n: usize, radius: f64, offset_deg: f64) -> Vec<Coord> {
    let (cx, cy) = ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0);
    (0..n)
        .map(|k| {
            let a = (offset_deg + 360.0 * k as f64 / n as f64).to_radians();
            let x = (cx + radius * w as f64 * a.cos()).round() as i32;
            let y = (cy + radius * h as f64 * a.sin()).round() as i32;
            Coord::new(x.clamp(2, w - 3), y.clamp(2, h - 3))
        })
        .collect()
}

fn clear_site(map: &mut HexMap, at: Coord) {
    if let Some(t) = map.tile_mut(at) {
        t.terrain = Terrain::Plains;
    }
    for n in at.neighbors() {
        if let Some(t) = map.tile_mut(n) {
            if t.terrain == Terrain::Mountain {
                t.terrain = Terrain::Hills;
            }
        }
    }
}

/// Carves a passable line from `a` to `b` if `b` is not already reachable.
fn connect(map: &mut HexMap, a: Coord, b: Coord) {
    let i = map.index(b).expect("in map");
    if map.distance_field(a)[i] != u32::MAX {
        return;
    }
    let mut cur = a;
    while cur != b {
        cur = map
            .neighbors(cur)
            .min_by_key(|n| (n.distance(b), *n))
            .expect("neighbors exist");
        let t = map.tile_mut(cur).expect("in map");
        if !t.terrain.is_passable() {
            t.terrain = Terrain::Hills;
        }
    }
}
