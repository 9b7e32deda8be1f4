use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::events::Event;
use super::hex::{Coord, HexMap, Owner};
use super::rules::{Building, Ideology, Policy, Producible, Tech, UnitKind};
use super::EngineError;
use crate::strategy::{Persona, StrategySet};
use crate::tactical::FlavorVector;

pub type CityId = u32;
pub type UnitId = u32;
pub type PlayerId = u8;

pub const MAX_PLAYERS: usize = 8;

named_enum! {
    pub enum VictoryKind {
        Domination,
        Science,
        Cultural,
        Diplomatic,
        Time,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub map_width: i32,
    pub map_height: i32,
    pub player_count: usize,
    pub max_turns: u32,
    pub archetype_pool_size: usize,
    pub victory_toggles: BTreeSet<VictoryKind>,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            map_width: 16,
            map_height: 16,
            player_count: 4,
            max_turns: 200,
            archetype_pool_size: 8,
            victory_toggles: VictoryKind::ALL.iter().copied().collect(),
            seed: 0,
        }
    }
}

impl GameConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |field: &'static str, reason: String| Err(EngineError::InvalidConfig { field, reason });
        if self.player_count < 2 {
            return bad("player_count", format!("{} is below the minimum of 2", self.player_count));
        }
        if self.player_count > MAX_PLAYERS {
            return bad("player_count", format!("{} exceeds the maximum of {MAX_PLAYERS}", self.player_count));
        }
        if self.max_turns < 1 {
            return bad("max_turns", "must be at least 1".into());
        }
        for (field, v) in [("map_width", self.map_width), ("map_height", self.map_height)] {
            if !(10..=64).contains(&v) {
                return bad(field, format!("{v} is outside [10, 64]"));
            }
        }
        let pool = crate::data::tables().archetypes.len();
        if self.archetype_pool_size < 1 || self.archetype_pool_size > pool {
            return bad("archetype_pool_size", format!("{} is outside [1, {pool}]", self.archetype_pool_size));
        }
        Ok(())
    }

    pub fn enabled(&self, kind: VictoryKind) -> bool {
        self.victory_toggles.contains(&kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VictoryResult {
    pub winner: PlayerId,
    pub kind: VictoryKind,
    pub turn: u32,
}

named_enum! {
    pub enum Stance {
        War,
        Hostile,
        Neutral,
        Friendly,
    }
}

/// One player's view of one opponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub met: bool,
    pub stance: Stance,
    pub opinion: i32,
    pub war_since: Option<u32>,
    /// No war may be declared before this turn.
    pub peace_until: u32,
}

impl Default for Relation {
    fn default() -> Self {
        Self { met: false, stance: Stance::Neutral, opinion: 0, war_since: None, peace_until: 0 }
    }
}

/// Fixed-size tile bitset, serialized as a hex string.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TileSet(Vec<u64>);

impl TileSet {
    pub fn new(tiles: usize) -> Self {
        Self(vec![0; tiles.div_ceil(64)])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    /// Returns true if the bit was newly set.
    pub fn insert(&mut self, i: usize) -> bool {
        let w = &mut self.0[i / 64];
        let was = *w >> (i % 64) & 1 == 1;
        *w |= 1 << (i % 64);
        !was
    }

    pub fn clear(&mut self) {
        self.0.iter_mut().for_each(|w| *w = 0);
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl Serialize for TileSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text: String = self.0.iter().map(|w| format!("{w:016x}")).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for TileSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text.len() % 16 != 0 || !text.is_ascii() {
            return Err(serde::de::Error::custom("tile set length must be a multiple of 16 hex digits"));
        }
        (0..text.len() / 16)
            .map(|i| u64::from_str_radix(&text[i * 16..i * 16 + 16], 16).map_err(serde::de::Error::custom))
            .collect::<Result<_, _>>()
            .map(TileSet)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub id: PlayerId,
    pub archetype: usize,
    pub alive: bool,
    pub original_capital: CityId,
    pub eliminated_turn: Option<u32>,

    pub treasury: i32,
    pub gold_rate: i32,
    pub science_rate: i32,
    pub culture_rate: i32,
    /// Culture banked toward the next policy.
    pub culture_stock: i32,
    pub culture_total: i32,
    pub faith: i32,
    pub faith_rate: i32,
    pub tourism_rate: i32,
    /// Cumulative tourism exported to each player (indexed by player id).
    pub tourism_to: Vec<i32>,
    pub happiness: i32,

    pub techs_known: BTreeSet<Tech>,
    pub research: Option<Tech>,
    pub research_progress: i32,
    pub policies_adopted: Vec<Policy>,
    pub ideology: Option<Ideology>,
    pub delegates: u32,
    pub spaceship_parts: u32,

    /// Relations toward every player, indexed by player id (self entry unused).
    pub diplomacy: Vec<Relation>,
    /// Influence with each city-state, in tenths of a point.
    pub influence: Vec<i32>,

    pub flavors: FlavorVector,
    pub strategy: StrategySet,
    pub persona: Persona,
    pub next_research: Option<Tech>,
    pub next_policy: Option<super::rules::PolicyChoice>,

    pub revealed: TileSet,
    pub visible: TileSet,
}

impl PlayerState {
    pub fn policy_count(&self) -> usize {
        self.policies_adopted.len() + usize::from(self.ideology.is_some())
    }

    pub fn at_war_with(&self, other: PlayerId) -> bool {
        self.diplomacy.get(other as usize).is_some_and(|r| r.stance == Stance::War)
    }

    pub fn wars(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.diplomacy
            .iter()
            .enumerate()
            .filter(|(_, r)| r.stance == Stance::War)
            .map(|(i, _)| i as PlayerId)
    }

    pub fn has_met(&self, other: PlayerId) -> bool {
        other == self.id || self.diplomacy.get(other as usize).is_some_and(|r| r.met)
    }

    pub fn has_policy(&self, p: Policy) -> bool {
        self.policies_adopted.contains(&p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct City {
    pub id: CityId,
    pub name: String,
    pub owner: Owner,
    pub original_owner: Owner,
    pub at: Coord,
    pub population: u32,
    pub food_stock: i32,
    pub production_stock: i32,
    pub producing: Option<Producible>,
    pub buildings: BTreeSet<Building>,
    pub hp: i32,
    pub founded_turn: u32,
}

impl City {
    pub fn max_hp(&self) -> i32 {
        100 + if self.buildings.contains(&Building::Walls) { 50 } else { 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub id: UnitId,
    pub owner: PlayerId,
    pub kind: UnitKind,
    pub at: Coord,
    pub hp: i32,
    pub moves_left: u8,
    pub fortified: bool,
    pub xp: u32,
    pub level: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityStateInfo {
    pub id: u8,
    pub name: String,
    pub city: CityId,
    pub patron: Option<PlayerId>,
}

/// Seeded ChaCha8 stream whose exact position survives serialization.
#[derive(Clone, Debug)]
pub struct GameRng(ChaCha8Rng);

impl GameRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.random_range(lo..hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        let roll: f64 = self.0.random();
        roll < p
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.0);
    }
}

impl PartialEq for GameRng {
    fn eq(&self, other: &Self) -> bool {
        self.0.get_seed() == other.0.get_seed()
            && self.0.get_stream() == other.0.get_stream()
            && self.0.get_word_pos() == other.0.get_word_pos()
    }
}

impl Eq for GameRng {}

#[derive(Serialize, Deserialize)]
struct RngRepr {
    seed: String,
    stream: u64,
    word_pos: String,
}

impl Serialize for GameRng {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let seed: String = self.0.get_seed().iter().map(|b| format!("{b:02x}")).collect();
        RngRepr { seed, stream: self.0.get_stream(), word_pos: self.0.get_word_pos().to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameRng {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = RngRepr::deserialize(d)?;
        if r.seed.len() != 64 || !r.seed.is_ascii() {
            return Err(D::Error::custom("rng seed must be 64 hex digits"));
        }
        let mut seed = [0u8; 32];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&r.seed[i * 2..i * 2 + 2], 16).map_err(D::Error::custom)?;
        }
        let word_pos: u128 = r.word_pos.parse().map_err(D::Error::custom)?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(r.stream);
        rng.set_word_pos(word_pos);
        Ok(Self(rng))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameState {
    pub config: GameConfig,
    pub turn: u32,
    pub map: HexMap,
    pub players: Vec<PlayerState>,
    pub cities: BTreeMap<CityId, City>,
    pub units: BTreeMap<UnitId, Unit>,
    pub city_states: Vec<CityStateInfo>,
    pub event_log: Vec<Event>,
    pub rng: GameRng,
    pub victory: Option<VictoryResult>,
    /// Set by the most recent congress vote that reached the threshold.
    pub world_leader: Option<PlayerId>,
    pub next_city_id: CityId,
    pub next_unit_id: UnitId,
}

impl GameState {
    /// Terminal once someone won or the turn limit passed without a winner.
    pub fn is_terminal(&self) -> bool {
        self.victory.is_some() || self.turn >= self.config.max_turns
    }

    pub fn player(&self, id: PlayerId) -> Result<&PlayerState, EngineError> {
        self.players.get(id as usize).ok_or(EngineError::UnknownPlayer(id))
    }

    pub fn live_player(&self, id: PlayerId) -> Result<&PlayerState, EngineError> {
        let p = self.player(id)?;
        if p.alive {
            Ok(p)
        } else {
            Err(EngineError::DeadPlayer(id))
        }
    }

    pub fn player_cities(&self, id: PlayerId) -> impl Iterator<Item = &City> + '_ {
        self.cities.values().filter(move |c| c.owner == Owner::Player(id))
    }

    pub fn player_units(&self, id: PlayerId) -> impl Iterator<Item = &Unit> + '_ {
        self.units.values().filter(move |u| u.owner == id)
    }

    pub fn city_at(&self, at: Coord) -> Option<&City> {
        self.cities.values().find(|c| c.at == at)
    }

    pub fn unit_at(&self, at: Coord) -> Option<&Unit> {
        self.units.values().find(|u| u.at == at)
    }

    pub fn wonder_owner(&self, b: Building) -> Option<CityId> {
        self.cities.values().find(|c| c.buildings.contains(&b)).map(|c| c.id)
    }

    pub fn tile_index(&self, at: Coord) -> usize {
        self.map.index(at).expect("coordinate inside map")
    }

    pub fn is_visible(&self, viewer: PlayerId, at: Coord) -> bool {
        self.map.index(at).is_some_and(|i| self.players[viewer as usize].visible.contains(i))
    }

    pub fn is_revealed(&self, viewer: PlayerId, at: Coord) -> bool {
        self.map.index(at).is_some_and(|i| self.players[viewer as usize].revealed.contains(i))
    }

    pub fn original_capitals(&self) -> impl Iterator<Item = &City> + '_ {
        self.players.iter().filter_map(|p| self.cities.get(&p.original_capital))
    }

    pub fn archetype_name(&self, id: PlayerId) -> &'static str {
        crate::data::tables().archetypes[self.players[id as usize].archetype].name.as_str()
    }
}
