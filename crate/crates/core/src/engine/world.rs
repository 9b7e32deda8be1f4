//! State mutation primitives shared by setup and the turn loop. Every
//! change to the unit table, city ownership or fog goes through here so the
//! matching event is always logged.

use super::events::{Event, EventKind, RemovalReason};
use super::hex::{Coord, Owner};
use super::rules::{Building, Policy, Tech, UnitKind};
use super::state::*;
use crate::data::tables;

pub const CITY_SIGHT: u32 = 2;
pub const CITY_MIN_SPACING: u32 = 3;

impl GameState {
    /// Appends an event. Witnesses are the `involved` players plus every
    /// player currently seeing one of `places`.
    pub fn log(&mut self, kind: EventKind, places: &[Coord], involved: &[PlayerId]) {
        let mut witnesses = 0u32;
        for p in involved {
            witnesses |= 1 << p;
        }
        for (i, player) in self.players.iter().enumerate() {
            if places.iter().any(|c| self.map.index(*c).is_some_and(|t| player.visible.contains(t))) {
                witnesses |= 1 << i;
            }
        }
        self.push_event(kind, witnesses);
    }

    /// Appends an event every player observes.
    pub fn log_public(&mut self, kind: EventKind) {
        let all = (1u32 << self.players.len()) - 1;
        self.push_event(kind, all);
    }

    fn push_event(&mut self, kind: EventKind, witnesses: u32) {
        let index = self.event_log.last().map_or(0, |e| e.index + 1);
        self.event_log.push(Event { index, turn: self.turn, witnesses, kind });
    }

    pub fn spawn_unit(&mut self, owner: PlayerId, kind: UnitKind, at: Coord) -> UnitId {
        let id = self.next_unit_id;
        self.next_unit_id += 1;
        let moves = kind.stats().moves;
        self.units.insert(
            id,
            Unit { id, owner, kind, at, hp: 100, moves_left: moves, fortified: false, xp: 0, level: 0 },
        );
        self.refresh_visibility(owner);
        self.log(EventKind::UnitCreated { unit: id, player: owner, kind, at }, &[at], &[owner]);
        id
    }

    pub fn remove_unit(&mut self, id: UnitId, reason: RemovalReason) {
        if let Some(u) = self.units.remove(&id) {
            self.log(
                EventKind::UnitRemoved { unit: id, player: u.owner, kind: u.kind, at: u.at, reason },
                &[u.at],
                &[u.owner],
            );
            self.refresh_visibility(u.owner);
        }
    }

    /// An empty passable tile for a new unit: the city tile itself or the
    /// first free neighbor in fixed order.
    pub fn free_spawn_tile(&self, at: Coord) -> Option<Coord> {
        std::iter::once(at)
            .chain(at.neighbors())
            .find(|c| self.map.is_passable(*c) && self.unit_at(*c).is_none() && self.city_blocks(*c, at))
    }

    /// True unless `c` holds a city other than the spawning one.
    fn city_blocks(&self, c: Coord, home: Coord) -> bool {
        c == home || self.city_at(c).is_none()
    }

    pub fn found_city(&mut self, owner: Owner, at: Coord, name: String) -> CityId {
        let id = self.next_city_id;
        self.next_city_id += 1;
        self.cities.insert(
            id,
            City {
                id,
                name: name.clone(),
                owner,
                original_owner: owner,
                at,
                population: 1,
                food_stock: 0,
                production_stock: 0,
                producing: None,
                buildings: Default::default(),
                hp: 100,
                founded_turn: self.turn,
            },
        );
        for c in self.map.within(at, 1) {
            let t = self.map.tile_mut(c).expect("in map");
            if t.owner.is_none() || c == at {
                t.owner = Some(owner);
            }
        }
        let involved: Vec<PlayerId> = owner.player().into_iter().collect();
        if let Some(p) = owner.player() {
            self.refresh_visibility(p);
        }
        self.log(EventKind::CityFounded { city: id, owner, at, name }, &[at], &involved);
        id
    }

    /// Next city name for a player, cycling through the archetype list.
    pub fn next_city_name(&self, player: PlayerId) -> String {
        let names = &tables().archetypes[self.players[player as usize].archetype].cities;
        let founded = self.cities.values().filter(|c| c.original_owner == Owner::Player(player)).count();
        let base = &names[founded % names.len()];
        match founded / names.len() {
            0 => base.clone(),
            k => format!("{base} {}", k + 1),
        }
    }

    /// Recomputes a player's visible set and reveals newly seen tiles.
    /// Returns the newly revealed coordinates.
    pub fn refresh_visibility(&mut self, player: PlayerId) -> Vec<Coord> {
        let p = player as usize;
        let mut sources: Vec<(Coord, u32)> = self
            .units
            .values()
            .filter(|u| u.owner == player)
            .map(|u| (u.at, u.kind.stats().sight))
            .collect();
        sources.extend(
            self.cities.values().filter(|c| c.owner == Owner::Player(player)).map(|c| (c.at, CITY_SIGHT)),
        );
        let mut visible = TileSet::new(self.map.len());
        let mut fresh = Vec::new();
        for (at, r) in sources {
            for c in self.map.within(at, r) {
                let i = self.map.index(c).expect("in map");
                visible.insert(i);
                if self.players[p].revealed.insert(i) {
                    fresh.push(c);
                }
            }
        }
        self.players[p].visible = visible;
        fresh
    }

    /// Marks first contacts between `player` and anyone whose units or
    /// cities it now sees.
    pub fn check_meetings(&mut self, player: PlayerId) {
        let mut seen = Vec::new();
        for u in self.units.values() {
            if u.owner != player && self.is_visible(player, u.at) {
                seen.push(u.owner);
            }
        }
        for c in self.cities.values() {
            if let Owner::Player(o) = c.owner {
                if o != player && self.is_visible(player, c.at) {
                    seen.push(o);
                }
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for o in seen {
            if !self.players[o as usize].alive || self.players[player as usize].diplomacy[o as usize].met {
                continue;
            }
            self.players[player as usize].diplomacy[o as usize].met = true;
            self.players[o as usize].diplomacy[player as usize].met = true;
            self.log(EventKind::PlayerMet { a: player.min(o), b: player.max(o) }, &[], &[player, o]);
        }
    }

    /// Moves a unit one step, logging the move and any newly revealed tiles.
    pub fn move_unit(&mut self, id: UnitId, to: Coord) {
        let u = self.units.get_mut(&id).expect("unit exists");
        let from = u.at;
        u.at = to;
        u.fortified = false;
        u.moves_left = u.moves_left.saturating_sub(1);
        let (owner, kind) = (u.owner, u.kind);
        let fresh = self.refresh_visibility(owner);
        self.log(EventKind::UnitMoved { unit: id, player: owner, kind, from, to }, &[from, to], &[owner]);
        for at in fresh {
            self.log(EventKind::TileRevealed { player: owner, at }, &[], &[owner]);
        }
        self.check_meetings(owner);
    }

    /// Transfers a city to `to`. Handles the garrison, territory, and
    /// elimination of the previous owner.
    pub fn capture_city(&mut self, city: CityId, to: PlayerId) {
        let c = self.cities.get(&city).expect("city exists");
        let (at, from) = (c.at, c.owner.player().expect("only player cities are captured"));
        if let Some(g) = self.unit_at(at).map(|u| u.id) {
            self.remove_unit(g, RemovalReason::Captured);
        }
        let c = self.cities.get_mut(&city).expect("city exists");
        c.owner = Owner::Player(to);
        c.population = (c.population / 2).max(1);
        c.hp = c.max_hp() / 4;
        c.producing = None;
        c.production_stock = 0;
        c.food_stock = 0;
        // Wonders survive capture; walls are razed.
        c.buildings.remove(&Building::Walls);
        for t in self.map.within(at, 2) {
            let tile = self.map.tile_mut(t).expect("in map");
            if tile.owner == Some(Owner::Player(from)) {
                tile.owner = Some(Owner::Player(to));
            }
        }
        self.refresh_visibility(to);
        self.refresh_visibility(from);
        self.log(EventKind::CityCaptured { city, from, to, at }, &[at], &[from, to]);
        if self.player_cities(from).next().is_none() {
            self.eliminate(from);
        }
    }

    pub fn eliminate(&mut self, player: PlayerId) {
        let units: Vec<UnitId> = self.player_units(player).map(|u| u.id).collect();
        for u in units {
            self.remove_unit(u, RemovalReason::Eliminated);
        }
        let p = &mut self.players[player as usize];
        p.alive = false;
        p.eliminated_turn = Some(self.turn);
        for r in p.diplomacy.iter_mut() {
            r.stance = Stance::Neutral;
            r.war_since = None;
        }
        for other in self.players.iter_mut() {
            let r = &mut other.diplomacy[player as usize];
            r.stance = Stance::Neutral;
            r.war_since = None;
        }
        self.log_public(EventKind::PlayerEliminated { player });
    }

    /// Combat strength multiplier (percent) from archetype, policies and ideology.
    pub fn strength_bonus_pct(&self, player: PlayerId) -> i32 {
        let p = &self.players[player as usize];
        let mut pct = tables().archetypes[p.archetype].modifiers.strength;
        if p.has_policy(Policy::Honor) {
            pct += 10;
        }
        if p.has_policy(Policy::Discipline) {
            pct += 10;
        }
        if p.ideology == Some(super::rules::Ideology::Autocracy) {
            pct += 20;
        }
        pct
    }

    pub fn knows(&self, player: PlayerId, tech: Tech) -> bool {
        self.players[player as usize].techs_known.contains(&tech)
    }

    /// Summed base strength of a player's military units (score input).
    pub fn military_strength(&self, player: PlayerId) -> i64 {
        self.player_units(player)
            .filter(|u| u.kind.is_military())
            .map(|u| {
                let s = u.kind.stats();
                s.strength.max(s.ranged_strength) as i64
            })
            .sum()
    }

    pub fn wonders_owned(&self, player: PlayerId) -> usize {
        self.player_cities(player).map(|c| c.buildings.iter().filter(|b| b.is_wonder()).count()).sum()
    }

    pub fn total_population(&self, player: PlayerId) -> u32 {
        self.player_cities(player).map(|c| c.population).sum()
    }

    /// Whether `player` may found a city at `at` (ignoring who stands there).
    pub fn can_found_city(&self, player: PlayerId, at: Coord) -> bool {
        let Some(t) = self.map.tile(at) else { return false };
        t.terrain.is_passable()
            && !t.terrain.is_water()
            && self.cities.values().all(|c| c.at.distance(at) >= CITY_MIN_SPACING)
            && t.owner.is_none_or(|o| o == Owner::Player(player))
    }
}
