//! Yields, research and policy legality.

use super::hex::{Coord, Owner};
use super::rules::{Building, Ideology, Policy, PolicyBranch, PolicyChoice, Producible, Tech, UnitKind};
use super::state::*;
use crate::data::tables;

pub const IDEOLOGY_AFTER_POLICIES: usize = 3;
pub const WORK_RADIUS: u32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CityOutput {
    pub food: i32,
    pub production: i32,
    pub gold: i32,
    pub science: i32,
    pub culture: i32,
    pub faith: i32,
    pub tourism: i32,
}

fn pct(v: i32, bonus: i32) -> i32 {
    v * (100 + bonus) / 100
}

impl GameState {
    /// Tiles a city works: its center plus the best `population` owned tiles
    /// within radius 2 that are not closer to another city of the same owner.
    pub fn worked_tiles(&self, city: &City) -> Vec<Coord> {
        let mut cands: Vec<Coord> = self
            .map
            .within(city.at, WORK_RADIUS)
            .into_iter()
            .filter(|c| *c != city.at && self.map.tile(*c).is_some_and(|t| t.owner == Some(city.owner)))
            .filter(|c| {
                let d = c.distance(city.at);
                !self.cities.values().any(|o| {
                    o.id != city.id && o.owner == city.owner && {
                        let od = c.distance(o.at);
                        od < d || (od == d && o.id < city.id)
                    }
                })
            })
            .collect();
        cands.sort_by_key(|c| {
            let y = self.map.tile(*c).expect("in map").yields();
            (std::cmp::Reverse(3 * y.food + 2 * y.production + y.gold), *c)
        });
        cands.truncate(city.population as usize);
        cands.insert(0, city.at);
        cands
    }

    pub fn city_output(&self, city: &City) -> CityOutput {
        let mut food = 2;
        let mut production = 1;
        let mut gold = 1;
        for c in self.worked_tiles(city) {
            let y = self.map.tile(c).expect("in map").yields();
            food += y.food;
            production += y.production;
            gold += y.gold;
        }
        let Owner::Player(pid) = city.owner else {
            return CityOutput { food, production, gold, ..Default::default() };
        };
        let p = &self.players[pid as usize];
        let m = tables().archetypes[p.archetype].modifiers;
        let has = |b: Building| city.buildings.contains(&b);
        let wonders = city.buildings.iter().filter(|b| b.is_wonder()).count() as i32;
        let is_capital = p.original_capital == city.id;

        let mut science = city.population as i32 + 1;
        let mut culture = 1 + 3 * wonders;
        let mut faith = 0;
        let mut tourism = 0;
        let mut prod_bonus = m.production;
        let mut gold_bonus = m.gold;
        if has(Building::Monument) {
            culture += 2;
            faith += 1;
        }
        if has(Building::Library) {
            science += 3;
        }
        if has(Building::Market) {
            gold += 2;
            gold_bonus += 25;
        }
        if has(Building::Observatory) {
            science += 3;
        }
        if has(Building::GreatArchive) {
            science += 2;
        }
        if p.has_policy(Policy::Tradition) && is_capital {
            culture += 2;
        }
        if p.has_policy(Policy::Liberty) {
            production += 1;
        }
        if p.has_policy(Policy::Republic) {
            science += 1;
        }
        if p.has_policy(Policy::Monarchy) {
            gold += 2;
        }
        if p.ideology == Some(Ideology::Order) {
            prod_bonus += 15;
            science += 2;
        }
        if p.techs_known.contains(&Tech::Philosophy) {
            tourism += if has(Building::Monument) { 2 } else { 0 } + 4 * wonders;
        }
        if p.happiness <= tables().rules.builtin.happiness_critical {
            prod_bonus -= 25;
        }
        CityOutput {
            food: pct(food, m.food),
            production: pct(production, prod_bonus),
            gold: pct(gold, gold_bonus),
            science: pct(science, m.science),
            culture: pct(culture, m.culture),
            faith,
            tourism,
        }
    }

    pub fn happiness(&self, player: PlayerId) -> i32 {
        let p = &self.players[player as usize];
        let cities: Vec<&City> = self.player_cities(player).collect();
        let n = cities.len() as i32;
        let pop: i32 = cities.iter().map(|c| c.population as i32).sum();
        let amenities: i32 = cities
            .iter()
            .map(|c| {
                c.buildings.contains(&Building::Monument) as i32 + c.buildings.contains(&Building::Market) as i32
            })
            .sum();
        let monarchy = if p.has_policy(Policy::Monarchy) { n } else { 0 };
        5 + amenities + monarchy - n - pop / 3
    }

    /// Gold paid each turn for units beyond the free allowance and walls.
    pub fn upkeep(&self, player: PlayerId) -> i32 {
        let cities = self.player_cities(player).count() as i32;
        let military = self.player_units(player).filter(|u| u.kind.is_military()).count() as i32;
        let walls =
            self.player_cities(player).filter(|c| c.buildings.contains(&Building::Walls)).count() as i32;
        (military - 2 * cities - 1).max(0) + walls
    }

    /// Techs whose prerequisites are known, excluding known and current ones.
    pub fn available_techs(&self, player: PlayerId) -> Vec<Tech> {
        let p = &self.players[player as usize];
        Tech::ALL
            .iter()
            .copied()
            .filter(|t| {
                !p.techs_known.contains(t)
                    && p.research != Some(*t)
                    && t.prereqs().iter().all(|q| p.techs_known.contains(q))
            })
            .collect()
    }

    pub fn can_research(&self, player: PlayerId, t: Tech) -> bool {
        let p = &self.players[player as usize];
        !p.techs_known.contains(&t) && t.prereqs().iter().all(|q| p.techs_known.contains(q))
    }

    /// Adoptable policies in catalog order.
    pub fn legal_policies(&self, player: PlayerId) -> Vec<PolicyChoice> {
        let p = &self.players[player as usize];
        PolicyChoice::all().filter(|c| policy_legal(p, *c)).collect()
    }

    /// Cost of a producible for this player, after policy discounts.
    pub fn item_cost(&self, player: PlayerId, item: Producible) -> i32 {
        let base = item.cost();
        if item == Producible::Settler && self.players[player as usize].has_policy(Policy::CollectiveRule) {
            base * 7 / 10
        } else {
            base
        }
    }
}

pub fn policy_legal(p: &PlayerState, c: PolicyChoice) -> bool {
    match c {
        PolicyChoice::Policy(pol) => {
            !p.has_policy(pol) && (pol.is_opener() || p.has_policy(pol.branch().policies()[0]))
        }
        PolicyChoice::Ideology(_) => p.ideology.is_none() && p.policies_adopted.len() >= IDEOLOGY_AFTER_POLICIES,
    }
}

/// The branch opened but not yet completed, if any (lowest branch first).
pub fn open_branch(p: &PlayerState) -> Option<PolicyBranch> {
    PolicyBranch::ALL
        .iter()
        .copied()
        .find(|b| p.has_policy(b.policies()[0]) && b.policies().iter().any(|x| !p.has_policy(*x)))
}

/// Whether a unit kind's tech requirement is met.
pub fn unit_unlocked(p: &PlayerState, kind: UnitKind) -> bool {
    kind.stats().requires.is_none_or(|t| p.techs_known.contains(&t))
}
