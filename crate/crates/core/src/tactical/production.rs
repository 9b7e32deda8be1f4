//! City production: flavor-weighted item scores plus situational bonuses.

use crate::data::tables;
use crate::engine::economy::unit_unlocked;
use crate::engine::hex::Owner;
use crate::engine::rules::{Producible, Tech, UnitKind, SPACESHIP_PARTS_NEEDED};
use crate::engine::{City, GameState, PlayerId};

use super::flavor::{Flavor, FlavorVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TacticalError {
    #[error("{item} cannot be produced in city {city}")]
    IllegalItem { item: Producible, city: u32 },
    #[error("city {0} has nothing it can produce")]
    NoLegalItems(u32),
    #[error("city {0} is not owned by a player")]
    NotPlayerCity(u32),
}

fn city_player(city: &City) -> Result<PlayerId, TacticalError> {
    match city.owner {
        Owner::Player(p) => Ok(p),
        Owner::CityState(_) => Err(TacticalError::NotPlayerCity(city.id)),
    }
}

pub fn is_legal(state: &GameState, city: &City, item: Producible) -> bool {
    let Ok(p) = city_player(city) else { return false };
    let ps = &state.players[p as usize];
    if let Some(kind) = item.unit() {
        return unit_unlocked(ps, kind)
            && match kind {
                UnitKind::Settler => city.population >= 2,
                UnitKind::Worker => {
                    let workers = state.player_units(p).filter(|u| u.kind == UnitKind::Worker).count();
                    workers < state.player_cities(p).count()
                }
                _ => true,
            };
    }
    if let Some(b) = item.building() {
        return !city.buildings.contains(&b)
            && b.requires().is_none_or(|t| ps.techs_known.contains(&t))
            && !(b.is_wonder() && state.wonder_owner(b).is_some());
    }
    match item {
        Producible::SpaceshipPart => {
            ps.techs_known.contains(&Tech::Astronomy) && ps.spaceship_parts < SPACESHIP_PARTS_NEEDED
        }
        _ => true,
    }
}

pub fn legal_items(state: &GameState, city: &City) -> Vec<Producible> {
    Producible::ALL.iter().copied().filter(|i| is_legal(state, city, *i)).collect()
}

/// Flavor-independent adjustments: defense need, garrison, saturation of
/// civilians and military, and the money-losing reflex.
pub fn situational_bonus(state: &GameState, city: &City, item: Producible) -> i64 {
    let Ok(p) = city_player(city) else { return 0 };
    let ps = &state.players[p as usize];
    let military_item = item.unit().is_some_and(|k| k.is_military());
    let mut bonus = 0i64;

    let threat: i64 = state
        .units
        .values()
        .filter(|u| u.at.distance(city.at) <= 3 && ps.at_war_with(u.owner) && state.is_visible(p, u.at))
        .map(|u| state.attack_strength(u).round() as i64)
        .sum();
    if threat > 0 {
        if military_item {
            bonus += (3 * threat).min(300);
        }
        if item == Producible::Walls {
            bonus += (2 * threat).min(200);
        }
    }

    let garrisoned = state
        .player_units(p)
        .any(|u| u.kind.is_military() && u.at.distance(city.at) <= 1);
    if military_item && !garrisoned {
        bonus += 60;
    }

    let military = state.player_units(p).filter(|u| u.kind.is_military()).count() as i64;
    if military_item {
        let cities = state.player_cities(p).count() as i64;
        bonus -= 12 * military + 50 * (military - cities - 1).max(0);
    }

    match item {
        Producible::Settler => {
            let pending = state.player_units(p).filter(|u| u.kind == UnitKind::Settler).count()
                + state
                    .player_cities(p)
                    .filter(|c| c.id != city.id && c.producing == Some(Producible::Settler))
                    .count();
            bonus -= 150 * pending as i64;
            if !has_free_site(state, p) {
                bonus -= 300;
            }
        }
        Producible::Scout => {
            let scouts = state.player_units(p).filter(|u| u.kind == UnitKind::Scout).count() as i64;
            bonus -= 120 * scouts;
            let revealed = state.players[p as usize].revealed.count() as i64;
            if 2 * revealed > state.map.len() as i64 {
                bonus -= 100;
            }
        }
        Producible::Worker => {
            let pending = state
                .map
                .within(city.at, 2)
                .into_iter()
                .filter(|c| {
                    state.map.tile(*c).is_some_and(|t| {
                        t.owner == Some(city.owner) && !t.improved && t.terrain.improvement_bonus().is_some()
                    })
                })
                .count();
            if pending >= 2 {
                bonus += 30;
            }
        }
        Producible::Warrior if unit_unlocked(ps, UnitKind::Swordsman) => bonus -= 80,
        _ => {}
    }

    if ps.gold_rate < 0 {
        match item {
            Producible::Market => bonus += 150,
            Producible::Wealth => bonus += 120,
            _ if military_item => bonus -= 60,
            _ => {}
        }
    }
    bonus
}

/// Score = sum over flavors of weight times item affinity, plus the
/// situational bonus.
pub fn score_production_item(
    state: &GameState,
    item: Producible,
    city: &City,
    flavors: &FlavorVector,
) -> Result<i64, TacticalError> {
    if !is_legal(state, city, item) {
        return Err(TacticalError::IllegalItem { item, city: city.id });
    }
    Ok(flavor_score(item, flavors) + situational_bonus(state, city, item))
}

pub fn flavor_score(item: Producible, flavors: &FlavorVector) -> i64 {
    let aff = &tables().affinity;
    Flavor::ALL.iter().map(|f| flavors.get(*f) as i64 * aff.get(item, *f) as i64).sum()
}

/// Highest-scoring legal item; ties go to the lowest item id.
pub fn choose_city_production(
    state: &GameState,
    city: &City,
    flavors: &FlavorVector,
) -> Result<Producible, TacticalError> {
    city_player(city)?;
    legal_items(state, city)
        .into_iter()
        .map(|i| (score_production_item(state, i, city, flavors).expect("legal item"), i))
        .max_by_key(|(s, i)| (*s, std::cmp::Reverse(i.id())))
        .map(|(_, i)| i)
        .ok_or(TacticalError::NoLegalItems(city.id))
}

/// Whether the player knows of any tile where a new city could go.
pub fn has_free_site(state: &GameState, p: PlayerId) -> bool {
    state.map.coords().any(|c| state.is_revealed(p, c) && state.can_found_city(p, c))
}
