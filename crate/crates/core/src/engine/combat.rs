use super::events::{EventKind, RemovalReason, Target};
use super::hex::{Coord, Owner};
use super::rules::{Building, UnitClass};
use super::state::*;

/// Damage dealt at strength ratio 1.0, before the random spread.
pub const BASE_DAMAGE: f64 = 30.0;
pub const FORTIFY_BONUS_PCT: i32 = 25;
pub const XP_PER_LEVEL: u32 = 2;

/// Expected damage to the defender: `BASE_DAMAGE * ratio`, with the random
/// factor drawn from U(0.8, 1.2).
pub fn damage(ratio: f64, roll: f64) -> i32 {
    (BASE_DAMAGE * ratio * roll).round().clamp(0.0, 100.0) as i32
}

fn hp_factor(hp: i32) -> f64 {
    (50.0 + hp as f64 / 2.0) / 100.0
}

impl GameState {
    /// Attack strength of a unit (ranged units use their ranged value).
    pub fn attack_strength(&self, unit: &Unit) -> f64 {
        let s = unit.kind.stats();
        let base = if s.class == UnitClass::Ranged { s.ranged_strength } else { s.strength };
        let pct = self.strength_bonus_pct(unit.owner) + 10 * unit.level as i32;
        base as f64 * (100 + pct) as f64 / 100.0 * hp_factor(unit.hp)
    }

    /// Defensive strength of a unit on its current tile.
    pub fn defense_strength(&self, unit: &Unit) -> f64 {
        let s = unit.kind.stats();
        let mut pct = self.strength_bonus_pct(unit.owner) + 10 * unit.level as i32;
        pct += self.map.tile(unit.at).map_or(0, |t| t.terrain.defense_bonus_pct());
        if unit.fortified {
            pct += FORTIFY_BONUS_PCT;
        }
        (s.strength.max(1)) as f64 * (100 + pct) as f64 / 100.0 * hp_factor(unit.hp)
    }

    /// Defensive strength of a city: population, walls and garrison.
    pub fn city_strength(&self, city: &City) -> f64 {
        let mut s = 6.0 + city.population as f64;
        if city.buildings.contains(&Building::Walls) {
            s += 8.0;
        }
        if let Some(g) = self.unit_at(city.at).filter(|u| u.kind.is_military()) {
            s += g.kind.stats().strength as f64 / 2.0;
        }
        let pct = match city.owner {
            Owner::Player(p) => self.strength_bonus_pct(p),
            Owner::CityState(_) => 0,
        };
        s * (100 + pct) as f64 / 100.0 * hp_factor(city.hp * 100 / city.max_hp())
    }

    /// Resolves an attack by `attacker` on whatever stands at `target`.
    /// Melee winners advance; a melee hit that drops a city to 0 HP captures it.
    pub fn resolve_attack(&mut self, attacker: UnitId, target: Coord) {
        let Some(att) = self.units.get(&attacker).cloned() else { return };
        let ranged = att.kind.class() == UnitClass::Ranged;
        let att_str = self.attack_strength(&att);

        if let Some(city) = self.city_at(target).cloned() {
            let Owner::Player(owner) = city.owner else { return };
            let ratio = att_str / self.city_strength(&city).max(1.0);
            let dealt = damage(ratio, self.rng.uniform(0.8, 1.2));
            let taken = if ranged { 0 } else { damage(1.0 / ratio, self.rng.uniform(0.8, 1.2)) };
            let c = self.cities.get_mut(&city.id).expect("city");
            c.hp = (c.hp - dealt).max(0);
            let city_hp = c.hp;
            let attacker_hp = self.damage_unit(attacker, taken);
            self.log(
                EventKind::CombatResolved {
                    attacker,
                    attacker_owner: att.owner,
                    defender: Target::City { city: city.id, owner: city.owner },
                    at: target,
                    attacker_damage: taken,
                    defender_damage: dealt,
                    attacker_hp,
                    defender_hp: city_hp,
                },
                &[att.at, target],
                &[att.owner, owner],
            );
            self.finish_attack(attacker, attacker_hp);
            if attacker_hp <= 0 {
                self.remove_unit(attacker, RemovalReason::Killed);
            } else if city_hp <= 0 && !ranged {
                self.capture_city(city.id, att.owner);
                if self.unit_at(target).is_none() {
                    self.move_unit(attacker, target);
                }
            }
            return;
        }

        let Some(def) = self.unit_at(target).cloned() else { return };
        let ratio = att_str / self.defense_strength(&def).max(0.5);
        let dealt = damage(ratio, self.rng.uniform(0.8, 1.2));
        let taken = if ranged || !def.kind.is_military() {
            0
        } else {
            damage(1.0 / ratio, self.rng.uniform(0.8, 1.2))
        };
        let defender_hp = self.damage_unit(def.id, dealt);
        let attacker_hp = self.damage_unit(attacker, taken);
        self.log(
            EventKind::CombatResolved {
                attacker,
                attacker_owner: att.owner,
                defender: Target::Unit { unit: def.id, owner: def.owner },
                at: target,
                attacker_damage: taken,
                defender_damage: dealt,
                attacker_hp,
                defender_hp,
            },
            &[att.at, target],
            &[att.owner, def.owner],
        );
        if defender_hp <= 0 {
            self.remove_unit(def.id, RemovalReason::Killed);
        }
        self.finish_attack(attacker, attacker_hp);
        if attacker_hp <= 0 {
            self.remove_unit(attacker, RemovalReason::Killed);
        } else if defender_hp <= 0 && !ranged && self.city_at(target).is_none() && self.unit_at(target).is_none() {
            self.move_unit(attacker, target);
        }
    }

    /// Cities shoot the weakest adjacent-or-near enemy unit (range 2).
    pub fn city_bombard(&mut self, city: CityId) {
        let Some(c) = self.cities.get(&city).cloned() else { return };
        let Owner::Player(owner) = c.owner else { return };
        if c.hp <= 0 {
            return;
        }
        let target = self
            .units
            .values()
            .filter(|u| {
                u.at.distance(c.at) <= 2
                    && self.players[owner as usize].at_war_with(u.owner)
                    && self.is_visible(owner, u.at)
            })
            .min_by_key(|u| (u.hp, u.id))
            .cloned();
        let Some(t) = target else { return };
        let ratio = 0.6 * self.city_strength(&c) / self.defense_strength(&t).max(0.5);
        let dealt = damage(ratio, self.rng.uniform(0.8, 1.2));
        let unit_hp = self.damage_unit(t.id, dealt);
        self.log(
            EventKind::CityBombarded { city, owner, unit: t.id, unit_owner: t.owner, damage: dealt, unit_hp },
            &[c.at, t.at],
            &[owner, t.owner],
        );
        if unit_hp <= 0 {
            self.remove_unit(t.id, RemovalReason::Killed);
        }
    }

    fn damage_unit(&mut self, id: UnitId, amount: i32) -> i32 {
        let u = self.units.get_mut(&id).expect("unit");
        u.hp -= amount;
        u.hp
    }

    fn finish_attack(&mut self, attacker: UnitId, hp: i32) {
        if hp <= 0 {
            return;
        }
        let u = self.units.get_mut(&attacker).expect("unit");
        u.moves_left = 0;
        u.fortified = false;
        u.xp += 1;
        if u.xp >= XP_PER_LEVEL * (u.level as u32 + 1) && u.level < 3 {
            u.level += 1;
            let (owner, level, at) = (u.owner, u.level, u.at);
            self.log(EventKind::UnitPromoted { unit: attacker, player: owner, level }, &[at], &[owner]);
        }
    }
}
