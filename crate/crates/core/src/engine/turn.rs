use super::economy::policy_legal;
use super::events::{Event, EventKind, RemovalReason};
use super::hex::{Coord, Owner};
use super::rules::{policy_cost, Building, Policy, PolicyChoice, Producible, Tech};
use super::state::*;
use super::victory::check_victory;
use super::EngineError;
use crate::data::tables;
use crate::strategy::{apply_persona, Relations, StrategyDirectives};
use crate::tactical::{self, UnitAction};

pub const CONGRESS_INTERVAL: u32 = 25;
pub const NO_WAR_BEFORE_TURN: u32 = 15;
pub const PATRON_THRESHOLD: i32 = 300;
pub const INFLUENCE_DECAY: i32 = 4;
pub const PEACE_TREATY_TURNS: u32 = 15;

/// Plays one full turn: every live player in index order, then the
/// world phase (city-state influence, congress), then the turn counter.
/// Returns the events appended by this call.
pub fn advance_turn(state: &mut GameState, directives: &[StrategyDirectives]) -> Result<Vec<Event>, EngineError> {
    if state.is_terminal() {
        return Err(EngineError::Terminal);
    }
    if directives.len() != state.players.len() {
        return Err(EngineError::DirectiveCount { expected: state.players.len(), got: directives.len() });
    }
    let first_new = state.event_log.len();
    for (p, d) in directives.iter().enumerate() {
        if !state.players[p].alive {
            continue;
        }
        player_turn(state, p as PlayerId, d);
        if let Some(v) = check_victory(state) {
            declare(state, v);
            return Ok(state.event_log[first_new..].to_vec());
        }
    }
    world_phase(state);
    state.turn += 1;
    if let Some(v) = check_victory(state) {
        declare(state, v);
    }
    Ok(state.event_log[first_new..].to_vec())
}

fn declare(state: &mut GameState, v: VictoryResult) {
    state.victory = Some(v);
    state.log_public(EventKind::VictoryAchieved { winner: v.winner, kind: v.kind });
}

fn player_turn(state: &mut GameState, p: PlayerId, d: &StrategyDirectives) {
    {
        let ps = &mut state.players[p as usize];
        ps.flavors = d.flavors;
        ps.strategy = d.strategy.clone();
        ps.persona = d.persona;
        ps.next_research = d.next_research;
        ps.next_policy = d.next_policy;
    }
    let ids: Vec<UnitId> = state.player_units(p).map(|u| u.id).collect();
    for id in ids {
        let u = state.units.get_mut(&id).expect("unit");
        u.moves_left = u.kind.stats().moves;
    }
    income(state, p);
    production(state, p);
    tactics(state, p);
    diplomacy(state, p);
    growth(state, p);
    state.log_public(EventKind::PlayerDoneTurn { player: p });
}

fn income(state: &mut GameState, p: PlayerId) {
    let outputs: Vec<_> = state.player_cities(p).map(|c| state.city_output(c)).collect();
    let sum = |f: fn(&super::economy::CityOutput) -> i32| outputs.iter().map(f).sum::<i32>();
    let military = state.player_units(p).filter(|u| u.kind.is_military()).count() as i32;
    let upkeep = state.upkeep(p);
    let happiness = state.happiness(p);
    let freedom = state.players[p as usize].ideology == Some(super::rules::Ideology::Freedom);

    let ps = &mut state.players[p as usize];
    ps.happiness = happiness;
    ps.gold_rate = sum(|o| o.gold) - upkeep;
    ps.science_rate = sum(|o| o.science);
    ps.culture_rate = sum(|o| o.culture) + if ps.has_policy(Policy::MilitaryCaste) { military / 2 } else { 0 };
    ps.faith_rate = sum(|o| o.faith);
    ps.tourism_rate = sum(|o| o.tourism) * if freedom { 2 } else { 1 };
    ps.treasury += ps.gold_rate;
    ps.faith += ps.faith_rate;
    ps.culture_stock += ps.culture_rate;
    ps.culture_total += ps.culture_rate;
    let tourism = ps.tourism_rate;
    let met: Vec<usize> = (0..ps.diplomacy.len()).filter(|o| *o != p as usize && ps.diplomacy[*o].met).collect();
    for o in met {
        ps.tourism_to[o] += tourism;
    }

    research(state, p);
    policies(state, p);

    if state.players[p as usize].treasury < 0 {
        let victim = state
            .player_units(p)
            .filter(|u| u.kind.is_military())
            .max_by_key(|u| (u.kind.stats().cost, u.id))
            .map(|u| u.id);
        if let Some(v) = victim {
            state.remove_unit(v, RemovalReason::Disbanded);
        }
        state.players[p as usize].treasury = 0;
    }
}

fn pick_research(state: &GameState, p: PlayerId, queued: &mut Option<Tech>) -> Option<Tech> {
    if let Some(t) = queued.take() {
        if state.can_research(p, t) {
            return Some(t);
        }
    }
    state.available_techs(p).into_iter().min_by_key(|t| (t.cost(), t.index()))
}

fn research(state: &mut GameState, p: PlayerId) {
    let mut queued = state.players[p as usize].next_research;
    if state.players[p as usize].research.is_none() {
        let t = pick_research(state, p, &mut queued);
        state.players[p as usize].research = t;
    }
    state.players[p as usize].research_progress += state.players[p as usize].science_rate;
    while let Some(t) = state.players[p as usize].research {
        let ps = &mut state.players[p as usize];
        if ps.research_progress < t.cost() {
            break;
        }
        ps.research_progress -= t.cost();
        ps.techs_known.insert(t);
        ps.research = None;
        state.log(EventKind::TechFinished { player: p, tech: t }, &[], &[p]);
        let next = pick_research(state, p, &mut queued);
        state.players[p as usize].research = next;
    }
    if state.players[p as usize].research.is_none() {
        state.players[p as usize].research_progress = 0;
    }
    state.players[p as usize].next_research = queued;
}

fn policies(state: &mut GameState, p: PlayerId) {
    let mut queued = state.players[p as usize].next_policy;
    loop {
        let ps = &state.players[p as usize];
        let cost = policy_cost(ps.policy_count());
        if ps.culture_stock < cost {
            break;
        }
        let choice = match queued.take() {
            Some(c) if policy_legal(ps, c) => Some(c),
            _ => state.legal_policies(p).first().copied(),
        };
        let Some(choice) = choice else { break };
        let ps = &mut state.players[p as usize];
        ps.culture_stock -= cost;
        match choice {
            PolicyChoice::Policy(pol) => ps.policies_adopted.push(pol),
            PolicyChoice::Ideology(i) => ps.ideology = Some(i),
        }
        state.log(EventKind::PolicyAdopted { player: p, policy: choice }, &[], &[p]);
    }
    state.players[p as usize].next_policy = queued;
}

fn production(state: &mut GameState, p: PlayerId) {
    let ids: Vec<CityId> = state.player_cities(p).map(|c| c.id).collect();
    for id in ids {
        let Some(city) = state.cities.get(&id).cloned() else { continue };
        if city.owner != Owner::Player(p) {
            continue;
        }
        let flavors = state.players[p as usize].flavors;
        let Ok(item) = tactical::choose_city_production(state, &city, &flavors) else { continue };
        let out = state.city_output(&city);
        state.cities.get_mut(&id).expect("city").producing = Some(item);
        if item == Producible::Wealth {
            state.players[p as usize].treasury += out.production;
            continue;
        }
        let mut prod = out.production;
        if item.building().is_some_and(|b| b.is_wonder()) && state.players[p as usize].has_policy(Policy::Aristocracy)
        {
            prod = prod * 120 / 100;
        }
        state.cities.get_mut(&id).expect("city").production_stock += prod;
        let cost = state.item_cost(p, item);
        if state.cities[&id].production_stock < cost {
            continue;
        }
        if let Some(kind) = item.unit() {
            let Some(spot) = state.free_spawn_tile(city.at) else { continue };
            state.spawn_unit(p, kind, spot);
            if kind == super::rules::UnitKind::Settler {
                let c = state.cities.get_mut(&id).expect("city");
                if c.population > 1 {
                    c.population -= 1;
                    let pop = c.population;
                    state.log(EventKind::SetPopulation { city: id, at: city.at, population: pop }, &[city.at], &[p]);
                }
            }
        } else if let Some(b) = item.building() {
            if b.is_wonder() && state.wonder_owner(b).is_some() {
                continue;
            }
            state.cities.get_mut(&id).expect("city").buildings.insert(b);
            if b == Building::Walls {
                let c = state.cities.get_mut(&id).expect("city");
                c.hp += 50;
            }
        } else if item == Producible::SpaceshipPart {
            state.players[p as usize].spaceship_parts += 1;
        }
        let c = state.cities.get_mut(&id).expect("city");
        c.production_stock -= cost;
        if item.building().is_some_and(|b| b.is_wonder()) || item == Producible::SpaceshipPart {
            state.log_public(EventKind::ProductionCompleted { city: id, player: p, item });
        } else {
            state.log(EventKind::ProductionCompleted { city: id, player: p, item }, &[city.at], &[p]);
        }
    }
}

fn tactics(state: &mut GameState, p: PlayerId) {
    let Ok(tmap) = tactical::tactical_map(state, p) else { return };
    let ids: Vec<UnitId> = state.player_units(p).map(|u| u.id).collect();
    for id in ids {
        for _ in 0..3 {
            let Some(unit) = state.units.get(&id).cloned() else { break };
            if unit.moves_left == 0 {
                break;
            }
            let flavors = state.players[p as usize].flavors;
            let action = tactical::plan_unit_turn(&unit, state, &tmap, &flavors);
            if !execute(state, &unit, action) {
                break;
            }
        }
    }
    let cities: Vec<CityId> = state.player_cities(p).map(|c| c.id).collect();
    for c in cities {
        state.city_bombard(c);
    }
}

/// Applies one planned action. Returns true when the unit may act again.
fn execute(state: &mut GameState, unit: &Unit, action: UnitAction) -> bool {
    match action {
        UnitAction::Move { to } | UnitAction::Explore { to } => {
            if can_enter(state, unit, to) {
                state.move_unit(unit.id, to);
                true
            } else {
                fortify(state, unit.id);
                false
            }
        }
        UnitAction::Attack { target } => {
            let legal = unit.at.distance(target) <= unit.kind.stats().range.max(1)
                && hostile_at(state, unit.owner, target);
            if legal {
                state.resolve_attack(unit.id, target);
            } else {
                fortify(state, unit.id);
            }
            false
        }
        UnitAction::FoundCity => {
            if unit.kind == super::rules::UnitKind::Settler && state.can_found_city(unit.owner, unit.at) {
                let name = state.next_city_name(unit.owner);
                state.remove_unit(unit.id, RemovalReason::Settled);
                state.found_city(Owner::Player(unit.owner), unit.at, name);
                state.check_meetings(unit.owner);
            } else {
                fortify(state, unit.id);
            }
            false
        }
        UnitAction::ImproveTile => {
            let ok = unit.kind == super::rules::UnitKind::Worker
                && state.map.tile(unit.at).is_some_and(|t| {
                    t.owner == Some(Owner::Player(unit.owner)) && !t.improved && t.terrain.improvement_bonus().is_some()
                });
            if ok {
                state.map.tile_mut(unit.at).expect("in map").improved = true;
                state.log(EventKind::TileImproved { player: unit.owner, at: unit.at }, &[unit.at], &[unit.owner]);
            }
            fortify(state, unit.id);
            false
        }
        UnitAction::Fortify => {
            fortify(state, unit.id);
            false
        }
    }
}

fn fortify(state: &mut GameState, id: UnitId) {
    if let Some(u) = state.units.get_mut(&id) {
        u.moves_left = 0;
        u.fortified = u.kind.is_military();
    }
}

pub fn can_enter(state: &GameState, unit: &Unit, to: Coord) -> bool {
    unit.at.distance(to) == 1
        && state.map.is_passable(to)
        && state.unit_at(to).is_none()
        && state.city_at(to).map_or(true, |c| c.owner == Owner::Player(unit.owner))
}

/// Whether `at` holds something `player` may attack: a unit or city of a
/// player it is at war with.
pub fn hostile_at(state: &GameState, player: PlayerId, at: Coord) -> bool {
    let ps = &state.players[player as usize];
    if let Some(c) = state.city_at(at) {
        return c.owner.player().is_some_and(|o| ps.at_war_with(o));
    }
    state.unit_at(at).is_some_and(|u| ps.at_war_with(u.owner))
}

fn diplomacy(state: &mut GameState, p: PlayerId) {
    let me = p as usize;
    let wars = state.players[me].wars().count() as u32;
    let w = apply_persona(&state.players[me].persona, &Relations { active_wars: wars });
    let offense = state.players[me].flavors.get(crate::tactical::Flavor::Offense) as f64;
    let my_strength = state.military_strength(p) as f64;
    let my_cities: Vec<Coord> = state.player_cities(p).map(|c| c.at).collect();

    for o in 0..state.players.len() {
        if o == me || !state.players[o].alive || !state.players[me].diplomacy[o].met {
            continue;
        }
        let near = state
            .player_cities(o as PlayerId)
            .any(|c| my_cities.iter().any(|m| m.distance(c.at) <= 7));
        let rel = state.players[me].diplomacy[o].clone();
        let mut opinion = rel.opinion;
        opinion += ((w.friendship - w.hostility) * 2.0).round() as i32;
        if near {
            opinion -= 2;
        }
        if rel.stance == Stance::War {
            opinion -= 3;
        }
        let decay = (w.forgiveness_decay * 2.0).round() as i32;
        opinion = if opinion > 0 { (opinion - decay).max(0) } else { (opinion + decay).min(0) };
        opinion = opinion.clamp(-100, 100);
        state.players[me].diplomacy[o].opinion = opinion;

        let their_strength = state.military_strength(o as PlayerId) as f64;
        let ratio = (my_strength + 1.0) / (their_strength + 1.0);
        if rel.stance == Stance::War {
            let since = rel.war_since.unwrap_or(state.turn);
            if state.turn >= since + 10 {
                let losing = match ratio {
                    r if r < 0.75 => 3.0,
                    r if r >= 1.25 => 0.3,
                    _ => 1.0,
                };
                let chance = w.peace_propensity * losing;
                if state.rng.chance(chance) {
                    make_peace(state, p, o as PlayerId);
                }
            }
            continue;
        }
        let stance = match opinion {
            x if x >= 30 => Stance::Friendly,
            x if x <= -30 => Stance::Hostile,
            _ => Stance::Neutral,
        };
        state.players[me].diplomacy[o].stance = stance;
        if state.turn < NO_WAR_BEFORE_TURN || state.turn < rel.peace_until {
            continue;
        }
        let knows_target =
            state.player_cities(o as PlayerId).any(|c| state.is_revealed(p, c.at));
        if !knows_target {
            continue;
        }
        let mood = match stance {
            Stance::Hostile => 2.0,
            Stance::Friendly => 0.25,
            _ => 1.0,
        };
        let reach = if near { 1.0 } else { 0.3 };
        let chance = w.war_propensity * (offense / 50.0) * ratio.clamp(0.25, 2.0).powi(2) * mood * reach;
        if state.rng.chance(chance) {
            declare_war(state, p, o as PlayerId);
        }
    }

    city_state_influence(state, p, &w);
}

pub fn declare_war(state: &mut GameState, by: PlayerId, against: PlayerId) {
    for (a, b) in [(by, against), (against, by)] {
        let r = &mut state.players[a as usize].diplomacy[b as usize];
        r.stance = Stance::War;
        r.war_since = Some(state.turn);
    }
    state.players[against as usize].diplomacy[by as usize].opinion -= 30;
    state.log_public(EventKind::WarDeclared { by, against });
}

pub fn make_peace(state: &mut GameState, a: PlayerId, b: PlayerId) {
    let until = state.turn + PEACE_TREATY_TURNS;
    for (x, y) in [(a, b), (b, a)] {
        let r = &mut state.players[x as usize].diplomacy[y as usize];
        r.stance = Stance::Neutral;
        r.war_since = None;
        r.opinion = 0;
        r.peace_until = until;
    }
    state.log_public(EventKind::PeaceMade { a: a.min(b), b: a.max(b) });
}

fn city_state_influence(state: &mut GameState, p: PlayerId, w: &crate::strategy::DiplomacyWeights) {
    let me = p as usize;
    let diplomacy = state.players[me].flavors.get(crate::tactical::Flavor::Diplomacy) as f64;
    let bonus = tables().archetypes[state.players[me].archetype].modifiers.influence;
    for k in 0..state.city_states.len() {
        let at = state.cities[&state.city_states[k].city].at;
        if !state.is_revealed(p, at) {
            continue;
        }
        let gain = w.minor_civ_investment * diplomacy * 0.4 * (100 + bonus) as f64 / 100.0;
        state.players[me].influence[k] += gain.round() as i32;
    }
    // Gold gifts go to the city-state where we trail the leader the least.
    let ps = &state.players[me];
    if ps.treasury >= 120 && diplomacy >= 40.0 && !state.city_states.is_empty() {
        let target = (0..state.city_states.len())
            .filter(|k| state.is_revealed(p, state.cities[&state.city_states[*k].city].at))
            .filter(|k| state.city_states[*k].patron != Some(p))
            .min_by_key(|k| {
                let best = state.players.iter().map(|o| o.influence[*k]).max().unwrap_or(0);
                (best - ps.influence[*k], *k)
            });
        if let Some(k) = target {
            state.players[me].treasury -= 100;
            state.players[me].influence[k] += 150;
        }
    }
}

fn growth(state: &mut GameState, p: PlayerId) {
    let happiness = state.players[p as usize].happiness;
    let ids: Vec<CityId> = state.player_cities(p).map(|c| c.id).collect();
    for id in ids {
        let city = state.cities[&id].clone();
        let out = state.city_output(&city);
        let besieged = state
            .map
            .neighbors(city.at)
            .any(|n| state.unit_at(n).is_some_and(|u| state.players[p as usize].at_war_with(u.owner)));
        let mut surplus = out.food - 2 * city.population as i32;
        if happiness < 0 && surplus > 0 {
            surplus /= 4;
        }
        let c = state.cities.get_mut(&id).expect("city");
        c.food_stock += surplus;
        if !besieged {
            c.hp = (c.hp + 10).min(c.max_hp());
        }
        let threshold = 10 + 6 * c.population as i32;
        let mut changed = false;
        if c.food_stock >= threshold {
            c.food_stock -= threshold;
            c.population += 1;
            changed = true;
        } else if c.food_stock < 0 {
            c.food_stock = 0;
            if c.population > 1 {
                c.population -= 1;
                changed = true;
            }
        }
        let pop = c.population;
        if changed {
            claim_tile(state, id);
            state.log(EventKind::SetPopulation { city: id, at: city.at, population: pop }, &[city.at], &[p]);
        }
    }
    let city_tiles: Vec<Coord> = state.player_cities(p).map(|c| c.at).collect();
    for u in state.units.values_mut().filter(|u| u.owner == p) {
        let heal = if city_tiles.contains(&u.at) { 20 } else { 10 };
        u.hp = (u.hp + heal).min(100);
    }
}

/// Claims the best unowned tile within radius 2 of a growing city.
fn claim_tile(state: &mut GameState, city: CityId) {
    let c = &state.cities[&city];
    let (at, owner) = (c.at, c.owner);
    let best = state
        .map
        .within(at, 2)
        .into_iter()
        .filter(|t| state.map.tile(*t).is_some_and(|x| x.owner.is_none()))
        .max_by_key(|t| {
            let y = state.map.tile(*t).expect("in map").yields();
            (3 * y.food + 2 * y.production + y.gold, std::cmp::Reverse(*t))
        });
    if let Some(t) = best {
        state.map.tile_mut(t).expect("in map").owner = Some(owner);
    }
}

fn world_phase(state: &mut GameState) {
    for k in 0..state.city_states.len() {
        for ps in state.players.iter_mut() {
            let inf = &mut ps.influence[k];
            *inf = (*inf - INFLUENCE_DECAY).max(0);
        }
        let current = state.city_states[k].patron;
        let best = state
            .players
            .iter()
            .filter(|ps| ps.alive && ps.influence[k] >= PATRON_THRESHOLD)
            .max_by_key(|ps| (ps.influence[k], Some(ps.id) == current, std::cmp::Reverse(ps.id)))
            .map(|ps| ps.id);
        if best != current {
            state.city_states[k].patron = best;
            state.log_public(EventKind::PatronChanged { city_state: k as u8, patron: best });
        }
    }

    let congress = state.players.iter().any(|ps| ps.alive && ps.techs_known.contains(&Tech::CivilService));
    if congress && state.turn % CONGRESS_INTERVAL == CONGRESS_INTERVAL - 1 {
        let delegates: Vec<u32> = (0..state.players.len()).map(|p| delegates(state, p as PlayerId)).collect();
        for (ps, d) in state.players.iter_mut().zip(&delegates) {
            ps.delegates = *d;
        }
        let threshold = state.players.len() as u32 + 1;
        let leader = state
            .players
            .iter()
            .filter(|ps| ps.alive && delegates[ps.id as usize] >= threshold)
            .max_by_key(|ps| (delegates[ps.id as usize], std::cmp::Reverse(ps.id)))
            .map(|ps| ps.id);
        state.world_leader = leader;
        state.log_public(EventKind::CongressVote { delegates, leader });
    }
}

/// Congress delegates: one base vote, one for Civil Service, one for the
/// Observatory, one per city-state where the player is patron.
pub fn delegates(state: &GameState, p: PlayerId) -> u32 {
    let ps = &state.players[p as usize];
    if !ps.alive {
        return 0;
    }
    let mut d = 1;
    if ps.techs_known.contains(&Tech::CivilService) {
        d += 1;
    }
    if state.player_cities(p).any(|c| c.buildings.contains(&Building::Observatory)) {
        d += 1;
    }
    d + state.city_states.iter().filter(|cs| cs.patron == Some(p)).count() as u32
}
