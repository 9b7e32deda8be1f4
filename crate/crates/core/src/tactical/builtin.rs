//! The rule-based macro strategist every player falls back on.

use crate::data::tables;
use crate::engine::economy::{open_branch, policy_legal};
use crate::engine::rules::{Ideology, Policy, PolicyChoice, Tech, UnitClass};
use crate::engine::{GameState, PlayerId, Stance, VictoryKind};
use crate::strategy::{EconomicStrategy, GrandStrategy, MilitaryStrategy, Persona, StrategySet};

use super::production::has_free_site;

/// Fitness bonus the current grand strategy keeps, to avoid flip-flopping.
pub const GRAND_STICKINESS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyDecision {
    pub strategy: StrategySet,
    pub research: Option<Tech>,
    pub policy: Option<PolicyChoice>,
    pub persona: Persona,
}

pub fn victory_for(g: GrandStrategy) -> VictoryKind {
    match g {
        GrandStrategy::Conquest => VictoryKind::Domination,
        GrandStrategy::Culture => VictoryKind::Cultural,
        GrandStrategy::Spaceship => VictoryKind::Science,
        GrandStrategy::UnitedNations => VictoryKind::Diplomatic,
    }
}

/// Own military over the strongest live rival's (1.0 with no rivals).
pub fn military_ratio(state: &GameState, p: PlayerId) -> f64 {
    let mine = state.military_strength(p) as f64;
    let rival = state
        .players
        .iter()
        .filter(|o| o.alive && o.id != p)
        .map(|o| state.military_strength(o.id))
        .max();
    rival.map_or(1.0, |r| (mine + 1.0) / (r as f64 + 1.0))
}

/// Own military over the summed strength of everyone we are at war with.
pub fn war_ratio(state: &GameState, p: PlayerId) -> Option<f64> {
    let ps = &state.players[p as usize];
    let enemies: Vec<PlayerId> = ps.wars().collect();
    if enemies.is_empty() {
        return None;
    }
    let theirs: i64 = enemies.iter().map(|o| state.military_strength(*o)).sum();
    Some((state.military_strength(p) as f64 + 1.0) / (theirs as f64 + 1.0))
}

pub fn grand_fitness(state: &GameState, p: PlayerId, g: GrandStrategy) -> f64 {
    let ps = &state.players[p as usize];
    let f = &tables().rules.builtin.grand_fitness;
    let bias = tables().archetypes[ps.archetype].grand_bias[g.index()] as f64;
    let features = match g {
        GrandStrategy::Conquest => {
            f.conquest_military_ratio * military_ratio(state, p).min(3.0)
                + if ps.wars().next().is_some() { f.conquest_at_war } else { 0.0 }
        }
        GrandStrategy::Culture => {
            f.culture_rate * ps.culture_rate as f64 + f.culture_wonders * state.wonders_owned(p) as f64
        }
        GrandStrategy::Spaceship => {
            f.spaceship_science_rate * ps.science_rate as f64 + f.spaceship_techs * ps.techs_known.len() as f64
        }
        GrandStrategy::UnitedNations => {
            f.united_nations_influence * ps.influence.iter().sum::<i32>() as f64
                + f.united_nations_gold * ps.treasury as f64
        }
    };
    f.bias * bias + features
}

pub fn choose_grand(state: &GameState, p: PlayerId) -> GrandStrategy {
    let current = state.players[p as usize].strategy.grand;
    GrandStrategy::ALL
        .iter()
        .copied()
        .filter(|g| state.config.enabled(victory_for(*g)))
        .map(|g| {
            let s = grand_fitness(state, p, g) + if g == current { GRAND_STICKINESS } else { 0.0 };
            (s, g)
        })
        .fold(None::<(f64, GrandStrategy)>, |best, (s, g)| match best {
            Some((bs, _)) if bs >= s => best,
            _ => Some((s, g)),
        })
        .map_or(current, |(_, g)| g)
}

pub fn economic_triggers(state: &GameState, p: PlayerId) -> Vec<EconomicStrategy> {
    use EconomicStrategy as E;
    let r = &tables().rules.builtin;
    let ps = &state.players[p as usize];
    let mut out = Vec::new();
    let cities = state.player_cities(p).count();
    if state.turn < r.early_expansion_until_turn && cities < r.early_expansion_max_cities && has_free_site(state, p) {
        out.push(E::EarlyExpansion);
    } else {
        out.push(E::EnoughExpansion);
    }
    let unrevealed = 1.0 - ps.revealed.count() as f64 / state.map.len() as f64;
    let at_war = ps.wars().next().is_some();
    if unrevealed > r.need_recon_unrevealed && !at_war {
        out.push(E::NeedRecon);
    } else if unrevealed < r.enough_recon_unrevealed {
        out.push(E::EnoughRecon);
    }
    // There is no naval exploration on these maps.
    out.push(E::EnoughReconSea);
    if ps.happiness <= r.happiness_critical {
        out.push(E::NeedHappinessCritical);
    } else if ps.happiness < r.happiness_low {
        out.push(E::NeedHappiness);
    }
    let leader = state
        .players
        .iter()
        .filter(|o| o.alive && o.id != p)
        .all(|o| o.techs_known.len() < ps.techs_known.len());
    if leader && !ps.techs_known.is_empty() {
        out.push(E::TechLeader);
    }
    if ps.faith_rate >= r.piety_faith_rate {
        out.push(E::StartedPiety);
    }
    out
}

pub fn military_triggers(state: &GameState, p: PlayerId, grand: GrandStrategy) -> Vec<MilitaryStrategy> {
    use MilitaryStrategy as M;
    let r = &tables().rules.builtin;
    let ps = &state.players[p as usize];
    let mut out = Vec::new();
    let at_war = ps.wars().next().is_some();
    if at_war {
        out.push(M::AtWar);
    }
    let hostile = ps.diplomacy.iter().filter(|d| d.met && d.stance == Stance::Hostile).count();
    if hostile >= r.mobilization_hostile_rivals || (grand == GrandStrategy::Conquest && !at_war) {
        out.push(M::WarMobilization);
    }
    let has_ranged = state.player_units(p).any(|u| u.kind.class() == UnitClass::Ranged);
    if state.turn < r.need_ranged_before_turn && !has_ranged && (at_war || hostile > 0) {
        out.push(M::NeedRangedEarly);
    }
    if let Some(ratio) = war_ratio(state, p) {
        if ratio >= r.winning_wars_ratio {
            out.push(M::WinningWars);
        } else if ratio < r.losing_wars_ratio {
            out.push(M::LosingWars);
        }
    }
    out
}

/// Techs that advance a grand strategy.
pub fn strategy_techs(g: GrandStrategy) -> &'static [Tech] {
    use Tech::*;
    match g {
        GrandStrategy::Conquest => &[Archery, BronzeWorking, HorsebackRiding, IronWorking],
        GrandStrategy::Culture => &[Writing, Philosophy],
        GrandStrategy::Spaceship => &[Writing, Philosophy, Currency, Astronomy],
        GrandStrategy::UnitedNations => &[Writing, Currency, BronzeWorking, CivilService],
    }
}

fn leads_to_goal(t: Tech, goals: &[Tech]) -> bool {
    goals.contains(&t) || t.leads_to().into_iter().any(|n| leads_to_goal(n, goals))
}

/// Cheapest available tech on the way to the grand strategy's goals, or
/// the cheapest available tech when every goal is known.
pub fn choose_research(state: &GameState, p: PlayerId, grand: GrandStrategy) -> Option<Tech> {
    let ps = &state.players[p as usize];
    let goals: Vec<Tech> =
        strategy_techs(grand).iter().copied().filter(|t| !ps.techs_known.contains(t)).collect();
    let avail = state.available_techs(p);
    let key = |t: &Tech| (t.cost(), t.index());
    avail
        .iter()
        .copied()
        .filter(|t| leads_to_goal(*t, &goals))
        .min_by_key(key)
        .or_else(|| avail.iter().copied().min_by_key(key))
}

pub fn preferred_ideology(g: GrandStrategy) -> Ideology {
    match g {
        GrandStrategy::Conquest => Ideology::Autocracy,
        GrandStrategy::Spaceship => Ideology::Order,
        GrandStrategy::Culture | GrandStrategy::UnitedNations => Ideology::Freedom,
    }
}

pub fn preferred_opener(g: GrandStrategy) -> Policy {
    match g {
        GrandStrategy::Conquest => Policy::Honor,
        GrandStrategy::Culture => Policy::Tradition,
        GrandStrategy::Spaceship | GrandStrategy::UnitedNations => Policy::Liberty,
    }
}

pub fn choose_policy(state: &GameState, p: PlayerId, grand: GrandStrategy) -> Option<PolicyChoice> {
    let ps = &state.players[p as usize];
    if let Some(b) = open_branch(ps) {
        let next = b.policies().into_iter().find(|x| !ps.has_policy(*x)).map(PolicyChoice::Policy);
        if next.is_some_and(|c| policy_legal(ps, c)) {
            return next;
        }
    }
    let ideology = PolicyChoice::Ideology(preferred_ideology(grand));
    if policy_legal(ps, ideology) {
        return Some(ideology);
    }
    let opener = PolicyChoice::Policy(preferred_opener(grand));
    if policy_legal(ps, opener) {
        return Some(opener);
    }
    state.legal_policies(p).first().copied()
}

/// One builtin decision for a live player: strategies from the rule table,
/// research and policy picks, and an unchanged persona.
pub fn builtin_macro_decide(state: &GameState, p: PlayerId) -> StrategyDecision {
    let grand = choose_grand(state, p);
    let strategy = StrategySet::new(grand)
        .with_economic(economic_triggers(state, p))
        .with_military(military_triggers(state, p, grand));
    StrategyDecision {
        strategy,
        research: choose_research(state, p, grand),
        policy: choose_policy(state, p, grand),
        persona: state.players[p as usize].persona,
    }
}
