//! Player-visible Markdown state documents, token estimates and the tool
//! schema descriptor.

mod tokens;
mod tools;
mod verbose;

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

pub use tokens::{estimate_tokens, estimate_with, ByteQuarterEstimator, TokenEstimate, TokenEstimator};
pub use tools::{tool_schemas, ToolSchema, TOOLS_JSON};
pub use verbose::encode_verbose;

use crate::engine::hex::Owner;
use crate::engine::rules::{UnitKind, SPACESHIP_PARTS_NEEDED};
use crate::engine::turn::delegates;
use crate::engine::victory::{capitals_held, capitals_needed, influential_over};
use crate::engine::{compute_score, EngineError, Event, GameState, PlayerId, VictoryKind};
use crate::strategy::{option_catalog, Category, OverrideState};
use crate::tactical::{tactical_map, Dominance};

/// Section titles in document order.
pub const SECTIONS: [&str; 6] = ["Victory Progress", "Strategies", "Players", "Cities", "Military", "Events"];

/// Events older than this many turns are dropped from a document.
pub const EVENT_TURNS: u32 = 2;

const NO_RATIONALE: &str = "Tweaked by In-Game AI";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkdownDoc {
    pub text: String,
    /// Byte offset of each section heading, in `SECTIONS` order.
    pub offsets: Vec<(String, usize)>,
}

impl MarkdownDoc {
    /// The text of one section, heading included.
    pub fn section(&self, title: &str) -> Option<&str> {
        let i = self.offsets.iter().position(|(t, _)| t == title)?;
        let start = self.offsets[i].1;
        let end = self.offsets.get(i + 1).map_or(self.text.len(), |(_, o)| *o);
        Some(&self.text[start..end])
    }
}

/// A player's display name: the archetype, disambiguated by id when two
/// players share one.
pub fn player_name(state: &GameState, p: PlayerId) -> String {
    let name = state.archetype_name(p);
    let shared = state.players.iter().filter(|o| state.archetype_name(o.id) == name).count() > 1;
    if shared {
        format!("{name} {p}")
    } else {
        name.to_string()
    }
}

fn owner_name(state: &GameState, o: Owner) -> String {
    match o {
        Owner::Player(p) => player_name(state, p),
        Owner::CityState(k) => format!("City-State {}", state.city_states[k as usize].name),
    }
}

struct Md(String);

impl Md {
    fn line(&mut self, depth: usize, text: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{}- {text}", "  ".repeat(depth));
    }

    fn kv(&mut self, depth: usize, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{}- {key}: {value}", "  ".repeat(depth));
    }

    fn head(&mut self, depth: usize, title: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{} {title}", "#".repeat(depth));
    }

    fn blank(&mut self) {
        self.0.push('\n');
    }
}

/// Renders the document for `viewer`. `since_event` is the first event
/// index not yet shown to this viewer.
pub fn encode_state(
    state: &GameState,
    viewer: PlayerId,
    overrides: &OverrideState,
    since_event: u64,
) -> Result<MarkdownDoc, EngineError> {
    state.live_player(viewer)?;
    let mut md = Md(String::new());
    let _ = writeln!(md.0, "You, Player {viewer}, are making strategic decisions after turn {}.\n", state.turn);
    let mut offsets = Vec::with_capacity(SECTIONS.len());

    offsets.push((SECTIONS[0].to_string(), md.0.len()));
    victory_progress(&mut md, state, viewer);
    offsets.push((SECTIONS[1].to_string(), md.0.len()));
    strategies(&mut md, state, viewer, overrides)?;
    offsets.push((SECTIONS[2].to_string(), md.0.len()));
    players(&mut md, state, viewer);
    offsets.push((SECTIONS[3].to_string(), md.0.len()));
    cities(&mut md, state, viewer);
    offsets.push((SECTIONS[4].to_string(), md.0.len()));
    military(&mut md, state, viewer)?;
    offsets.push((SECTIONS[5].to_string(), md.0.len()));
    let (events, truncated) = visible_events(state, viewer, since_event);
    md.head(1, "Events");
    md.0.push_str("Events: events since you last made a decision.\n");
    md.0.push_str(&encode_events(&events, truncated));
    Ok(MarkdownDoc { text: md.0, offsets })
}

/// Events the viewer witnessed since `since_event`, capped to the last
/// `EVENT_TURNS` turns. The flag reports whether the cap dropped any.
pub fn visible_events(state: &GameState, viewer: PlayerId, since_event: u64) -> (Vec<&Event>, bool) {
    let floor = state.turn.saturating_sub(EVENT_TURNS);
    let mut truncated = false;
    let mut out = Vec::new();
    for e in state.event_log.iter().filter(|e| e.index >= since_event && e.witnessed_by(viewer)) {
        if e.turn < floor {
            truncated = true;
        } else {
            out.push(e);
        }
    }
    (out, truncated)
}

/// Events grouped under `## Turn N` headings, numbered within each turn.
pub fn encode_events(events: &[&Event], truncated: bool) -> String {
    let mut md = Md(String::new());
    if truncated {
        md.0.push_str("(truncated)\n");
    }
    let mut by_turn: BTreeMap<u32, Vec<&Event>> = BTreeMap::new();
    for e in events {
        by_turn.entry(e.turn).or_default().push(e);
    }
    for (turn, mut list) in by_turn {
        list.sort_by_key(|e| e.index);
        md.head(2, format!("Turn {turn}"));
        for (i, e) in list.iter().enumerate() {
            md.blank();
            md.head(3, i);
            md.kv(0, "Type", e.kind.name());
            for (k, v) in e.kind.fields() {
                md.kv(0, k, v);
            }
        }
        md.blank();
    }
    md.0
}

fn victory_progress(md: &mut Md, state: &GameState, viewer: PlayerId) {
    let cfg = &state.config;
    let me = &state.players[viewer as usize];
    md.head(1, "Victory Progress");
    md.0.push_str("Victory Progress: current progress towards each type of victory.\n");
    let off = |md: &mut Md, key: &str| md.kv(0, key, "Disabled");
    if cfg.enabled(VictoryKind::Domination) {
        md.line(0, "DominationVictory:");
        md.kv(1, "CapitalsNeeded", capitals_needed(state));
        md.kv(1, "CapitalsHeld", capitals_held(state, viewer));
    } else {
        off(md, "DominationVictory");
    }
    if !cfg.enabled(VictoryKind::Science) {
        off(md, "ScienceVictory");
    } else if me.techs_known.contains(&crate::engine::rules::Tech::Astronomy) {
        md.line(0, "ScienceVictory:");
        md.kv(1, "SpaceshipParts", format!("{}/{}", me.spaceship_parts, SPACESHIP_PARTS_NEEDED));
    } else {
        md.kv(0, "ScienceVictory", "Unlocked in later eras");
    }
    if cfg.enabled(VictoryKind::Cultural) {
        let rivals: Vec<_> = state.players.iter().filter(|o| o.alive && o.id != viewer).collect();
        md.line(0, "CulturalVictory:");
        md.kv(1, "CivsNeeded", rivals.len());
        md.kv(1, "InfluentialCivs", influential_over(state, viewer));
        md.kv(1, "TourismPerTurn", me.tourism_rate);
        for o in rivals.iter().filter(|o| me.has_met(o.id)) {
            let pct = if o.culture_total > 0 { me.tourism_to[o.id as usize] * 100 / o.culture_total } else { 0 };
            md.kv(1, &format!("InfluenceOn{}", player_name(state, o.id).replace(' ', "")), format!("{pct}%"));
        }
    } else {
        off(md, "CulturalVictory");
    }
    let congress = state.players.iter().any(|p| p.alive && p.techs_known.contains(&crate::engine::rules::Tech::CivilService));
    if !cfg.enabled(VictoryKind::Diplomatic) {
        off(md, "DiplomaticVictory");
    } else if congress {
        md.line(0, "DiplomaticVictory:");
        md.kv(1, "DelegatesNeeded", state.players.len() + 1);
        md.kv(1, "Delegates", delegates(state, viewer));
        let leader = state.world_leader.map_or("None".to_string(), |p| player_name(state, p));
        md.kv(1, "WorldLeader", leader);
    } else {
        md.kv(0, "DiplomaticVictory", "Unlocked in later eras");
    }
    if cfg.enabled(VictoryKind::Time) {
        md.line(0, "TimeVictory:");
        md.kv(1, "TurnsLeft", cfg.max_turns.saturating_sub(state.turn));
    } else {
        off(md, "TimeVictory");
    }
    md.blank();
}

fn rationale(o: &OverrideState, c: Category) -> &str {
    o.rationale.get(c).unwrap_or(NO_RATIONALE)
}

fn strategies(md: &mut Md, state: &GameState, viewer: PlayerId, o: &OverrideState) -> Result<(), EngineError> {
    let me = &state.players[viewer as usize];
    let catalog = option_catalog(state, viewer)?;
    md.head(1, "Strategies");
    md.0.push_str("Strategies: existing strategic decisions and available options for you.\n");
    md.head(2, "Strategy");
    md.kv(0, "Rationale", rationale(o, Category::Strategy));
    md.blank();
    md.head(3, "GrandStrategy");
    md.kv(0, "Current", me.strategy.grand);
    md.blank();
    md.head(4, "Options");
    for (i, g) in catalog.grand.iter().enumerate() {
        md.kv(0, &i.to_string(), &g.name);
    }
    md.blank();
    for (title, current, options) in [
        ("EconomicStrategies", me.strategy.economic.iter().map(|e| e.name()).collect::<Vec<_>>(), &catalog.economic),
        ("MilitaryStrategies", me.strategy.military.iter().map(|m| m.name()).collect(), &catalog.military),
    ] {
        md.head(3, title);
        md.blank();
        md.head(4, "Current");
        for (i, c) in current.iter().enumerate() {
            md.kv(0, &i.to_string(), c);
        }
        md.blank();
        md.head(4, "Options");
        for e in options {
            md.kv(0, &e.name, &e.description);
        }
        md.blank();
    }

    md.head(2, "Persona");
    for (p, v) in me.persona.iter() {
        md.kv(0, p.name(), v);
    }
    md.kv(0, "Rationale", rationale(o, Category::Persona));
    md.blank();

    md.head(2, "Research");
    md.kv(0, "Current", me.research.map_or("None", |x| x.name()));
    let next = if o.controlled.research { o.next_research } else { me.next_research };
    md.kv(0, "Next", next.map_or("None", |x| x.name()));
    md.kv(0, "Rationale", rationale(o, Category::Research));
    md.blank();
    md.head(3, "Options");
    for e in &catalog.research {
        md.kv(0, &e.name, &e.description);
        let tech = crate::engine::rules::Tech::from_name(&e.name).expect("catalog tech");
        let leads: Vec<&str> = tech.leads_to().into_iter().map(|x| x.name()).collect();
        if !leads.is_empty() {
            let _ = writeln!(md.0, "  Leading to: {}", leads.join(", "));
        }
    }
    md.blank();

    md.head(2, "Policies");
    let next = if o.controlled.policy { o.next_policy } else { me.next_policy };
    md.kv(0, "Next", next.map_or("None".to_string(), |c| c.label()));
    md.kv(0, "Rationale", rationale(o, Category::Policy));
    md.kv(0, "Adopted", {
        let mut names: Vec<&str> = me.policies_adopted.iter().map(|p| p.name()).collect();
        names.extend(me.ideology.map(|i| i.name()));
        if names.is_empty() {
            "None".to_string()
        } else {
            names.join(", ")
        }
    });
    md.blank();
    md.head(3, "Options");
    for e in &catalog.policy {
        md.kv(0, &e.name, &e.description);
    }
    md.blank();
    Ok(())
}

fn players(md: &mut Md, state: &GameState, viewer: PlayerId) {
    let me = &state.players[viewer as usize];
    md.head(1, "Players");
    md.0.push_str("Players: summary reports about visible players in the world.\n");
    for p in &state.players {
        let id = p.id;
        md.head(2, format!("Player {id}"));
        if id != viewer && !me.has_met(id) {
            md.line(0, "Unmet Major Civilization");
            md.blank();
            continue;
        }
        md.kv(0, "Civilization", player_name(state, id));
        if !p.alive {
            md.kv(0, "Status", "Eliminated");
            md.blank();
            continue;
        }
        let score = compute_score(state, id).unwrap_or(0);
        let cities = state.player_cities(id).count();
        let territory = state.map.tiles.iter().filter(|t| t.owner == Some(Owner::Player(id))).count();
        md.kv(0, "Score", score);
        md.kv(0, "Territory", territory);
        md.kv(0, "Cities", cities);
        md.kv(0, "Population", state.total_population(id));
        md.kv(0, "Technologies", p.techs_known.len());
        md.kv(0, "Policies", p.policy_count());
        md.kv(0, "CulturePerTurn", p.culture_rate);
        md.kv(0, "TourismPerTurn", p.tourism_rate);
        if id == viewer {
            md.kv(0, "Gold", p.treasury);
            md.kv(0, "GoldPerTurn", p.gold_rate);
            md.kv(0, "SciencePerTurn", p.science_rate);
            md.kv(0, "FaithPerTurn", p.faith_rate);
            md.kv(0, "Happiness", p.happiness);
            md.kv(0, "CurrentResearch", p.research.map_or("None", |t| t.name()));
            let met: Vec<_> = state.players.iter().filter(|o| o.alive && o.id != id && p.has_met(o.id)).collect();
            md.line(0, "MyEvaluations:");
            let friend = met.iter().filter(|o| p.diplomacy[o.id as usize].opinion > 0).max_by_key(|o| (p.diplomacy[o.id as usize].opinion, std::cmp::Reverse(o.id)));
            let rival = met.iter().max_by_key(|o| (compute_score(state, o.id).unwrap_or(0), std::cmp::Reverse(o.id)));
            md.kv(1, "TopFriend", friend.map_or("None".to_string(), |o| player_name(state, o.id)));
            md.kv(1, "TopCompetitor", rival.map_or("None".to_string(), |o| player_name(state, o.id)));
        } else {
            let rel = &me.diplomacy[id as usize];
            md.kv(0, "OurStance", rel.stance);
            md.kv(0, "OurOpinion", rel.opinion);
            md.kv(0, "TheirStance", p.diplomacy[viewer as usize].stance);
            let wars: Vec<String> = p
                .wars()
                .filter(|o| *o == viewer || me.has_met(*o))
                .map(|o| player_name(state, o))
                .collect();
            md.kv(0, "AtWarWith", if wars.is_empty() { "None".to_string() } else { wars.join(", ") });
        }
        md.blank();
    }
    for cs in &state.city_states {
        let c = &state.cities[&cs.city];
        if !state.is_revealed(viewer, c.at) {
            md.head(2, format!("City-State {}", cs.id));
            md.line(0, "Unmet Minor Civilization");
            md.blank();
            continue;
        }
        md.head(2, format!("City-State {}", cs.name));
        md.kv(0, "Population", c.population);
        md.kv(0, "Patron", cs.patron.map_or("None".to_string(), |p| player_name(state, p)));
        md.line(0, "Influence:");
        for p in state.players.iter().filter(|p| p.alive && (p.id == viewer || me.has_met(p.id))) {
            md.kv(1, &player_name(state, p.id), p.influence[cs.id as usize] / 10);
        }
        md.blank();
    }
}

fn cities(md: &mut Md, state: &GameState, viewer: PlayerId) {
    md.head(1, "Cities");
    md.0.push_str("Cities: summary reports about discovered cities in the world.\n");
    let mut groups: BTreeMap<(u8, String), Vec<&crate::engine::City>> = BTreeMap::new();
    for c in state.cities.values().filter(|c| c.owner == Owner::Player(viewer) || state.is_revealed(viewer, c.at)) {
        let key = match c.owner {
            Owner::Player(p) if p == viewer => (0, player_name(state, p)),
            Owner::Player(p) => (1, player_name(state, p)),
            Owner::CityState(_) => (2, "City-States".to_string()),
        };
        groups.entry(key).or_default().push(c);
    }
    for ((_, name), list) in groups {
        md.head(2, format!("Player: {name}"));
        for c in list {
            md.line(0, format!("{}:", c.name));
            md.kv(1, "ID", c.id);
            md.kv(1, "X", c.at.x);
            md.kv(1, "Y", c.at.y);
            md.kv(1, "Population", c.population);
            md.kv(1, "DefenseStrength", state.city_strength(c).round() as i64);
            md.kv(1, "HP", c.hp);
            if c.owner != Owner::Player(viewer) {
                continue;
            }
            let out = state.city_output(c);
            md.kv(1, "FoodStored", c.food_stock);
            md.kv(1, "FoodPerTurn", out.food - 2 * c.population as i32);
            md.kv(1, "ProductionStored", c.production_stock);
            md.kv(1, "ProductionPerTurn", out.production);
            md.kv(1, "CurrentProduction", c.producing.map_or("None", |p| p.name()));
            md.kv(1, "GoldPerTurn", out.gold);
            md.kv(1, "SciencePerTurn", out.science);
            md.kv(1, "CulturePerTurn", out.culture);
            md.kv(1, "TourismPerTurn", out.tourism);
            let wonders = c.buildings.iter().filter(|b| b.is_wonder()).count();
            md.kv(1, "BuildingCount", c.buildings.len() - wonders);
            md.kv(1, "WonderCount", wonders);
        }
        md.blank();
    }
}

fn military(md: &mut Md, state: &GameState, viewer: PlayerId) -> Result<(), EngineError> {
    md.head(1, "Military");
    md.0.push_str("Military: summary reports about tactical zones and visible units.\n");
    let tmap = tactical_map(state, viewer)?;
    let visible: Vec<_> =
        state.units.values().filter(|u| u.owner == viewer || state.is_visible(viewer, u.at)).collect();

    md.head(2, "Unit Stats");
    let kinds: std::collections::BTreeSet<UnitKind> = visible.iter().map(|u| u.kind).collect();
    for k in kinds {
        let s = k.stats();
        md.line(0, format!("{k}:"));
        md.kv(1, "Class", s.class);
        md.kv(1, "Strength", s.strength);
        if s.ranged_strength > 0 {
            md.kv(1, "RangedStrength", s.ranged_strength);
        }
        md.kv(1, "Moves", s.moves);
    }
    md.blank();

    let mut units_in: BTreeMap<usize, BTreeMap<String, BTreeMap<UnitKind, usize>>> = BTreeMap::new();
    for u in &visible {
        let z = tmap.tile_zone[state.tile_index(u.at)];
        *units_in.entry(z).or_default().entry(player_name(state, u.owner)).or_default().entry(u.kind).or_insert(0) += 1;
    }
    let listed: Vec<usize> =
        tmap.zones.iter().filter(|z| z.city.is_some() || units_in.contains_key(&z.id)).map(|z| z.id).collect();
    let me = &state.players[viewer as usize];
    for id in &listed {
        let z = &tmap.zones[*id];
        let posture = match z.owner {
            Some(Owner::Player(p)) if p == viewer => "Friendly",
            Some(Owner::Player(p)) if me.at_war_with(p) => "Enemy",
            Some(_) => "Neutral",
            None => "Wild",
        };
        md.head(2, format!("{posture} Zone {id}"));
        md.kv(0, "ZoneValue", z.zone_value);
        md.kv(0, "Dominance", z.dominance);
        for (key, v) in
            [("FriendlyStrength", z.friendly_strength), ("EnemyStrength", z.enemy_strength), ("NeutralStrength", z.neutral_strength)]
        {
            if v > 0 {
                md.kv(0, key, v);
            }
        }
        if let Some(c) = z.city {
            md.kv(0, "City", &state.cities[&c].name);
        }
        md.kv(0, "Plots", z.plots);
        md.kv(0, "CenterX", z.center.x);
        md.kv(0, "CenterY", z.center.y);
        if let Some(owners) = units_in.get(id) {
            md.line(0, "Units:");
            for (owner, kinds) in owners {
                md.line(1, format!("{owner}:"));
                for (k, n) in kinds {
                    md.kv(2, k.name(), n);
                }
            }
        }
        let nb: Vec<usize> = z.neighbors.iter().copied().filter(|n| listed.contains(n)).collect();
        if !nb.is_empty() {
            md.line(0, "Neighbors:");
            for (i, n) in nb.iter().enumerate() {
                md.kv(1, &i.to_string(), n);
            }
        }
        if z.dominance == Dominance::Enemy && posture == "Friendly" {
            md.kv(0, "Alert", "Enemy forces dominate this zone");
        }
        md.blank();
    }
    Ok(())
}
