//! The macro-decision surface: option catalogs, strategy-to-flavor and
//! persona-to-diplomacy mappings, override queues and choice validation.

mod types;

use serde::{Deserialize, Serialize};

pub use types::*;

use crate::data::{tables, DiplomacyWeight, StrategyRef};
use crate::engine::rules::{PolicyChoice, Tech};
use crate::engine::{EngineError, GameState, PlayerId};
use crate::tactical::{FlavorDelta, FlavorVector};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionEntry {
    pub name: String,
    pub description: String,
}

/// Everything a strategist may legally pick this turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionCatalog {
    pub grand: Vec<OptionEntry>,
    pub economic: Vec<OptionEntry>,
    pub military: Vec<OptionEntry>,
    pub research: Vec<OptionEntry>,
    pub policy: Vec<OptionEntry>,
}

named_enum! {
    pub enum ChoiceKind {
        Grand,
        Economic,
        Military,
        Research,
        Policy,
        Persona,
    }
}

impl OptionCatalog {
    pub fn entries(&self, kind: ChoiceKind) -> &[OptionEntry] {
        match kind {
            ChoiceKind::Grand => &self.grand,
            ChoiceKind::Economic => &self.economic,
            ChoiceKind::Military => &self.military,
            ChoiceKind::Research => &self.research,
            ChoiceKind::Policy => &self.policy,
            ChoiceKind::Persona => &[],
        }
    }

    pub fn contains(&self, kind: ChoiceKind, name: &str) -> bool {
        self.entries(kind).iter().any(|e| e.name == name)
    }
}

fn entry(name: &str, description: &str) -> OptionEntry {
    OptionEntry { name: name.to_string(), description: description.to_string() }
}

/// Catalog for a live player, in fixed enum order.
pub fn option_catalog(state: &GameState, player: PlayerId) -> Result<OptionCatalog, EngineError> {
    state.live_player(player)?;
    let t = tables();
    let strat = |r: StrategyRef| entry(r.name(), &t.strategies.entry(r).description);
    Ok(OptionCatalog {
        grand: GrandStrategy::ALL.iter().map(|g| strat(StrategyRef::Grand(*g))).collect(),
        economic: EconomicStrategy::ALL.iter().map(|e| strat(StrategyRef::Economic(*e))).collect(),
        military: MilitaryStrategy::ALL.iter().map(|m| strat(StrategyRef::Military(*m))).collect(),
        research: state.available_techs(player).into_iter().map(|x| entry(x.name(), t.descriptions.tech(x))).collect(),
        policy: state
            .legal_policies(player)
            .into_iter()
            .map(|c| entry(&c.label(), t.descriptions.policy(c)))
            .collect(),
    })
}

/// Summed flavor delta of every strategy in a set (grand included).
pub fn strategy_delta(set: &StrategySet) -> FlavorDelta {
    let table = &tables().strategies;
    let mut d = table.entry(StrategyRef::Grand(set.grand)).delta;
    for e in &set.economic {
        d.add(&table.entry(StrategyRef::Economic(*e)).delta);
    }
    for m in &set.military {
        d.add(&table.entry(StrategyRef::Military(*m)).delta);
    }
    d
}

/// Base flavors plus the summed deltas, clamped once at the end.
pub fn apply_strategy_set(set: &StrategySet, base: &FlavorVector) -> FlavorVector {
    base.with_delta(&strategy_delta(set))
}

/// Diplomatic context the persona mapping depends on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Relations {
    pub active_wars: u32,
}

/// Stance-transition propensities derived from a persona.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiplomacyWeights {
    pub war_propensity: f64,
    pub hostility: f64,
    pub friendship: f64,
    pub denounce: f64,
    pub forgiveness_decay: f64,
    pub deception: f64,
    pub minor_civ_investment: f64,
    pub peace_propensity: f64,
    pub wonder_drive: f64,
    pub victory_drive: f64,
}

/// Linear persona mapping from the coefficient table. Every additional
/// war makes a new one less likely and peace more likely.
pub fn apply_persona(p: &Persona, relations: &Relations) -> DiplomacyWeights {
    let c = &tables().persona;
    let w = |k: DiplomacyWeight| c.get(k).evaluate(p);
    let wars = 1.0 + relations.active_wars as f64;
    DiplomacyWeights {
        war_propensity: w(DiplomacyWeight::WarPropensity) / wars,
        hostility: w(DiplomacyWeight::Hostility),
        friendship: w(DiplomacyWeight::Friendship),
        denounce: w(DiplomacyWeight::Denounce),
        forgiveness_decay: w(DiplomacyWeight::ForgivenessDecay),
        deception: w(DiplomacyWeight::Deception),
        minor_civ_investment: w(DiplomacyWeight::MinorCivInvestment),
        peace_propensity: w(DiplomacyWeight::PeacePropensity) * wars,
        wonder_drive: w(DiplomacyWeight::WonderDrive),
        victory_drive: w(DiplomacyWeight::VictoryDrive),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ChoiceError {
    #[error("{value:?} is not a legal {kind} option{}", suggestion_text(.suggestion))]
    NotInCatalog { kind: ChoiceKind, value: String, suggestion: Option<String> },
    #[error("{value:?} cannot be active together with {conflicts_with:?}")]
    Exclusive { kind: ChoiceKind, value: String, conflicts_with: String },
    #[error("persona parameter {param} = {value} is outside [1, 10]")]
    PersonaRange { param: String, value: i64 },
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|s| format!(" (did you mean {s:?}?)")).unwrap_or_default()
}

fn nearest<'a>(value: &str, names: impl Iterator<Item = &'a str>) -> Option<String> {
    names
        .map(|n| (strsim::levenshtein(&value.to_lowercase(), &n.to_lowercase()), n))
        .min()
        .map(|(_, n)| n.to_string())
}

fn not_in_catalog(kind: ChoiceKind, value: &str, names: Vec<&str>) -> ChoiceError {
    ChoiceError::NotInCatalog { kind, value: value.to_string(), suggestion: nearest(value, names.into_iter()) }
}

/// Membership and exclusivity check for a single choice. Exclusivity is
/// judged against the strategies in `active`. Never mutates anything.
pub fn validate_choice(
    kind: ChoiceKind,
    value: &str,
    catalog: &OptionCatalog,
    active: &StrategySet,
) -> Result<(), ChoiceError> {
    if kind == ChoiceKind::Persona {
        return match PersonaParam::from_name(value) {
            Some(_) => Ok(()),
            None => Err(not_in_catalog(kind, value, PersonaParam::ALL.iter().map(|p| p.name()).collect())),
        };
    }
    let found = catalog.entries(kind).iter().any(|e| e.name == value)
        || (kind == ChoiceKind::Policy
            && PolicyChoice::parse(value).is_some_and(|c| catalog.contains(kind, &c.label())));
    if !found {
        return Err(not_in_catalog(kind, value, catalog.entries(kind).iter().map(|e| e.name.as_str()).collect()));
    }
    let Some(r) = StrategyRef::parse(value) else { return Ok(()) };
    if let Some(partner) = tables().strategies.exclusive_partner(r) {
        let on = match partner {
            StrategyRef::Grand(g) => active.grand == g,
            StrategyRef::Economic(e) => active.economic.contains(&e),
            StrategyRef::Military(m) => active.military.contains(&m),
        };
        if on {
            return Err(ChoiceError::Exclusive {
                kind,
                value: value.to_string(),
                conflicts_with: partner.name().to_string(),
            });
        }
    }
    Ok(())
}

/// Checks a complete proposed strategy set: every name in the catalog and
/// no exclusive pair inside the set.
pub fn validate_strategy_set(set: &StrategySet, catalog: &OptionCatalog) -> Result<(), ChoiceError> {
    let empty = StrategySet::new(set.grand);
    validate_choice(ChoiceKind::Grand, set.grand.name(), catalog, &empty)?;
    let mut seen = empty.clone();
    for e in &set.economic {
        validate_choice(ChoiceKind::Economic, e.name(), catalog, &seen)?;
        seen.economic.insert(*e);
    }
    for m in &set.military {
        validate_choice(ChoiceKind::Military, m.name(), catalog, &seen)?;
        seen.military.insert(*m);
    }
    Ok(())
}

/// A strategist decision addressed to one category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Override {
    Research(String),
    Policy(String),
    /// Partial update: only the named parameters change.
    Persona(Vec<(String, i64)>),
    /// `None` leaves that list to the builtin triggers.
    Strategy { grand: String, economic: Option<Vec<String>>, military: Option<Vec<String>> },
}

impl Override {
    pub fn category(&self) -> Category {
        match self {
            Override::Research(_) => Category::Research,
            Override::Policy(_) => Category::Policy,
            Override::Persona(_) => Category::Persona,
            Override::Strategy { .. } => Category::Strategy,
        }
    }
}

fn parse_named<T>(kind: ChoiceKind, value: &str, parse: fn(&str) -> Option<T>, all: Vec<&str>) -> Result<T, ChoiceError> {
    parse(value).ok_or_else(|| not_in_catalog(kind, value, all))
}

/// Validates `choice` against the catalog and returns the updated state.
/// On error the input state is untouched.
pub fn queue_override(
    choice: &Override,
    rationale: &str,
    state: &OverrideState,
    catalog: &OptionCatalog,
) -> Result<OverrideState, ChoiceError> {
    let mut next = state.clone();
    match choice {
        Override::Research(name) => {
            validate_choice(ChoiceKind::Research, name, catalog, &state.strategy)?;
            next.next_research = Tech::from_name(name);
        }
        Override::Policy(name) => {
            validate_choice(ChoiceKind::Policy, name, catalog, &state.strategy)?;
            next.next_policy = PolicyChoice::parse(name);
        }
        Override::Persona(updates) => {
            for (param, value) in updates {
                validate_choice(ChoiceKind::Persona, param, catalog, &state.strategy)?;
                let p = PersonaParam::from_name(param).expect("validated");
                next.persona
                    .set(p, *value)
                    .map_err(|_| ChoiceError::PersonaRange { param: param.clone(), value: *value })?;
            }
        }
        Override::Strategy { grand, economic, military } => {
            fn names(v: &[OptionEntry]) -> Vec<&str> {
                v.iter().map(|e| e.name.as_str()).collect()
            }
            let g = parse_named(ChoiceKind::Grand, grand, GrandStrategy::from_name, names(&catalog.grand))?;
            let mut set = StrategySet::new(g);
            for e in economic.iter().flatten() {
                set.economic.insert(parse_named(
                    ChoiceKind::Economic,
                    e,
                    EconomicStrategy::from_name,
                    names(&catalog.economic),
                )?);
            }
            for m in military.iter().flatten() {
                set.military.insert(parse_named(
                    ChoiceKind::Military,
                    m,
                    MilitaryStrategy::from_name,
                    names(&catalog.military),
                )?);
            }
            validate_strategy_set(&set, catalog)?;
            set.rationale = rationale.to_string();
            next.strategy = set;
            next.builtin_lists = BuiltinLists { economic: economic.is_none(), military: military.is_none() };
        }
    }
    let cat = choice.category();
    next.controlled.set(cat, true);
    next.rationale.set(cat, rationale.to_string());
    Ok(next)
}
