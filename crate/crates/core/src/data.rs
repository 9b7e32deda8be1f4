//! Versioned data tables: strategy catalog and flavor deltas, production
//! affinities, persona coefficients, builtin rules and score weights,
//! archetypes and option descriptions.
//!
//! The bundled copies under `data/` are compiled in; [`Tables::from_dir`]
//! loads a re-skinned set from disk. Call [`install`] before the first
//! [`tables`] lookup to replace the bundled set process-wide.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::engine::rules::{Ideology, Policy, PolicyChoice, Producible, Tech};
use crate::strategy::{EconomicStrategy, GrandStrategy, MilitaryStrategy, Persona, PersonaParam};
use crate::tactical::{Flavor, FlavorDelta, FlavorVector};

pub const DATA_VERSION: u32 = 1;

pub const STRATEGIES_TOML: &str = include_str!("../data/strategies.toml");
pub const AFFINITY_TOML: &str = include_str!("../data/affinity.toml");
pub const PERSONA_TOML: &str = include_str!("../data/persona.toml");
pub const RULES_TOML: &str = include_str!("../data/rules.toml");
pub const ARCHETYPES_TOML: &str = include_str!("../data/archetypes.toml");
pub const RULESET_TOML: &str = include_str!("../data/ruleset.toml");

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{file}: {message}")]
    Parse { file: &'static str, message: String },
    #[error("{file}: unsupported version {found} (expected {DATA_VERSION})")]
    Version { file: &'static str, found: u32 },
    #[error("{file}: unknown {kind} {name:?}")]
    Unknown { file: &'static str, kind: &'static str, name: String },
    #[error("{file}: missing {what}")]
    Missing { file: &'static str, what: String },
    #[error("{file}: {message}")]
    Invalid { file: &'static str, message: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// A strategy reference usable in exclusivity pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyRef {
    Grand(GrandStrategy),
    Economic(EconomicStrategy),
    Military(MilitaryStrategy),
}

impl StrategyRef {
    pub fn parse(name: &str) -> Option<Self> {
        GrandStrategy::from_name(name)
            .map(StrategyRef::Grand)
            .or_else(|| EconomicStrategy::from_name(name).map(StrategyRef::Economic))
            .or_else(|| MilitaryStrategy::from_name(name).map(StrategyRef::Military))
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyRef::Grand(g) => g.name(),
            StrategyRef::Economic(e) => e.name(),
            StrategyRef::Military(m) => m.name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyEntry {
    pub description: String,
    pub delta: FlavorDelta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyTable {
    pub grand: Vec<StrategyEntry>,
    pub economic: Vec<StrategyEntry>,
    pub military: Vec<StrategyEntry>,
    pub exclusive: Vec<(StrategyRef, StrategyRef)>,
}

impl StrategyTable {
    pub fn entry(&self, s: StrategyRef) -> &StrategyEntry {
        match s {
            StrategyRef::Grand(g) => &self.grand[g.index()],
            StrategyRef::Economic(e) => &self.economic[e.index()],
            StrategyRef::Military(m) => &self.military[m.index()],
        }
    }

    /// The strategy that may not be co-active with `s`, if any.
    pub fn exclusive_partner(&self, s: StrategyRef) -> Option<StrategyRef> {
        self.exclusive.iter().find_map(|(a, b)| {
            if *a == s {
                Some(*b)
            } else if *b == s {
                Some(*a)
            } else {
                None
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffinityTable(pub Vec<[i32; Flavor::COUNT]>);

impl AffinityTable {
    pub fn get(&self, item: Producible, f: Flavor) -> i32 {
        self.0[item.index()][f.index()]
    }
}

named_enum! {
    pub enum DiplomacyWeight {
        WarPropensity,
        Hostility,
        Friendship,
        Denounce,
        ForgivenessDecay,
        Deception,
        MinorCivInvestment,
        PeacePropensity,
        WonderDrive,
        VictoryDrive,
    }
}

impl DiplomacyWeight {
    fn key(self) -> &'static str {
        match self {
            DiplomacyWeight::WarPropensity => "war_propensity",
            DiplomacyWeight::Hostility => "hostility",
            DiplomacyWeight::Friendship => "friendship",
            DiplomacyWeight::Denounce => "denounce",
            DiplomacyWeight::ForgivenessDecay => "forgiveness_decay",
            DiplomacyWeight::Deception => "deception",
            DiplomacyWeight::MinorCivInvestment => "minor_civ_investment",
            DiplomacyWeight::PeacePropensity => "peace_propensity",
            DiplomacyWeight::WonderDrive => "wonder_drive",
            DiplomacyWeight::VictoryDrive => "victory_drive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightCoefficients {
    pub intercept: f64,
    pub terms: [f64; PersonaParam::COUNT],
    pub product: Vec<PersonaParam>,
    pub product_coeff: f64,
}

impl WeightCoefficients {
    pub fn evaluate(&self, p: &Persona) -> f64 {
        let linear: f64 = PersonaParam::ALL
            .iter()
            .map(|param| self.terms[param.index()] * p.get(*param) as f64)
            .sum();
        let product = if self.product.is_empty() {
            0.0
        } else {
            self.product_coeff * self.product.iter().map(|q| p.get(*q) as f64).product::<f64>()
        };
        self.intercept + linear + product
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersonaCoefficients(pub Vec<WeightCoefficients>);

impl PersonaCoefficients {
    pub fn get(&self, w: DiplomacyWeight) -> &WeightCoefficients {
        &self.0[w.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    pub population: i64,
    pub cities: i64,
    pub wonders: i64,
    pub military_divisor: i64,
    pub policies: i64,
    pub techs: i64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrandFitness {
    pub bias: f64,
    pub conquest_military_ratio: f64,
    pub conquest_at_war: f64,
    pub culture_rate: f64,
    pub culture_wonders: f64,
    pub spaceship_science_rate: f64,
    pub spaceship_techs: f64,
    pub united_nations_influence: f64,
    pub united_nations_gold: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinRules {
    pub early_expansion_until_turn: u32,
    pub early_expansion_max_cities: usize,
    pub need_recon_unrevealed: f64,
    pub enough_recon_unrevealed: f64,
    pub happiness_low: i32,
    pub happiness_critical: i32,
    pub piety_faith_rate: i32,
    pub losing_wars_ratio: f64,
    pub winning_wars_ratio: f64,
    pub mobilization_hostile_rivals: usize,
    pub need_ranged_before_turn: u32,
    pub grand_fitness: GrandFitness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleTable {
    pub score: ScoreWeights,
    pub builtin: BuiltinRules,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Modifiers {
    pub strength: i32,
    pub science: i32,
    pub culture: i32,
    pub gold: i32,
    pub production: i32,
    pub food: i32,
    pub influence: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Archetype {
    pub name: String,
    pub cities: Vec<String>,
    pub grand_bias: [i32; GrandStrategy::COUNT],
    pub flavors: FlavorVector,
    pub modifiers: Modifiers,
    pub persona: Persona,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Descriptions {
    pub techs: Vec<String>,
    pub policies: BTreeMap<PolicyChoice, String>,
}

impl Descriptions {
    pub fn tech(&self, t: Tech) -> &str {
        &self.techs[t.index()]
    }

    pub fn policy(&self, p: PolicyChoice) -> &str {
        &self.policies[&p]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tables {
    pub strategies: StrategyTable,
    pub affinity: AffinityTable,
    pub persona: PersonaCoefficients,
    pub rules: RuleTable,
    pub archetypes: Vec<Archetype>,
    pub descriptions: Descriptions,
}

static TABLES: OnceLock<Tables> = OnceLock::new();

/// The process-wide tables; the bundled set unless [`install`] ran first.
pub fn tables() -> &'static Tables {
    TABLES.get_or_init(|| Tables::bundled().expect("bundled data tables are valid"))
}

/// Installs a custom table set. Fails (returning it) if tables were already
/// read or installed.
pub fn install(t: Tables) -> Result<(), Box<Tables>> {
    TABLES.set(t).map_err(Box::new)
}

impl Tables {
    pub fn bundled() -> Result<Self, DataError> {
        Ok(Self {
            strategies: parse_strategies(STRATEGIES_TOML)?,
            affinity: parse_affinity(AFFINITY_TOML)?,
            persona: parse_persona(PERSONA_TOML)?,
            rules: parse_rules(RULES_TOML)?,
            archetypes: parse_archetypes(ARCHETYPES_TOML)?,
            descriptions: parse_ruleset(RULESET_TOML)?,
        })
    }

    pub fn from_dir(dir: &Path) -> Result<Self, DataError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path)
                .map_err(|source| DataError::Io { path: path.display().to_string(), source })
        };
        Ok(Self {
            strategies: parse_strategies(&read("strategies.toml")?)?,
            affinity: parse_affinity(&read("affinity.toml")?)?,
            persona: parse_persona(&read("persona.toml")?)?,
            rules: parse_rules(&read("rules.toml")?)?,
            archetypes: parse_archetypes(&read("archetypes.toml")?)?,
            descriptions: parse_ruleset(&read("ruleset.toml")?)?,
        })
    }
}

fn toml_parse<T: serde::de::DeserializeOwned>(file: &'static str, text: &str) -> Result<T, DataError> {
    toml::from_str(text).map_err(|e| DataError::Parse { file, message: e.to_string() })
}

fn check_version(file: &'static str, v: u32) -> Result<(), DataError> {
    if v == DATA_VERSION {
        Ok(())
    } else {
        Err(DataError::Version { file, found: v })
    }
}

fn flavor_delta(file: &'static str, raw: &BTreeMap<String, i32>) -> Result<FlavorDelta, DataError> {
    let mut d = FlavorDelta::default();
    for (name, v) in raw {
        let f = Flavor::from_name(name)
            .ok_or_else(|| DataError::Unknown { file, kind: "flavor", name: name.clone() })?;
        if !(-50..=50).contains(v) {
            return Err(DataError::Invalid { file, message: format!("delta {name} = {v} outside [-50, 50]") });
        }
        d.set(f, *v);
    }
    Ok(d)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    name: String,
    description: String,
    #[serde(default)]
    deltas: BTreeMap<String, i32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategies {
    version: u32,
    #[serde(default)]
    exclusive: Vec<[String; 2]>,
    grand: Vec<RawStrategy>,
    economic: Vec<RawStrategy>,
    military: Vec<RawStrategy>,
}

fn ordered_entries<T: Copy>(
    file: &'static str,
    kind: &'static str,
    raw: Vec<RawStrategy>,
    all: &[T],
    lookup: impl Fn(&str) -> Option<T>,
    index: impl Fn(T) -> usize,
    name: impl Fn(T) -> &'static str,
) -> Result<Vec<StrategyEntry>, DataError> {
    let mut slots: Vec<Option<StrategyEntry>> = vec![None; all.len()];
    for r in raw {
        let s = lookup(&r.name).ok_or_else(|| DataError::Unknown { file, kind, name: r.name.clone() })?;
        let slot = &mut slots[index(s)];
        if slot.is_some() {
            return Err(DataError::Invalid { file, message: format!("duplicate {kind} {:?}", r.name) });
        }
        *slot = Some(StrategyEntry { description: r.description, delta: flavor_delta(file, &r.deltas)? });
    }
    slots
        .into_iter()
        .zip(all)
        .map(|(e, s)| e.ok_or_else(|| DataError::Missing { file, what: format!("{kind} {}", name(*s)) }))
        .collect()
}

pub fn parse_strategies(text: &str) -> Result<StrategyTable, DataError> {
    const FILE: &str = "strategies.toml";
    let raw: RawStrategies = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    let grand = ordered_entries(FILE, "grand strategy", raw.grand, GrandStrategy::ALL, GrandStrategy::from_name, |g| g.index(), |g| g.name())?;
    let economic = ordered_entries(FILE, "economic strategy", raw.economic, EconomicStrategy::ALL, EconomicStrategy::from_name, |g| g.index(), |g| g.name())?;
    let military = ordered_entries(FILE, "military strategy", raw.military, MilitaryStrategy::ALL, MilitaryStrategy::from_name, |g| g.index(), |g| g.name())?;
    let mut exclusive = Vec::new();
    for [a, b] in raw.exclusive {
        let pa = StrategyRef::parse(&a).ok_or_else(|| DataError::Unknown { file: FILE, kind: "strategy", name: a.clone() })?;
        let pb = StrategyRef::parse(&b).ok_or_else(|| DataError::Unknown { file: FILE, kind: "strategy", name: b.clone() })?;
        if pa == pb || matches!(pa, StrategyRef::Grand(_)) || matches!(pb, StrategyRef::Grand(_)) {
            return Err(DataError::Invalid { file: FILE, message: format!("bad exclusive pair {a}/{b}") });
        }
        exclusive.push((pa, pb));
    }
    Ok(StrategyTable { grand, economic, military, exclusive })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAffinity {
    version: u32,
    items: BTreeMap<String, BTreeMap<String, i32>>,
}

pub fn parse_affinity(text: &str) -> Result<AffinityTable, DataError> {
    const FILE: &str = "affinity.toml";
    let raw: RawAffinity = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    let mut rows = vec![None; Producible::COUNT];
    for (name, flavors) in raw.items {
        let item = Producible::from_name(&name)
            .ok_or_else(|| DataError::Unknown { file: FILE, kind: "item", name: name.clone() })?;
        let mut row = [0; Flavor::COUNT];
        for (fname, v) in flavors {
            let f = Flavor::from_name(&fname)
                .ok_or_else(|| DataError::Unknown { file: FILE, kind: "flavor", name: fname.clone() })?;
            if !(0..=10).contains(&v) {
                return Err(DataError::Invalid { file: FILE, message: format!("{name}.{fname} = {v} outside [0, 10]") });
            }
            row[f.index()] = v;
        }
        rows[item.index()] = Some(row);
    }
    let rows = rows
        .into_iter()
        .zip(Producible::ALL)
        .map(|(r, item)| r.ok_or_else(|| DataError::Missing { file: FILE, what: format!("item {item}") }))
        .collect::<Result<_, _>>()?;
    Ok(AffinityTable(rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    #[serde(default)]
    intercept: f64,
    #[serde(default)]
    terms: BTreeMap<String, f64>,
    #[serde(default)]
    product: Vec<String>,
    #[serde(default)]
    product_coeff: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPersona {
    version: u32,
    weights: BTreeMap<String, RawWeight>,
}

pub fn parse_persona(text: &str) -> Result<PersonaCoefficients, DataError> {
    const FILE: &str = "persona.toml";
    let mut raw: RawPersona = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    let mut out = Vec::new();
    for w in DiplomacyWeight::ALL {
        let r = raw
            .weights
            .remove(w.key())
            .ok_or_else(|| DataError::Missing { file: FILE, what: format!("weight {}", w.key()) })?;
        let mut terms = [0.0; PersonaParam::COUNT];
        for (name, c) in r.terms {
            let p = PersonaParam::from_name(&name)
                .ok_or_else(|| DataError::Unknown { file: FILE, kind: "persona parameter", name: name.clone() })?;
            if !c.is_finite() {
                return Err(DataError::Invalid { file: FILE, message: format!("non-finite coefficient for {name}") });
            }
            terms[p.index()] = c;
        }
        let product = r
            .product
            .iter()
            .map(|n| {
                PersonaParam::from_name(n)
                    .ok_or_else(|| DataError::Unknown { file: FILE, kind: "persona parameter", name: n.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !r.intercept.is_finite() || !r.product_coeff.is_finite() || r.product_coeff < 0.0 {
            return Err(DataError::Invalid { file: FILE, message: format!("bad intercept/product for {}", w.key()) });
        }
        out.push(WeightCoefficients { intercept: r.intercept, terms, product, product_coeff: r.product_coeff });
    }
    if let Some(extra) = raw.weights.keys().next() {
        return Err(DataError::Unknown { file: FILE, kind: "weight", name: extra.clone() });
    }
    Ok(PersonaCoefficients(out))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRules {
    version: u32,
    score: ScoreWeights,
    builtin: BuiltinRules,
}

pub fn parse_rules(text: &str) -> Result<RuleTable, DataError> {
    const FILE: &str = "rules.toml";
    let raw: RawRules = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    let s = &raw.score;
    if s.military_divisor <= 0 || [s.population, s.cities, s.wonders, s.policies, s.techs].iter().any(|w| *w < 0) {
        return Err(DataError::Invalid { file: FILE, message: "score weights must be non-negative".into() });
    }
    Ok(RuleTable { score: raw.score, builtin: raw.builtin })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArchetype {
    name: String,
    cities: Vec<String>,
    grand_bias: BTreeMap<String, i32>,
    flavors: FlavorVector,
    #[serde(default)]
    modifiers: Modifiers,
    persona: Persona,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArchetypes {
    version: u32,
    archetype: Vec<RawArchetype>,
}

pub fn parse_archetypes(text: &str) -> Result<Vec<Archetype>, DataError> {
    const FILE: &str = "archetypes.toml";
    let raw: RawArchetypes = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    if raw.archetype.is_empty() {
        return Err(DataError::Missing { file: FILE, what: "archetypes".into() });
    }
    raw.archetype
        .into_iter()
        .map(|a| {
            if a.cities.is_empty() {
                return Err(DataError::Missing { file: FILE, what: format!("city names for {}", a.name) });
            }
            let mut bias = [0; GrandStrategy::COUNT];
            for (name, v) in &a.grand_bias {
                let g = GrandStrategy::from_name(name)
                    .ok_or_else(|| DataError::Unknown { file: FILE, kind: "grand strategy", name: name.clone() })?;
                bias[g.index()] = *v;
            }
            Ok(Archetype {
                name: a.name,
                cities: a.cities,
                grand_bias: bias,
                flavors: a.flavors,
                modifiers: a.modifiers,
                persona: a.persona,
            })
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRuleset {
    version: u32,
    techs: BTreeMap<String, String>,
    policies: BTreeMap<String, String>,
}

pub fn parse_ruleset(text: &str) -> Result<Descriptions, DataError> {
    const FILE: &str = "ruleset.toml";
    let mut raw: RawRuleset = toml_parse(FILE, text)?;
    check_version(FILE, raw.version)?;
    let techs = Tech::ALL
        .iter()
        .map(|t| raw.techs.remove(t.name()).ok_or_else(|| DataError::Missing { file: FILE, what: format!("tech {t}") }))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(extra) = raw.techs.keys().next() {
        return Err(DataError::Unknown { file: FILE, kind: "tech", name: extra.clone() });
    }
    let mut policies = BTreeMap::new();
    for choice in PolicyChoice::all() {
        let text = raw
            .policies
            .remove(choice.name())
            .ok_or_else(|| DataError::Missing { file: FILE, what: format!("policy {}", choice.name()) })?;
        policies.insert(choice, text);
    }
    if let Some(extra) = raw.policies.keys().next() {
        return Err(DataError::Unknown { file: FILE, kind: "policy", name: extra.clone() });
    }
    // Keep the imports honest: both halves of the choice space are covered.
    debug_assert_eq!(policies.len(), Policy::COUNT + Ideology::COUNT);
    Ok(Descriptions { techs, policies })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_parse() {
        let t = Tables::bundled().unwrap();
        assert_eq!(t.archetypes.len(), 8);
        assert_eq!(t.strategies.economic.len(), 13);
        assert_eq!(t.strategies.military.len(), 5);
    }

    #[test]
    fn adverb_magnitudes_only() {
        let t = Tables::bundled().unwrap();
        let all = t.strategies.grand.iter().chain(&t.strategies.economic).chain(&t.strategies.military);
        for e in all {
            for v in e.delta.0 {
                assert!([0, 10, 25, 35, 50].contains(&v.abs()), "{v} in {:?}", e.description);
            }
        }
    }

    #[test]
    fn version_mismatch_is_reported() {
        let text = RULES_TOML.replace("version = 1", "version = 2");
        assert!(matches!(parse_rules(&text), Err(DataError::Version { found: 2, .. })));
    }

    #[test]
    fn unknown_flavor_is_reported() {
        let text = AFFINITY_TOML.replace("Scout = { LandRecon = 4 }", "Scout = { Sneaky = 4 }");
        assert!(matches!(parse_affinity(&text), Err(DataError::Unknown { kind: "flavor", .. })));
    }

    #[test]
    fn exclusive_lookup() {
        let t = Tables::bundled().unwrap();
        let ww = StrategyRef::Military(MilitaryStrategy::WinningWars);
        assert_eq!(t.strategies.exclusive_partner(ww), Some(StrategyRef::Military(MilitaryStrategy::LosingWars)));
    }
}
