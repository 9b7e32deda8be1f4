use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::rules::{PolicyChoice, Tech};
use crate::tactical::FlavorVector;

named_enum! {
    pub enum GrandStrategy {
        Culture,
        UnitedNations,
        Spaceship,
        Conquest,
    }
}

named_enum! {
    pub enum EconomicStrategy {
        NeedRecon,
        EnoughRecon,
        NeedReconSea,
        EnoughReconSea,
        EarlyExpansion,
        EnoughExpansion,
        NeedHappiness,
        NeedHappinessCritical,
        CitiesNeedNavalGrowth,
        CitiesNeedNavalTileImprovement,
        IslandStart,
        TechLeader,
        StartedPiety,
    }
}

named_enum! {
    pub enum MilitaryStrategy {
        AtWar,
        WarMobilization,
        NeedRangedEarly,
        WinningWars,
        LosingWars,
    }
}

/// The macro-strategy a strategist sets: one grand strategy plus active
/// economic and military strategies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategySet {
    pub grand: GrandStrategy,
    pub economic: BTreeSet<EconomicStrategy>,
    pub military: BTreeSet<MilitaryStrategy>,
    #[serde(default)]
    pub rationale: String,
}

impl StrategySet {
    pub fn new(grand: GrandStrategy) -> Self {
        Self { grand, economic: BTreeSet::new(), military: BTreeSet::new(), rationale: String::new() }
    }

    pub fn with_economic(mut self, e: impl IntoIterator<Item = EconomicStrategy>) -> Self {
        self.economic.extend(e);
        self
    }

    pub fn with_military(mut self, m: impl IntoIterator<Item = MilitaryStrategy>) -> Self {
        self.military.extend(m);
        self
    }

    /// Equality on the chosen options, ignoring the rationale text.
    pub fn same_options(&self, other: &StrategySet) -> bool {
        self.grand == other.grand && self.economic == other.economic && self.military == other.military
    }

    /// Names of every active strategy (grand first), in catalog order.
    pub fn names(&self) -> Vec<&'static str> {
        std::iter::once(self.grand.name())
            .chain(self.economic.iter().map(|e| e.name()))
            .chain(self.military.iter().map(|m| m.name()))
            .collect()
    }
}

named_enum! {
    pub enum PersonaParam {
        VictoryCompetitiveness,
        WonderCompetitiveness,
        MinorCivCompetitiveness,
        Boldness,
        WarBias,
        HostileBias,
        WarmongerHate,
        NeutralBias,
        FriendlyBias,
        GuardedBias,
        AfraidBias,
        DiplomaticBalance,
        Friendliness,
        WorkWithWillingness,
        WorkAgainstWillingness,
        Loyalty,
        MinorCivFriendlyBias,
        MinorCivNeutralBias,
        MinorCivHostileBias,
        MinorCivWarBias,
        DenounceWillingness,
        Forgiveness,
        Meanness,
        Neediness,
        Chattiness,
        DeceptiveBias,
    }
}

pub const PERSONA_MIN: u8 = 1;
pub const PERSONA_MAX: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("persona parameter {param} = {value} is outside [1, 10]")]
pub struct PersonaRangeError {
    pub param: PersonaParam,
    pub value: i64,
}

/// The 26 diplomacy-bias parameters. Values stay in `[1, 10]`; the only
/// writers are [`Persona::new`] and [`Persona::set`], both range-checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Persona([u8; PersonaParam::COUNT]);

impl Default for Persona {
    fn default() -> Self {
        Self([5; PersonaParam::COUNT])
    }
}

impl Persona {
    pub fn new(values: [i64; PersonaParam::COUNT]) -> Result<Self, PersonaRangeError> {
        let mut p = Self::default();
        for (param, v) in PersonaParam::ALL.iter().zip(values) {
            p.set(*param, v)?;
        }
        Ok(p)
    }

    pub fn get(&self, param: PersonaParam) -> u8 {
        self.0[param.index()]
    }

    pub fn set(&mut self, param: PersonaParam, value: i64) -> Result<(), PersonaRangeError> {
        if !(PERSONA_MIN as i64..=PERSONA_MAX as i64).contains(&value) {
            return Err(PersonaRangeError { param, value });
        }
        self.0[param.index()] = value as u8;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (PersonaParam, u8)> + '_ {
        PersonaParam::ALL.iter().map(|p| (*p, self.get(*p)))
    }
}

impl Serialize for Persona {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(PersonaParam::COUNT))?;
        for (p, v) in self.iter() {
            m.serialize_entry(p.name(), &v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for Persona {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = std::collections::BTreeMap::<String, i64>::deserialize(d)?;
        if raw.len() != PersonaParam::COUNT {
            return Err(serde::de::Error::custom("all 26 persona parameters are required"));
        }
        let mut p = Persona::default();
        for (name, v) in raw {
            let param = PersonaParam::from_name(&name)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown persona parameter {name:?}")))?;
            p.set(param, v).map_err(serde::de::Error::custom)?;
        }
        Ok(p)
    }
}

named_enum! {
    /// Decision categories a strategist may take over.
    pub enum Category {
        Strategy,
        Persona,
        Research,
        Policy,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Controlled {
    pub strategy: bool,
    pub persona: bool,
    pub research: bool,
    pub policy: bool,
}

impl Controlled {
    pub fn get(&self, c: Category) -> bool {
        match c {
            Category::Strategy => self.strategy,
            Category::Persona => self.persona,
            Category::Research => self.research,
            Category::Policy => self.policy,
        }
    }

    pub fn set(&mut self, c: Category, v: bool) {
        match c {
            Category::Strategy => self.strategy = v,
            Category::Persona => self.persona = v,
            Category::Research => self.research = v,
            Category::Policy => self.policy = v,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationales {
    pub strategy: Option<String>,
    pub persona: Option<String>,
    pub research: Option<String>,
    pub policy: Option<String>,
}

impl Rationales {
    pub fn get(&self, c: Category) -> Option<&str> {
        match c {
            Category::Strategy => self.strategy.as_deref(),
            Category::Persona => self.persona.as_deref(),
            Category::Research => self.research.as_deref(),
            Category::Policy => self.policy.as_deref(),
        }
    }

    pub fn set(&mut self, c: Category, text: String) {
        let slot = match c {
            Category::Strategy => &mut self.strategy,
            Category::Persona => &mut self.persona,
            Category::Research => &mut self.research,
            Category::Policy => &mut self.policy,
        };
        *slot = Some(text);
    }
}

/// Which side wrote a category's active value on a given turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Writer {
    Builtin,
    External,
}

/// Strategy lists an external strategist left to the builtin triggers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuiltinLists {
    pub economic: bool,
    pub military: bool,
}

/// Per-player record of what an external strategist controls and queued.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverrideState {
    pub controlled: Controlled,
    pub builtin_lists: BuiltinLists,
    pub next_research: Option<Tech>,
    pub next_policy: Option<PolicyChoice>,
    pub strategy: StrategySet,
    pub persona: Persona,
    pub rationale: Rationales,
}

impl OverrideState {
    pub fn new(strategy: StrategySet, persona: Persona) -> Self {
        Self {
            controlled: Controlled::default(),
            builtin_lists: BuiltinLists::default(),
            next_research: None,
            next_policy: None,
            strategy,
            persona,
            rationale: Rationales::default(),
        }
    }

    pub fn writer(&self, c: Category) -> Writer {
        if self.controlled.get(c) {
            Writer::External
        } else {
            Writer::Builtin
        }
    }
}

/// Everything the engine needs from the strategy layer for one player-turn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDirectives {
    pub flavors: FlavorVector,
    pub strategy: StrategySet,
    pub next_research: Option<Tech>,
    pub next_policy: Option<PolicyChoice>,
    pub persona: Persona,
}
