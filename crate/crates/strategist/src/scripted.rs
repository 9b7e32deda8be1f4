//! Deterministic strategists for control conditions and tests.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use stratagem_core::strategy::OptionCatalog;

use crate::episode::{RoundInput, RoundReply, Strategist, StrategistError, ToolCall};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Script {
    AlwaysKeep,
    /// Conquest with war mobilization; economic strategies stay builtin.
    FixedConquest,
    /// Cycles through the grand strategies in catalog order.
    RotateGrand,
    /// The same calls every episode.
    Custom(Vec<ToolCall>),
}

impl Script {
    pub const PRESETS: [&'static str; 3] = ["always-keep", "fixed-conquest", "rotate-grand"];
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown script preset {0:?}; expected one of always-keep, fixed-conquest, rotate-grand")]
pub struct UnknownScript(pub String);

impl FromStr for Script {
    type Err = UnknownScript;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always-keep" => Ok(Script::AlwaysKeep),
            "fixed-conquest" => Ok(Script::FixedConquest),
            "rotate-grand" => Ok(Script::RotateGrand),
            other => Err(UnknownScript(other.to_string())),
        }
    }
}

/// The calls a script makes in its `episode`-th episode.
pub fn scripted_decide(_doc: &str, catalog: &OptionCatalog, script: &Script, episode: u64) -> Vec<ToolCall> {
    match script {
        Script::AlwaysKeep => vec![ToolCall::keep("Holding the current course.")],
        Script::FixedConquest => vec![ToolCall::new(
            "set-strategy",
            json!({
                "grand_strategy": "Conquest",
                "military_strategies": ["WarMobilization"],
                "rationale": "Fixed conquest plan."
            }),
        )],
        Script::RotateGrand => {
            let g = &catalog.grand[(episode % catalog.grand.len() as u64) as usize].name;
            vec![ToolCall::new("set-strategy", json!({ "grand_strategy": g, "rationale": format!("Rotation step {episode}.") }))]
        }
        Script::Custom(calls) => calls.clone(),
    }
}

/// Emits the script on the first round. If the tool server sent errors
/// back it repeats itself, so a bad script surfaces as rejected calls.
#[derive(Clone, Debug)]
pub struct ScriptedStrategist {
    pub script: Script,
}

impl ScriptedStrategist {
    pub fn new(script: Script) -> Self {
        Self { script }
    }
}

impl Strategist for ScriptedStrategist {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError> {
        Ok(RoundReply::calls(scripted_decide(input.doc, input.catalog, &self.script, input.episode)))
    }
}
