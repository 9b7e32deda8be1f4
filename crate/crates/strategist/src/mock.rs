//! Mock strategists for protocol tests and throughput runs.

use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use stratagem_core::strategy::PersonaParam;

use crate::episode::{RoundInput, RoundReply, Strategist, StrategistError, ToolCall};

/// Emits random mixes of valid, invalid, repeated and malformed calls.
#[derive(Clone, Debug)]
pub struct RandomStrategist {
    rng: ChaCha8Rng,
    /// Chance that a round includes a finishing call.
    pub finish_chance: f64,
}

impl RandomStrategist {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), finish_chance: 0.5 }
    }

    fn pick<'a>(&mut self, names: &'a [String]) -> Option<&'a String> {
        names.choose(&mut self.rng)
    }

    fn one_call(&mut self, input: &RoundInput) -> ToolCall {
        let r = "random pick";
        let names = |v: &[stratagem_core::strategy::OptionEntry]| v.iter().map(|e| e.name.clone()).collect::<Vec<_>>();
        match self.rng.random_range(0..10) {
            0 => {
                let t = self.pick(&names(&input.catalog.research)).cloned().unwrap_or_else(|| "Mining".into());
                ToolCall::new("set-research", json!({ "technology": t, "rationale": r }))
            }
            1 => ToolCall::new("set-research", json!({ "technology": "Teleportation", "rationale": r })),
            2 => {
                let mut args = Map::new();
                for _ in 0..self.rng.random_range(1..4) {
                    let p = PersonaParam::ALL[self.rng.random_range(0..PersonaParam::COUNT)];
                    args.insert(p.name().into(), json!(self.rng.random_range(-1..13)));
                }
                args.insert("rationale".into(), json!(r));
                ToolCall::new("set-persona", Value::Object(args))
            }
            3 => {
                let p = self.pick(&names(&input.catalog.policy)).cloned().unwrap_or_else(|| "Discipline".into());
                ToolCall::new("set-policy", json!({ "policy": p, "rationale": r }))
            }
            4 => ToolCall::new("set-policy", json!({ "policy": "Autarky", "rationale": r })),
            5 => ToolCall::new("set-mood", json!({ "rationale": r })),
            6 => ToolCall::new("set-research", json!({ "technology": "Mining" })),
            7 => {
                let e = names(&input.catalog.economic);
                let picks: Vec<&String> = e.choose_multiple(&mut self.rng, 2).collect();
                let grand = self.pick(&names(&input.catalog.grand)).cloned().unwrap_or_default();
                ToolCall::new(
                    "set-strategy",
                    json!({ "grand_strategy": grand, "economic_strategies": picks, "rationale": r }),
                )
            }
            8 => ToolCall::new("set-strategy", json!({ "grand_strategy": "Domination", "rationale": r })),
            _ => ToolCall::new("set-strategy", json!({ "grand_strategy": "Culture", "rationale": "" })),
        }
    }
}

impl Strategist for RandomStrategist {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError> {
        let mut calls: Vec<ToolCall> = (0..self.rng.random_range(0..4)).map(|_| self.one_call(input)).collect();
        if self.rng.random_bool(self.finish_chance) {
            let at = self.rng.random_range(0..=calls.len());
            calls.insert(at, ToolCall::keep("enough for now"));
        }
        Ok(RoundReply::calls(calls))
    }
}

/// Never closes the episode.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeverFinish;

impl Strategist for NeverFinish {
    fn round(&mut self, _: &RoundInput) -> Result<RoundReply, StrategistError> {
        Ok(RoundReply::calls(vec![ToolCall::new("set-persona", json!({ "Chattiness": 4, "rationale": "talk less" }))]))
    }
}

/// Always fails as if the endpoint were unreachable.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unreachable;

impl Strategist for Unreachable {
    fn round(&mut self, _: &RoundInput) -> Result<RoundReply, StrategistError> {
        Err(StrategistError::Transport("connection refused".into()))
    }
}

/// Answers keep-status-quo after a fixed delay.
#[derive(Clone, Copy, Debug)]
pub struct Slow(pub Duration);

impl Strategist for Slow {
    fn round(&mut self, _: &RoundInput) -> Result<RoundReply, StrategistError> {
        std::thread::sleep(self.0);
        Ok(RoundReply::calls(vec![ToolCall::keep("took a while")]))
    }
}
