//! The decision-episode loop: ask the strategist for tool calls, run them
//! through the tool server, feed results back, stop on a finishing tool,
//! the round cap or the deadline.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use stratagem_bridge::{call_tool, Episode, ErrorCode, ToolRequest, ToolResponse};
use stratagem_core::codec::{estimate_tokens, ToolSchema};
use stratagem_core::engine::PlayerId;
use stratagem_core::strategy::OptionCatalog;
use stratagem_core::Session;

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(30);
pub const DEFAULT_ROUND_CAP: u32 = 8;
pub const FORCED_RATIONALE: &str = "No decision arrived within the episode budget; current settings are kept.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub deadline: Duration,
    pub round_cap: u32,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self { deadline: DEFAULT_DEADLINE, round_cap: DEFAULT_ROUND_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    /// Client-side call id, echoed back with the result when present.
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    pub arguments: Value,
}

impl ToolCall {
    pub fn new(name: &str, arguments: Value) -> Self {
        Self { id: None, name: name.to_string(), arguments }
    }

    pub fn keep(rationale: &str) -> Self {
        Self::new("keep-status-quo", json!({ "rationale": rationale }))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// What the strategist sees each round.
pub struct RoundInput<'a> {
    pub player: PlayerId,
    pub turn: u32,
    /// How many episodes this strategist ran before this one.
    pub episode: u64,
    /// 1-based round number within the episode.
    pub round: u32,
    pub doc: &'a str,
    pub catalog: &'a OptionCatalog,
    pub tools: &'a [ToolSchema],
    /// Calls from the previous round with their results.
    pub feedback: &'a [(ToolCall, ToolResponse)],
    pub deadline: Instant,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundReply {
    pub calls: Vec<ToolCall>,
    /// Provider-reported usage; estimated from the text when absent.
    pub usage: Option<Usage>,
}

impl RoundReply {
    pub fn calls(calls: Vec<ToolCall>) -> Self {
        Self { calls, usage: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategistError {
    #[error("transport failure: {0}")]
    Transport(String),
}

pub trait Strategist: Send {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError>;

    /// The raw exchange of the most recent episode, if the strategist keeps one.
    fn transcript(&self) -> Option<Value> {
        None
    }
}

impl<S: Strategist + ?Sized> Strategist for Box<S> {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError> {
        (**self).round(input)
    }

    fn transcript(&self) -> Option<Value> {
        (**self).transcript()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    TimeoutGap,
    ErrorGap,
    ForcedClose,
}

impl Outcome {
    /// Turns where the previous strategy simply persisted.
    pub fn is_gap(self) -> bool {
        matches!(self, Outcome::TimeoutGap | Outcome::ErrorGap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRecord {
    pub round: u32,
    pub name: String,
    pub arguments: Value,
    pub response: ToolResponse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub turn: u32,
    pub episode_id: String,
    pub player: PlayerId,
    pub tool_calls: Vec<ToolCallRecord>,
    /// Category name to rationale, for every accepted call.
    pub rationale: BTreeMap<String, String>,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub rounds: u32,
    pub latency_ms: u64,
    pub outcome: Outcome,
}

impl DecisionRecord {
    pub fn finishing_calls(&self) -> usize {
        self.tool_calls.iter().filter(|c| c.response.ok && is_finishing(&c.name)).count()
    }
}

pub fn is_finishing(name: &str) -> bool {
    matches!(name, "set-strategy" | "keep-status-quo")
}

fn category(tool: &str) -> &'static str {
    match tool {
        "set-persona" => "Persona",
        "set-research" => "Research",
        "set-policy" => "Policy",
        _ => "Strategy",
    }
}

/// Runs one episode for `player`. Accepted calls are queued on the
/// session and take effect when the engine next advances. A failed or
/// late strategist leaves the session as it was.
pub fn run_decision_episode(
    session: &mut Session,
    player: PlayerId,
    strategist: &mut dyn Strategist,
    cfg: &EpisodeConfig,
    episode: u64,
) -> DecisionRecord {
    let start = Instant::now();
    let deadline = start + cfg.deadline;
    let turn = session.state.turn;
    let saved = (session.overrides.get(player as usize).cloned(), session.seen.get(player as usize).copied());
    let doc = session.document(player).map(|d| d.text).unwrap_or_default();
    let catalog = session.catalog(player).ok();
    let mut ep = Episode::new(player);
    let mut record = DecisionRecord {
        turn,
        episode_id: format!("p{player}-t{turn}-e{episode}"),
        player,
        tool_calls: Vec::new(),
        rationale: BTreeMap::new(),
        input_tokens: 0,
        output_tokens: 0,
        rounds: 0,
        latency_ms: 0,
        outcome: Outcome::ForcedClose,
    };
    let Some(catalog) = catalog else {
        record.outcome = Outcome::ErrorGap;
        return record;
    };
    let mut feedback: Vec<(ToolCall, ToolResponse)> = Vec::new();
    let mut corrective_used = false;
    let outcome = loop {
        if record.rounds >= cfg.round_cap || Instant::now() >= deadline {
            break Outcome::ForcedClose;
        }
        record.rounds += 1;
        let tools = ep.list_tools();
        let input = RoundInput {
            player,
            turn,
            episode,
            round: record.rounds,
            doc: &doc,
            catalog: &catalog,
            tools: &tools,
            feedback: &feedback,
            deadline,
        };
        let reply = match strategist.round(&input) {
            Ok(r) => r,
            Err(_) => break Outcome::ErrorGap,
        };
        if Instant::now() > deadline {
            break Outcome::TimeoutGap;
        }
        let usage = reply.usage.unwrap_or_else(|| estimate_usage(&doc, &feedback, &reply.calls, record.rounds));
        record.input_tokens += usage.input_tokens;
        record.output_tokens += usage.output_tokens;
        feedback.clear();
        for call in reply.calls {
            let resp = call_tool(session, &mut ep, &ToolRequest { name: call.name.clone(), arguments: call.arguments.clone() });
            if resp.ok {
                if let Some(r) = call.arguments.get("rationale").and_then(Value::as_str) {
                    record.rationale.insert(category(&call.name).to_string(), r.to_string());
                }
            }
            record.tool_calls.push(ToolCallRecord {
                round: record.rounds,
                name: call.name.clone(),
                arguments: call.arguments.clone(),
                response: resp.clone(),
            });
            feedback.push((call, resp));
        }
        if ep.closed {
            break Outcome::Completed;
        }
        if feedback.iter().any(|(_, r)| r.code() == Some(ErrorCode::InvalidOption)) {
            if corrective_used {
                break Outcome::ForcedClose;
            }
            corrective_used = true;
        }
    };
    match outcome {
        Outcome::ForcedClose => {
            let call = ToolCall::keep(FORCED_RATIONALE);
            let resp = call_tool(session, &mut ep, &ToolRequest { name: call.name.clone(), arguments: call.arguments.clone() });
            if resp.ok {
                record.rationale.insert("Strategy".into(), FORCED_RATIONALE.into());
            }
            record.tool_calls.push(ToolCallRecord { round: record.rounds, name: call.name, arguments: call.arguments, response: resp });
        }
        Outcome::TimeoutGap | Outcome::ErrorGap => {
            if let (Some(o), Some(seen)) = saved {
                session.overrides[player as usize] = o;
                session.seen[player as usize] = seen;
            }
            record.rationale.clear();
        }
        Outcome::Completed => {}
    }
    record.outcome = outcome;
    record.latency_ms = start.elapsed().as_millis() as u64;
    record
}

/// Byte-based usage estimate: the document on the first round, the fed
/// back results after that, and the emitted calls as output.
fn estimate_usage(doc: &str, feedback: &[(ToolCall, ToolResponse)], calls: &[ToolCall], round: u32) -> Usage {
    let input = if round == 1 { doc.to_string() } else { serde_json::to_string(feedback).unwrap_or_default() };
    Usage {
        input_tokens: estimate_tokens(&input).input_tokens,
        output_tokens: estimate_tokens(&serde_json::to_string(calls).unwrap_or_default()).input_tokens,
    }
}
