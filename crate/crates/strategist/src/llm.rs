//! A strategist backed by a chat-completions style HTTP endpoint with
//! tool calling.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use stratagem_core::codec::{estimate_tokens, ToolSchema};
use stratagem_core::engine::{GameState, PlayerId};
use stratagem_core::VictoryKind;

use crate::episode::{RoundInput, RoundReply, Strategist, StrategistError, ToolCall, Usage};

pub const URL_ENV: &str = "STRATAGEM_LLM_URL";
pub const MODEL_ENV: &str = "STRATAGEM_LLM_MODEL";
pub const API_KEY_ENV: &str = "STRATAGEM_LLM_API_KEY";

pub const SYSTEM_TEMPLATE: &str = include_str!("../data/system_prompt.md");

/// The system prompt with the game-specific situation filled in.
pub fn system_prompt(state: &GameState, player: PlayerId) -> String {
    let c = &state.config;
    let victories: Vec<&str> = VictoryKind::ALL.iter().filter(|k| c.enabled(**k)).map(|k| k.name()).collect();
    let situation = format!(
        "You are Player {player}, one of {} major civilizations on a {}x{} hex map with {} city-states. \
         The game ends after turn {}. Enabled victory types: {}.",
        c.player_count,
        c.map_width,
        c.map_height,
        state.city_states.len(),
        c.max_turns,
        victories.join(", ")
    );
    SYSTEM_TEMPLATE.replace("{situation}", &situation)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlmConfig {
    /// Full URL of the chat-completions endpoint.
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub max_tries: u32,
    pub backoff_base: Duration,
}

impl LlmConfig {
    pub fn new(url: &str, model: &str) -> Self {
        Self {
            url: url.to_string(),
            model: model.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok(),
            max_tries: 5,
            backoff_base: Duration::from_secs(1),
        }
    }

    /// Reads the endpoint and model from the environment.
    pub fn from_env() -> Option<Self> {
        Some(Self::new(&std::env::var(URL_ENV).ok()?, &std::env::var(MODEL_ENV).ok()?))
    }
}

/// The tools block of a request.
pub fn request_tools(tools: &[ToolSchema]) -> Value {
    tools
        .iter()
        .map(|t| json!({ "type": "function", "function": { "name": t.name, "description": t.description, "parameters": t.parameters } }))
        .collect()
}

/// Extracts tool calls from a completion, accepting both the `tool_calls`
/// list and the older single `function_call` form. Arguments that do not
/// parse are passed on as a raw string so the tool server rejects them.
pub fn parse_tool_calls(resp: &Value) -> Vec<ToolCall> {
    let msg = &resp["choices"][0]["message"];
    let args = |v: &Value| match v {
        Value::String(s) => serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.clone())),
        other => other.clone(),
    };
    let mut out: Vec<ToolCall> = msg["tool_calls"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|c| ToolCall {
            id: c["id"].as_str().map(str::to_string),
            name: c["function"]["name"].as_str().unwrap_or_default().to_string(),
            arguments: args(&c["function"]["arguments"]),
        })
        .collect();
    if out.is_empty() && msg["function_call"].is_object() {
        let f = &msg["function_call"];
        out.push(ToolCall { id: None, name: f["name"].as_str().unwrap_or_default().to_string(), arguments: args(&f["arguments"]) });
    }
    out
}

pub fn parse_usage(resp: &Value) -> Option<Usage> {
    let u = resp.get("usage")?;
    Some(Usage { input_tokens: u["prompt_tokens"].as_u64()?, output_tokens: u["completion_tokens"].as_u64()? })
}

pub struct LlmStrategist {
    cfg: LlmConfig,
    agent: ureq::Agent,
    system: String,
    messages: Vec<Value>,
    /// Ids given to calls that arrived without one.
    next_id: u64,
}

impl LlmStrategist {
    pub fn new(cfg: LlmConfig, system_prompt: String) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        Self { cfg, agent, system: system_prompt, messages: Vec::new(), next_id: 0 }
    }

    /// The conversation so far, for transcripts.
    pub fn messages(&self) -> &[Value] {
        &self.messages
    }

    fn post(&self, body: &Value, deadline: Instant) -> Result<Value, StrategistError> {
        let mut last = String::new();
        for attempt in 0..self.cfg.max_tries {
            if attempt > 0 {
                let wait = self.cfg.backoff_base * 2u32.pow(attempt - 1);
                if Instant::now() + wait >= deadline {
                    break;
                }
                std::thread::sleep(wait);
            }
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                break;
            }
            let mut req = self.agent.post(&self.cfg.url).config().timeout_global(Some(left)).build();
            if let Some(k) = &self.cfg.api_key {
                req = req.header("Authorization", &format!("Bearer {k}"));
            }
            match req.send_json(body) {
                Ok(resp) if resp.status().is_success() => {
                    return resp
                        .into_body()
                        .read_json::<Value>()
                        .map_err(|e| StrategistError::Transport(format!("bad response body: {e}")));
                }
                Ok(resp) => last = format!("HTTP {}", resp.status().as_u16()),
                Err(e) => last = e.to_string(),
            }
        }
        Err(StrategistError::Transport(last))
    }
}

impl Strategist for LlmStrategist {
    fn round(&mut self, input: &RoundInput) -> Result<RoundReply, StrategistError> {
        if input.round == 1 {
            self.messages = vec![
                json!({ "role": "system", "content": self.system }),
                json!({ "role": "user", "content": input.doc }),
            ];
        } else {
            for (call, resp) in input.feedback {
                self.messages.push(json!({
                    "role": "tool",
                    "tool_call_id": call.id,
                    "content": serde_json::to_string(resp).expect("response serializes"),
                }));
            }
        }
        let body = json!({
            "model": self.cfg.model,
            "messages": self.messages,
            "tools": request_tools(input.tools),
        });
        let resp = self.post(&body, input.deadline)?;
        let mut calls = parse_tool_calls(&resp);
        for c in &mut calls {
            if c.id.is_none() {
                self.next_id += 1;
                c.id = Some(format!("call_{}", self.next_id));
            }
        }
        let mut assistant = resp["choices"][0]["message"].clone();
        if !assistant.is_object() {
            assistant = json!({ "role": "assistant", "content": Value::Null });
        }
        assistant["tool_calls"] = calls
            .iter()
            .map(|c| json!({ "id": c.id, "type": "function", "function": { "name": c.name, "arguments": c.arguments.to_string() } }))
            .collect();
        self.messages.push(assistant);
        let usage = parse_usage(&resp).or_else(|| {
            Some(Usage {
                input_tokens: estimate_tokens(&body["messages"].to_string()).input_tokens,
                output_tokens: estimate_tokens(&resp["choices"][0]["message"].to_string()).input_tokens,
            })
        });
        Ok(RoundReply { calls, usage })
    }

    fn transcript(&self) -> Option<Value> {
        Some(Value::Array(self.messages.clone()))
    }
}
