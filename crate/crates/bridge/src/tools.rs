//! The tool server: schema checks, dispatch into the strategy layer and
//! per-episode bookkeeping of consumed tools.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use stratagem_core::codec::{tool_schemas, ToolSchema};
use stratagem_core::engine::PlayerId;
use stratagem_core::session::SessionError;
use stratagem_core::strategy::{Category, ChoiceError, Override};
use stratagem_core::Session;

pub const KEEP_STATUS_QUO: &str = "keep-status-quo";
pub const SET_STRATEGY: &str = "set-strategy";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolRequest {
    pub name: String,
    #[serde(default)]
    pub arguments: Value,
}

impl ToolRequest {
    pub fn new(name: &str, arguments: Value) -> Self {
        Self { name: name.to_string(), arguments }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    UnknownTool,
    Schema,
    InvalidOption,
    Reused,
    Closed,
    UnknownPlayer,
    Terminal,
    Malformed,
    DuplicateId,
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ToolError {
    pub fn new(code: ErrorCode, message: impl Into<String>, field: Option<&str>) -> Self {
        Self { code, message: message.into(), field: field.map(str::to_string) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolResponse {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ToolError>,
}

impl ToolResponse {
    pub fn success(result: Value) -> Self {
        Self { ok: true, result: Some(result), error: None }
    }

    pub fn failure(error: ToolError) -> Self {
        Self { ok: false, result: None, error: Some(error) }
    }

    pub fn code(&self) -> Option<ErrorCode> {
        self.error.as_ref().map(|e| e.code)
    }
}

/// One decision episode for one player: which tools are used up and
/// whether a finishing tool has closed it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub player: PlayerId,
    pub consumed: BTreeSet<String>,
    pub closed: bool,
}

impl Episode {
    pub fn new(player: PlayerId) -> Self {
        Self { player, consumed: BTreeSet::new(), closed: false }
    }

    /// Descriptors still callable in this episode, in descriptor order.
    pub fn list_tools(&self) -> Vec<ToolSchema> {
        if self.closed {
            return Vec::new();
        }
        tool_schemas().into_iter().filter(|t| !self.consumed.contains(&t.name)).collect()
    }
}

/// Checks `args` against the subset of JSON Schema the descriptor uses.
/// Option names are left to the live catalog, which can suggest fixes.
pub fn validate_arguments(schema: &ToolSchema, args: &Value) -> Result<(), ToolError> {
    let err = |msg: String, field: Option<&str>| Err(ToolError::new(ErrorCode::Schema, msg, field));
    let Some(obj) = args.as_object() else {
        return err(format!("arguments for {} must be an object", schema.name), None);
    };
    let props = schema.parameters["properties"].as_object().cloned().unwrap_or_default();
    for key in obj.keys() {
        if !props.contains_key(key) {
            return err(format!("unexpected argument {key:?}"), Some(key));
        }
    }
    for req in schema.parameters["required"].as_array().into_iter().flatten().filter_map(Value::as_str) {
        if !obj.contains_key(req) {
            return err(format!("missing required argument {req:?}"), Some(req));
        }
    }
    for (key, value) in obj {
        check_value(&props[key], value).map_err(|m| ToolError::new(ErrorCode::Schema, format!("{key}: {m}"), Some(key)))?;
    }
    Ok(())
}

fn check_value(rule: &Value, v: &Value) -> Result<(), String> {
    match rule["type"].as_str() {
        Some("string") => {
            let s = v.as_str().ok_or("expected a string")?;
            if let Some(min) = rule["minLength"].as_u64() {
                if (s.trim().chars().count() as u64) < min {
                    return Err(format!("must have at least {min} non-blank characters"));
                }
            }
        }
        Some("integer") => {
            let n = v.as_i64().ok_or("expected an integer")?;
            if rule["minimum"].as_i64().is_some_and(|m| n < m) || rule["maximum"].as_i64().is_some_and(|m| n > m) {
                return Err(format!("{n} is out of range [{}, {}]", rule["minimum"], rule["maximum"]));
            }
        }
        Some("array") => {
            let items = v.as_array().ok_or("expected an array")?;
            for item in items {
                check_value(&rule["items"], item)?;
            }
            if rule["uniqueItems"].as_bool() == Some(true) {
                let mut seen = BTreeSet::new();
                if !items.iter().all(|i| seen.insert(i.to_string())) {
                    return Err("items must be unique".into());
                }
            }
        }
        _ => {}
    }
    Ok(())
}

fn strings(v: Option<&Value>) -> Option<Vec<String>> {
    v.and_then(Value::as_array).map(|a| a.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
}

/// Maps validated arguments to a strategy-layer override. `None` for
/// keep-status-quo, which changes nothing.
pub fn to_override(name: &str, args: &Map<String, Value>) -> Option<Override> {
    let text = |k: &str| args.get(k).and_then(Value::as_str).unwrap_or_default().to_string();
    match name {
        "set-persona" => Some(Override::Persona(
            args.iter().filter(|(k, _)| *k != "rationale").filter_map(|(k, v)| Some((k.clone(), v.as_i64()?))).collect(),
        )),
        "set-research" => Some(Override::Research(text("technology"))),
        "set-policy" => Some(Override::Policy(text("policy"))),
        SET_STRATEGY => Some(Override::Strategy {
            grand: text("grand_strategy"),
            economic: strings(args.get("economic_strategies")),
            military: strings(args.get("military_strategies")),
        }),
        _ => None,
    }
}

fn option_field(name: &str, err: &ChoiceError) -> &'static str {
    match (name, err) {
        ("set-research", _) => "technology",
        ("set-policy", _) => "policy",
        (_, ChoiceError::NotInCatalog { kind, .. } | ChoiceError::Exclusive { kind, .. }) => match kind.name() {
            "Grand" => "grand_strategy",
            "Economic" => "economic_strategies",
            "Military" => "military_strategies",
            _ => "persona",
        },
        _ => "persona",
    }
}

/// Runs one tool call inside an episode. Failed calls leave both the
/// session and the episode untouched.
pub fn call_tool(session: &mut Session, episode: &mut Episode, req: &ToolRequest) -> ToolResponse {
    if episode.closed {
        return ToolResponse::failure(ToolError::new(ErrorCode::Closed, "the decision episode is closed", None));
    }
    let Some(schema) = tool_schemas().into_iter().find(|t| t.name == req.name) else {
        return ToolResponse::failure(ToolError::new(
            ErrorCode::UnknownTool,
            format!("unknown tool {:?}", req.name),
            Some(&req.name),
        ));
    };
    if episode.consumed.contains(&req.name) {
        return ToolResponse::failure(ToolError::new(
            ErrorCode::Reused,
            format!("{} was already used in this episode", req.name),
            Some(&req.name),
        ));
    }
    if let Err(e) = validate_arguments(&schema, &req.arguments) {
        return ToolResponse::failure(e);
    }
    let args = req.arguments.as_object().expect("validated object");
    let rationale = args["rationale"].as_str().expect("validated rationale");
    match to_override(&req.name, args) {
        Some(choice) => {
            if let Err(e) = session.apply_override(episode.player, &choice, rationale) {
                let (code, field) = match &e {
                    SessionError::Choice(c) => (ErrorCode::InvalidOption, Some(option_field(&req.name, c))),
                    SessionError::Engine(_) => (ErrorCode::UnknownPlayer, None),
                };
                return ToolResponse::failure(ToolError::new(code, e.to_string(), field));
            }
        }
        None => {
            if session.state.live_player(episode.player).is_err() {
                return ToolResponse::failure(ToolError::new(
                    ErrorCode::UnknownPlayer,
                    format!("player {} cannot act", episode.player),
                    None,
                ));
            }
            session.overrides[episode.player as usize].rationale.set(Category::Strategy, rationale.to_string());
        }
    }
    episode.consumed.insert(req.name.clone());
    if schema.finishing {
        episode.closed = true;
        session.mark_seen(episode.player);
    }
    ToolResponse::success(json!({ "tool": req.name, "episode_closed": episode.closed }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stratagem_core::GameConfig;

    fn setup() -> (Session, Episode) {
        let mut s = Session::new(GameConfig::with_seed(5)).unwrap();
        s.attach_external(0).unwrap();
        (s, Episode::new(0))
    }

    #[test]
    fn schema_rejects_extra_and_missing_fields() {
        let schema = tool_schemas().into_iter().find(|t| t.name == "set-research").unwrap();
        let e = validate_arguments(&schema, &json!({"technology": "Mining"})).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("rationale"));
        let e = validate_arguments(&schema, &json!({"technology": "Mining", "rationale": "x", "why": 1})).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("why"));
        let e = validate_arguments(&schema, &json!({"technology": 3, "rationale": "x"})).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("technology"));
        assert!(validate_arguments(&schema, &json!({"technology": "Mining", "rationale": "  "})).is_err());
    }

    #[test]
    fn persona_bounds_are_checked() {
        let (mut s, mut ep) = setup();
        let r = call_tool(&mut s, &mut ep, &ToolRequest::new("set-persona", json!({"Boldness": 11, "rationale": "x"})));
        assert_eq!(r.code(), Some(ErrorCode::Schema));
        let r = call_tool(&mut s, &mut ep, &ToolRequest::new("set-persona", json!({"Boldness": 10, "rationale": "x"})));
        assert!(r.ok);
        assert_eq!(s.overrides[0].persona.get(stratagem_core::strategy::PersonaParam::Boldness), 10);
    }

    #[test]
    fn invalid_option_names_the_field_and_suggests() {
        let (mut s, mut ep) = setup();
        let req = ToolRequest::new(
            "set-strategy",
            json!({"grand_strategy": "Conquest", "economic_strategies": ["EarlyExpnasion"], "rationale": "grow"}),
        );
        let r = call_tool(&mut s, &mut ep, &req);
        let e = r.error.unwrap();
        assert_eq!(e.code, ErrorCode::InvalidOption);
        assert_eq!(e.field.as_deref(), Some("economic_strategies"));
        assert!(e.message.contains("EarlyExpansion"));
        assert!(!ep.closed && ep.consumed.is_empty());
    }
}
