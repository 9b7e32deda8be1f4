//! Canonical text save format: a version line followed by pretty-printed
//! JSON in declaration field order. Maps are ordered, so equal states
//! produce byte-identical text.

use super::state::GameState;
use super::EngineError;

pub const SAVE_VERSION: u32 = 1;
const HEADER: &str = "stratagem-save";

pub fn to_save_text(state: &GameState) -> String {
    let body = serde_json::to_string_pretty(state).expect("game state serializes");
    format!("{HEADER} v{SAVE_VERSION}\n{body}\n")
}

pub fn from_save_text(text: &str) -> Result<GameState, EngineError> {
    let (first, body) = text.split_once('\n').ok_or_else(|| EngineError::Save("missing header line".into()))?;
    let version = first
        .strip_prefix(HEADER)
        .and_then(|r| r.trim().strip_prefix('v'))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| EngineError::Save(format!("bad header {first:?}")))?;
    if version != SAVE_VERSION {
        return Err(EngineError::Save(format!("unsupported save version {version} (expected {SAVE_VERSION})")));
    }
    serde_json::from_str(body).map_err(|e| EngineError::Save(e.to_string()))
}
