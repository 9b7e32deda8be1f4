#![no_main]

use libfuzzer_sys::fuzz_target;
use serde_json::Value;
use stratagem_strategist::llm::{parse_tool_calls, parse_usage};

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = serde_json::from_slice::<Value>(data) {
        let _ = parse_tool_calls(&v);
        let _ = parse_usage(&v);
    }
});
