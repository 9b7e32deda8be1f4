#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use serde_json::Value;
use stratagem_bridge::tools::validate_arguments;
use stratagem_bridge::{call_tool, Episode, ToolRequest};
use stratagem_core::codec::{tool_schemas, ToolSchema};
use stratagem_core::{GameConfig, Session};

static BASE: OnceLock<(Session, Vec<ToolSchema>)> = OnceLock::new();

// First byte picks the tool, the rest is the JSON arguments object.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else { return };
    let Ok(args) = serde_json::from_slice::<Value>(rest) else { return };
    let (base, tools) = BASE.get_or_init(|| {
        let mut s = Session::new(GameConfig::with_seed(3)).unwrap();
        s.attach_external(0).unwrap();
        (s, tool_schemas())
    });
    let schema = &tools[pick as usize % tools.len()];
    let _ = validate_arguments(schema, &args);
    let mut s = base.clone();
    let resp = call_tool(&mut s, &mut Episode::new(0), &ToolRequest::new(&schema.name, args));
    if !resp.ok {
        assert!(&s == base, "a rejected call changed the session");
    }
});
