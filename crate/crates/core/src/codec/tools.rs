use serde::{Deserialize, Serialize};

/// The machine-readable tool descriptor, shipped with the crate.
pub const TOOLS_JSON: &str = include_str!("../../data/tools.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolSchema {
    pub name: String,
    pub description: String,
    /// Calling this tool closes the decision episode.
    pub finishing: bool,
    /// JSON Schema of the arguments object.
    pub parameters: serde_json::Value,
}

#[derive(Deserialize)]
struct ToolFile {
    version: u32,
    tools: Vec<ToolSchema>,
}

pub fn tool_schemas() -> Vec<ToolSchema> {
    let file: ToolFile = serde_json::from_str(TOOLS_JSON).expect("bundled tool descriptor parses");
    assert_eq!(file.version, 1, "tool descriptor version");
    file.tools
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_tools_two_finishing() {
        let t = tool_schemas();
        assert_eq!(t.len(), 5);
        let fin: Vec<&str> = t.iter().filter(|s| s.finishing).map(|s| s.name.as_str()).collect();
        assert_eq!(fin, ["set-strategy", "keep-status-quo"]);
        for s in &t {
            let req = s.parameters["required"].as_array().unwrap();
            assert!(req.iter().any(|r| r == "rationale"), "{}", s.name);
        }
        let persona = &t[0].parameters["properties"];
        let ints = persona.as_object().unwrap().values().filter(|v| v["type"] == "integer").count();
        assert_eq!(ints, 26);
    }
}
