//! Drives decision episodes between a game session and a strategist:
//! scripted controls, randomized mocks and a chat-completions client.

pub mod episode;
pub mod llm;
pub mod mock;
pub mod mock_server;
pub mod scripted;

pub use episode::{
    is_finishing, run_decision_episode, DecisionRecord, EpisodeConfig, Outcome, RoundInput, RoundReply, Strategist,
    StrategistError, ToolCall, ToolCallRecord, Usage,
};
pub use llm::{system_prompt, LlmConfig, LlmStrategist};
pub use mock::{NeverFinish, RandomStrategist, Slow, Unreachable};
pub use mock_server::{tool_call_reply, MockLlmServer, Scripted};
pub use scripted::{scripted_decide, Script, ScriptedStrategist, UnknownScript};
