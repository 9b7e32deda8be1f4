//! Transports around a hosted game: a length-prefixed stream protocol, a
//! small REST facade and the tool server strategists talk to.

pub mod frame;
pub mod host;
pub mod rest;
pub mod stream;
pub mod tools;

pub use frame::{decode_frame, encode_frame, Message, MessageKind, MAX_FRAME};
pub use host::GameHost;
pub use rest::{handle_rest_request, RestResponse, RestServer};
pub use stream::{dispatch, handle_connection, serve_stream, Disconnect, Request};
pub use tools::{call_tool, Episode, ErrorCode, ToolError, ToolRequest, ToolResponse};
