//! The framed stream server. One client per game at a time; requests are
//! answered strictly in order and an event frame follows every turn.

use std::collections::HashSet;
use std::io::{self, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use stratagem_core::engine::PlayerId;

use crate::frame::{read_frame, write_frame, FrameError, Message, MessageKind};
use crate::host::GameHost;
use crate::tools::{ErrorCode, ToolError, ToolRequest, ToolResponse};

/// Request bodies, tagged by `op`.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    GetTurn,
    GetState { player: PlayerId },
    GetCatalog { player: PlayerId },
    GetEvents { since: u64, player: Option<PlayerId> },
    ListTools { player: PlayerId },
    CallTool { player: PlayerId, name: String, #[serde(default)] arguments: Value },
    Advance,
}

/// How a connection ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disconnect {
    Eof,
    Truncated,
    TooLarge,
    Io,
}

fn reply(r: Result<Value, ToolError>) -> ToolResponse {
    match r {
        Ok(v) => ToolResponse::success(v),
        Err(e) => ToolResponse::failure(e),
    }
}

/// Executes one request against the host. Also used by in-process callers
/// that want byte-identical answers.
pub fn dispatch(host: &mut GameHost, req: Request) -> ToolResponse {
    match req {
        Request::GetTurn => ToolResponse::success(json!({ "turn": host.turn() })),
        Request::GetState { player } => reply(host.state_doc(player).map(|d| json!({ "doc": d }))),
        Request::GetCatalog { player } => {
            reply(host.catalog(player).map(|c| serde_json::to_value(c).expect("catalog serializes")))
        }
        Request::GetEvents { since, player } => {
            reply(host.events(since, player).map(|e| serde_json::to_value(e).expect("events serialize")))
        }
        Request::ListTools { player } => {
            reply(host.list_tools(player).map(|t| serde_json::to_value(t).expect("tools serialize")))
        }
        Request::CallTool { player, name, arguments } => host.call_tool(player, &ToolRequest { name, arguments }),
        Request::Advance if !host.test_mode => {
            ToolResponse::failure(ToolError::new(ErrorCode::NotFound, "advance is only available in test mode", None))
        }
        Request::Advance => reply(host.advance()),
    }
}

fn malformed(msg: impl Into<String>) -> ToolResponse {
    ToolResponse::failure(ToolError::new(ErrorCode::Malformed, msg, None))
}

fn respond<S: Write>(stream: &mut S, id: u64, body: &ToolResponse) -> io::Result<()> {
    let m = Message { id, kind: MessageKind::Response, body: serde_json::to_value(body).expect("response serializes") };
    write_frame(stream, serde_json::to_string(&m).expect("message serializes").as_bytes())
}

/// Serves one client until it disconnects or sends an oversized frame.
/// Nothing the client sends can make this panic.
pub fn handle_connection<S: Read + Write>(host: &Mutex<GameHost>, stream: &mut S) -> Disconnect {
    let mut ids = HashSet::new();
    let mut event_id = 0u64;
    loop {
        let payload = match read_frame(stream) {
            Ok(Some(p)) => p,
            Ok(None) => return Disconnect::Eof,
            Err(FrameError::TooLarge(_)) => return Disconnect::TooLarge,
            Err(FrameError::Truncated { needed, got }) => {
                let _ = respond(stream, 0, &malformed(format!("truncated frame: needed {needed} bytes, got {got}")));
                return Disconnect::Truncated;
            }
            Err(FrameError::Io(_)) => return Disconnect::Io,
        };
        let (id, body, advanced) = answer(host, &payload, &mut ids);
        if respond(stream, id, &body).is_err() {
            return Disconnect::Io;
        }
        if advanced {
            event_id += 1;
            let turn = body.result.as_ref().map_or(Value::Null, |r| r.clone());
            let m = Message { id: event_id, kind: MessageKind::Event, body: json!({ "turn_ended": turn }) };
            if write_frame(stream, serde_json::to_string(&m).expect("message serializes").as_bytes()).is_err() {
                return Disconnect::Io;
            }
        }
    }
}

fn answer(host: &Mutex<GameHost>, payload: &[u8], ids: &mut HashSet<u64>) -> (u64, ToolResponse, bool) {
    let Ok(text) = std::str::from_utf8(payload) else {
        return (0, malformed("payload is not UTF-8"), false);
    };
    let raw: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return (0, malformed(format!("payload is not JSON: {e}")), false),
    };
    let id = raw.get("id").and_then(Value::as_u64).unwrap_or(0);
    let msg: Message = match serde_json::from_value(raw) {
        Ok(m) => m,
        Err(e) => return (id, malformed(format!("bad message: {e}")), false),
    };
    if msg.kind != MessageKind::Request {
        return (id, malformed("only request frames are accepted"), false);
    }
    if !ids.insert(id) {
        return (id, ToolResponse::failure(ToolError::new(ErrorCode::DuplicateId, format!("id {id} reused"), None)), false);
    }
    let req: Request = match serde_json::from_value(msg.body) {
        Ok(r) => r,
        Err(e) => return (id, malformed(format!("bad request: {e}")), false),
    };
    let is_advance = matches!(req, Request::Advance);
    let mut guard = host.lock().unwrap_or_else(|p| p.into_inner());
    let resp = dispatch(&mut guard, req);
    let advanced = is_advance && resp.ok;
    (id, resp, advanced)
}

/// Accepts clients one after another until `shutdown` is set.
pub fn serve_stream(host: Arc<Mutex<GameHost>>, listener: TcpListener, shutdown: Arc<AtomicBool>) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    while !shutdown.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((mut stream, _)) => {
                stream.set_nonblocking(false)?;
                handle_connection(&host, &mut stream);
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
