//! Read-mostly HTTP facade. All mutation goes through `POST /tool`.

use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde::Deserialize;
use serde_json::Value;

use stratagem_core::engine::PlayerId;

use crate::host::GameHost;
use crate::tools::{ErrorCode, ToolError, ToolRequest, ToolResponse};

/// Overrides the bind address of `serve`.
pub const BIND_ENV: &str = "STRATAGEM_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8737";

pub fn bind_address() -> String {
    std::env::var(BIND_ENV).unwrap_or_else(|_| DEFAULT_BIND.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestResponse {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

const JSON: &str = "application/json";
const MARKDOWN: &str = "text/markdown; charset=utf-8";

fn json_body(status: u16, v: &impl serde::Serialize) -> RestResponse {
    RestResponse { status, content_type: JSON, body: serde_json::to_string(v).expect("body serializes") }
}

fn error(status: u16, code: ErrorCode, msg: impl Into<String>, field: Option<&str>) -> RestResponse {
    json_body(status, &ToolResponse::failure(ToolError::new(code, msg, field)))
}

fn status_for(e: &ToolError) -> u16 {
    match e.code {
        ErrorCode::Terminal => 409,
        ErrorCode::NotFound => 404,
        _ => 400,
    }
}

/// `POST /tool` body.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolCall {
    pub player: PlayerId,
    pub name: String,
    #[serde(default)]
    pub arguments: Value,
}

fn query_param<T: std::str::FromStr>(query: &[(String, String)], key: &str) -> Result<Option<T>, RestResponse> {
    match query.iter().find(|(k, _)| k == key) {
        None => Ok(None),
        Some((_, v)) => v.parse().map(Some).map_err(|_| {
            error(400, ErrorCode::Schema, format!("query parameter {key}={v:?} is not valid"), Some(key))
        }),
    }
}

fn required<T: std::str::FromStr>(query: &[(String, String)], key: &str) -> Result<T, RestResponse> {
    query_param(query, key)?
        .ok_or_else(|| error(400, ErrorCode::Schema, format!("missing query parameter {key}"), Some(key)))
}

/// Routes one request. Bodies are exactly what the in-process calls return.
pub fn handle_rest_request(host: &mut GameHost, method: &str, url: &str, body: &str) -> RestResponse {
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    let query: Vec<(String, String)> = url::form_urlencoded::parse(query.as_bytes()).into_owned().collect();
    let out = match (method, path) {
        ("GET", "/state") => required(&query, "player").map(|p: PlayerId| match host.state_doc(p) {
            Ok(doc) => RestResponse { status: 200, content_type: MARKDOWN, body: doc },
            Err(e) => json_body(status_for(&e), &ToolResponse::failure(e)),
        }),
        ("GET", "/catalog") => required(&query, "player").map(|p: PlayerId| match host.catalog(p) {
            Ok(c) => json_body(200, &c),
            Err(e) => json_body(status_for(&e), &ToolResponse::failure(e)),
        }),
        ("GET", "/events") => required(&query, "since").and_then(|since: u64| {
            let player = query_param(&query, "player")?;
            Ok(match host.events(since, player) {
                Ok(ev) => json_body(200, &ev),
                Err(e) => json_body(status_for(&e), &ToolResponse::failure(e)),
            })
        }),
        ("GET", "/tools") => required(&query, "player").map(|p: PlayerId| match host.list_tools(p) {
            Ok(t) => json_body(200, &t),
            Err(e) => json_body(status_for(&e), &ToolResponse::failure(e)),
        }),
        ("POST", "/tool") => match serde_json::from_str::<ToolCall>(body) {
            Err(e) => Ok(error(400, ErrorCode::Schema, format!("bad tool request: {e}"), None)),
            Ok(call) => {
                let resp = host.call_tool(call.player, &ToolRequest { name: call.name, arguments: call.arguments });
                let status = resp.error.as_ref().map_or(200, status_for);
                Ok(json_body(status, &resp))
            }
        },
        ("POST", "/advance") if host.test_mode => Ok(match host.advance() {
            Ok(v) => json_body(200, &v),
            Err(e) => json_body(status_for(&e), &ToolResponse::failure(e)),
        }),
        _ => Ok(error(404, ErrorCode::NotFound, format!("no route {method} {path}"), None)),
    };
    out.unwrap_or_else(|e| e)
}

/// A background HTTP server over one hosted game.
pub struct RestServer {
    server: Arc<tiny_http::Server>,
    thread: Option<JoinHandle<()>>,
    addr: SocketAddr,
}

impl RestServer {
    pub fn start(host: Arc<Mutex<GameHost>>, addr: &str) -> io::Result<Self> {
        let server = Arc::new(tiny_http::Server::http(addr).map_err(io::Error::other)?);
        let addr = server.server_addr().to_ip().ok_or_else(|| io::Error::other("not an IP listener"))?;
        let worker = Arc::clone(&server);
        let thread = std::thread::spawn(move || {
            for mut req in worker.incoming_requests() {
                let mut body = String::new();
                let resp = if req.as_reader().read_to_string(&mut body).is_err() {
                    error(400, ErrorCode::Malformed, "request body is not UTF-8", None)
                } else {
                    let mut guard = host.lock().unwrap_or_else(|p| p.into_inner());
                    handle_rest_request(&mut guard, req.method().as_str(), req.url(), &body)
                };
                let header = tiny_http::Header::from_bytes("Content-Type", resp.content_type).expect("static header");
                let _ = req.respond(tiny_http::Response::from_string(resp.body).with_status_code(resp.status).with_header(header));
            }
        });
        Ok(Self { server, thread: Some(thread), addr })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for RestServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}
