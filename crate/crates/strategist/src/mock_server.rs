//! A local chat-completions endpoint that replays scripted replies, for
//! exercising [`crate::llm::LlmStrategist`] without a network.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::{json, Value};

use crate::episode::ToolCall;

#[derive(Clone, Debug)]
pub enum Scripted {
    Reply(Value),
    Status(u16),
}

pub struct MockLlmServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<Value>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockLlmServer {
    /// Serves `script` in order; the last entry repeats once the rest are used.
    pub fn start(script: Vec<Scripted>) -> std::io::Result<Self> {
        assert!(!script.is_empty(), "mock server needs at least one reply");
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server.server_addr().to_ip().expect("tcp listener");
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (reqs, flag) = (requests.clone(), stop.clone());
        let handle = std::thread::spawn(move || {
            let mut next = 0usize;
            while !flag.load(Ordering::SeqCst) {
                let Ok(Some(mut req)) = server.recv_timeout(Duration::from_millis(20)) else { continue };
                let mut body = String::new();
                let _ = req.as_reader().read_to_string(&mut body);
                reqs.lock().unwrap().push(serde_json::from_str(&body).unwrap_or(Value::String(body)));
                let entry = &script[next.min(script.len() - 1)];
                next += 1;
                let resp = match entry {
                    Scripted::Reply(v) => tiny_http::Response::from_string(v.to_string()).with_header(
                        "Content-Type: application/json".parse::<tiny_http::Header>().expect("static header"),
                    ),
                    Scripted::Status(code) => tiny_http::Response::from_string("{}").with_status_code(*code),
                };
                let _ = req.respond(resp);
            }
        });
        Ok(Self { addr, requests, stop, handle: Some(handle) })
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Request bodies received so far.
    pub fn requests(&self) -> Vec<Value> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockLlmServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// A completion whose message carries `calls` as tool calls.
pub fn tool_call_reply(calls: &[ToolCall], usage: Option<(u64, u64)>) -> Value {
    let tool_calls: Vec<Value> = calls
        .iter()
        .enumerate()
        .map(|(i, c)| {
            json!({
                "id": c.id.clone().unwrap_or_else(|| format!("call_{i}")),
                "type": "function",
                "function": { "name": c.name, "arguments": c.arguments.to_string() }
            })
        })
        .collect();
    let mut v = json!({
        "choices": [{ "index": 0, "message": { "role": "assistant", "content": null, "tool_calls": tool_calls }, "finish_reason": "tool_calls" }]
    });
    if let Some((p, c)) = usage {
        v["usage"] = json!({ "prompt_tokens": p, "completion_tokens": c, "total_tokens": p + c });
    }
    v
}
