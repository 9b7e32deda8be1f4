#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use stratagem_bridge::{handle_rest_request, GameHost};
use stratagem_core::{GameConfig, Session};

static BASE: OnceLock<Session> = OnceLock::new();

// Input: method, url and body separated by newlines.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut parts = text.splitn(3, '\n');
    let (method, url, body) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"), parts.next().unwrap_or(""));
    let base = BASE.get_or_init(|| {
        let mut s = Session::new(GameConfig::with_seed(2)).unwrap();
        s.attach_external(0).unwrap();
        s
    });
    let mut host = GameHost::new(base.clone(), true);
    let r = handle_rest_request(&mut host, method, url, body);
    assert!((200..600).contains(&r.status));
});
