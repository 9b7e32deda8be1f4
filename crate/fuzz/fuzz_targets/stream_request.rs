#![no_main]

use std::io::{Cursor, Read, Write};
use std::sync::{Mutex, OnceLock};

use libfuzzer_sys::fuzz_target;
use stratagem_bridge::{handle_connection, GameHost};
use stratagem_core::{GameConfig, Session};

struct Duplex {
    input: Cursor<Vec<u8>>,
    output: Vec<u8>,
}

impl Read for Duplex {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.input.read(buf)
    }
}

impl Write for Duplex {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.output.extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

static BASE: OnceLock<Session> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    let base = BASE.get_or_init(|| {
        let mut s = Session::new(GameConfig::with_seed(1)).unwrap();
        s.attach_external(0).unwrap();
        s
    });
    // advance requests mutate the game, so every input starts fresh
    let host = Mutex::new(GameHost::new(base.clone(), true));
    let mut d = Duplex { input: Cursor::new(data.to_vec()), output: Vec::new() };
    handle_connection(&host, &mut d);
});
