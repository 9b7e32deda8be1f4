use std::io::Cursor;
use std::sync::Mutex;

use proptest::prelude::*;
use serde_json::json;

use stratagem_bridge::frame::read_frame;
use stratagem_bridge::{decode_frame, encode_frame, handle_connection, GameHost, Message, MAX_FRAME};
use stratagem_core::{GameConfig, Session};

struct Duplex {
    input: Cursor<Vec<u8>>,
    output: Vec<u8>,
}

impl std::io::Read for Duplex {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.input.read(buf)
    }
}

impl std::io::Write for Duplex {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.output.extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

proptest! {
    #[test]
    fn frames_round_trip(payloads in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..300), 0..6)) {
        let wire: Vec<u8> = payloads.iter().flat_map(|p| encode_frame(p)).collect();
        let mut rest = &wire[..];
        for p in &payloads {
            let (got, used) = decode_frame(rest).unwrap();
            prop_assert_eq!(got, &p[..]);
            rest = &rest[used..];
        }
        prop_assert!(rest.is_empty());
        let mut r = &wire[..];
        for p in &payloads {
            prop_assert_eq!(read_frame(&mut r).unwrap().unwrap(), p.clone());
        }
        prop_assert!(read_frame(&mut r).unwrap().is_none());
    }

    #[test]
    fn decode_never_overreads(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        if let Ok((payload, used)) = decode_frame(&bytes) {
            prop_assert!(used <= bytes.len());
            prop_assert_eq!(payload.len() + 4, used);
            prop_assert!(payload.len() <= MAX_FRAME);
        }
    }

    #[test]
    fn every_reply_is_a_well_formed_frame(garbage in proptest::collection::vec(any::<u8>(), 0..80), tail in any::<bool>()) {
        let host = Mutex::new(GameHost::new(Session::new(GameConfig::with_seed(1)).unwrap(), true));
        let mut input = garbage;
        if tail {
            input.extend(Message::request(1, json!({ "op": "get_turn" })).to_frame());
        }
        let mut d = Duplex { input: Cursor::new(input), output: Vec::new() };
        handle_connection(&host, &mut d);
        let mut r = &d.output[..];
        while let Some(p) = read_frame(&mut r).unwrap() {
            let m: Message = serde_json::from_slice(&p).unwrap();
            prop_assert!(m.body.get("ok").is_some());
        }
    }
}
