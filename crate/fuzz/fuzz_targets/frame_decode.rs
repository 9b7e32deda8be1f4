#![no_main]

use libfuzzer_sys::fuzz_target;
use stratagem_bridge::frame::read_frame;
use stratagem_bridge::{decode_frame, encode_frame, Message};

fuzz_target!(|data: &[u8]| {
    if let Ok((payload, used)) = decode_frame(data) {
        assert_eq!(&encode_frame(payload)[..], &data[..used]);
    }
    let mut r = data;
    while let Ok(Some(p)) = read_frame(&mut r) {
        let _ = serde_json::from_slice::<Message>(&p);
    }
});
