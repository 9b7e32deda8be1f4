#![no_main]

use libfuzzer_sys::fuzz_target;
use stratagem_core::engine::{from_save_text, to_save_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = from_save_text(text) {
        let again = from_save_text(&to_save_text(&state)).expect("own output parses");
        assert!(again == state);
    }
});
