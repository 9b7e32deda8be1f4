#![no_main]

use libfuzzer_sys::fuzz_target;
use stratagem_harness::record::parse_line;
use stratagem_harness::RecordReader;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = parse_line(text, 1) {
            let line = serde_json::to_string(&r).unwrap();
            assert!(parse_line(&line, 1).unwrap() == r);
        }
    }
    for _ in RecordReader::new(data) {}
});
