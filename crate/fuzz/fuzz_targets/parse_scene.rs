#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Err(e) = perspectiva::parse_scene(&text) {
        let line = text.split('\n').nth(e.span.line - 1).expect("error line inside input");
        assert!(e.span.column >= 1 && e.span.column <= line.chars().count() + 1);
    }
});
