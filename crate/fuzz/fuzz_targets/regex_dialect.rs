#![no_main]

use libfuzzer_sys::fuzz_target;

// The dialect recognizer is a hand-written parser over untrusted pattern
// text; neither it nor host compilation of accepted patterns may panic.
fuzz_target!(|data: &[u8]| {
    let Ok(pattern) = std::str::from_utf8(data) else {
        return;
    };
    if osd_core::regex_dialect::check_pattern(pattern).is_ok() {
        // Compilation may still refuse (e.g. program size limits) but
        // must fail cleanly.
        let _ = osd_core::regex_dialect::compile(pattern, "ims");
    }
});
