#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing must never panic on arbitrary bytes, and any document it
// accepts must survive a canonical round trip unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(definition) = osd_core::parse_definition(data) {
        let bytes = osd_core::serialize_definition(&definition);
        let reparsed = osd_core::parse_definition(&bytes)
            .expect("canonical serialization parses back");
        assert_eq!(reparsed, definition, "round trip changed the definition");
        assert_eq!(
            osd_core::serialize_definition(&reparsed),
            bytes,
            "canonical serialization is not stable"
        );
    }
});
