#![no_main]

use libfuzzer_sys::fuzz_target;

// NDJSON record lines come from untrusted pipelines; parsing must never
// panic, and accepted records must satisfy the record invariant.
fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = osd_core::Record::from_json_line(line, "fuzz") {
        assert!(
            record.findings.is_disjoint(&record.absent_findings),
            "a finding is both present and absent"
        );
    }
});
