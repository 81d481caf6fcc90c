#![no_main]

use libfuzzer_sys::fuzz_target;
use orient_core::evaluation::EvalReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = EvalReport::from_jsonl(text) {
        let again = EvalReport::from_jsonl(&report.to_jsonl()).expect("re-parse of serialized report");
        assert_eq!(again.per_sample.len(), report.per_sample.len());
    }
});
