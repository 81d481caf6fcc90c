#![no_main]

use libfuzzer_sys::fuzz_target;
use orient_core::dataset::parse_discard_list;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    for id in parse_discard_list(&text) {
        assert!(!id.is_empty());
        assert_eq!(id.trim(), id);
    }
});
