#![no_main]

use libfuzzer_sys::fuzz_target;
use orient_core::dataset::SplitManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(manifest) = SplitManifest::from_jsonl(text) {
        // anything accepted must survive a rewrite
        SplitManifest::from_jsonl(&manifest.to_jsonl()).expect("re-parse of serialized manifest");
    }
});
