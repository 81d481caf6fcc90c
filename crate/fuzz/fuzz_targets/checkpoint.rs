#![no_main]

use libfuzzer_sys::fuzz_target;
use orient_core::regressor::ModelCheckpoint;

fuzz_target!(|data: &[u8]| {
    if let Ok(ckpt) = ModelCheckpoint::from_bytes(data) {
        let again = ModelCheckpoint::from_bytes(&ckpt.to_bytes()).expect("re-parse of serialized checkpoint");
        assert_eq!(again.tensors.len(), ckpt.tensors.len());
        // rebuilding may fail on a bad architecture but must not panic
        let _ = ckpt.to_model();
    }
});
