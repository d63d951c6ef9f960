#![no_main]

use bos_core::Manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = serde_json::from_slice::<Manifest>(data) {
        let _ = m.config.validate();
        let text = serde_json::to_vec(&m).unwrap();
        let _: Manifest = serde_json::from_slice(&text).unwrap();
    }
});
