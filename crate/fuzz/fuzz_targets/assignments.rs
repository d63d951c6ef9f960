#![no_main]

use bos_core::model::parse_assignments;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_assignments(data);
});
