#![no_main]

use bos_core::{EmbeddingMatrix, F32Matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = F32Matrix::from_bytes(data) {
        assert_eq!(m.to_bytes(), data);
        assert!(m.as_slice().iter().all(|x| x.is_finite()));
    }
    if let Ok(m) = EmbeddingMatrix::from_bytes(data) {
        assert!(m.rows().all(|r| r.iter().any(|&x| x != 0.0)));
    }
});
