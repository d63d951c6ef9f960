#![no_main]

use bos_core::Corpus;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(corpus) = Corpus::from_reader(data) else { return };
    // A parsed corpus must serialize and parse back to the same thing.
    let mut out = Vec::new();
    corpus.to_writer(&mut out).unwrap();
    let again = Corpus::from_reader(out.as_slice()).unwrap();
    assert_eq!(again.documents(), corpus.documents());
    assert_eq!(again.n_groups(), corpus.n_groups());
});
