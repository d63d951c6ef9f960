#![no_main]

use bos_core::{split_sentences, tokenize_words};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for sentence in split_sentences(text) {
        assert!(!sentence.is_empty());
        assert_eq!(sentence.trim(), sentence);
        let tokens = tokenize_words(&sentence);
        assert_eq!(tokenize_words(&tokens.join(" ")), tokens);
    }
});
