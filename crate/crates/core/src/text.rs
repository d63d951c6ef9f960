//! Rule-based sentence splitting and word tokenization.
//!
//! Sentences end after a run of `.`, `!` or `?` that is followed either by
//! whitespace and an uppercase letter, or by the end of the text. A run of
//! terminators ending a known abbreviation never splits.

/// Tokens that end in a period without ending a sentence. Matched
/// case-sensitively against the whitespace-delimited word preceding the split.
pub const ABBREVIATIONS: &[&str] = &["Mr.", "Dr.", "e.g.", "i.e.", "etc.", "vs.", "St.", "No."];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits raw text into trimmed sentence strings.
pub fn split_sentences(raw_text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = raw_text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        let mut run_end = i;
        while run_end + 1 < chars.len() && is_terminator(chars[run_end + 1].1) {
            run_end += 1;
        }
        let cut = chars.get(run_end + 1).map_or(raw_text.len(), |&(offset, _)| offset);

        let mut next = run_end + 1;
        while next < chars.len() && chars[next].1.is_whitespace() {
            next += 1;
        }
        let boundary = if next == chars.len() { true } else { next > run_end + 1 && chars[next].1.is_uppercase() };

        if boundary && !ends_with_abbreviation(&raw_text[start..cut]) {
            push_trimmed(&mut sentences, &raw_text[start..cut]);
            start = cut;
        }
        i = run_end + 1;
    }
    push_trimmed(&mut sentences, &raw_text[start..]);
    sentences
}

fn ends_with_abbreviation(candidate: &str) -> bool {
    let last_word = candidate.rsplit(char::is_whitespace).next().unwrap_or_default();
    ABBREVIATIONS.contains(&last_word)
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_owned());
    }
}

/// Lowercases `sentence` and returns its maximal runs of Unicode letters and
/// digits. Everything else is a separator.
pub fn tokenize_words(sentence: &str) -> Vec<String> {
    sentence.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|token| !token.is_empty()).map(str::to_owned).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_empty() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn split_two_declaratives() {
        assert_eq!(split_sentences("A fish eats you. You eat a fish."), vec!["A fish eats you.", "You eat a fish."]);
    }

    #[test]
    fn split_respects_abbreviations() {
        assert_eq!(split_sentences("Dr. Smith left. He ran."), vec!["Dr. Smith left.", "He ran."]);
        assert_eq!(split_sentences("Bring fruit, e.g. Apples. Then go."), vec!["Bring fruit, e.g. Apples.", "Then go."]);
    }

    #[test]
    fn split_needs_uppercase_after_terminator() {
        assert_eq!(split_sentences("Pi is 3.14 roughly. ok then"), vec!["Pi is 3.14 roughly. ok then"]);
        assert_eq!(split_sentences("Wait... What?! No way"), vec!["Wait...", "What?!", "No way"]);
    }

    #[test]
    fn split_without_terminator() {
        assert_eq!(split_sentences("no terminator here"), vec!["no terminator here"]);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize_words("You eat a fish."), vec!["you", "eat", "a", "fish"]);
        assert_eq!(tokenize_words("RTX-2080!"), vec!["rtx", "2080"]);
        assert!(tokenize_words("").is_empty());
        assert_eq!(tokenize_words("Größe: ÜBER 12€"), vec!["größe", "über", "12"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,60}") {
            let once = tokenize_words(&s);
            let twice = tokenize_words(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn split_preserves_content(s in "[A-Za-z .!?\n]{0,80}") {
            let joined: String = split_sentences(&s).concat();
            let strip = |x: &str| x.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            prop_assert_eq!(strip(&joined), strip(&s));
        }
    }
}
