//! Word-topic scores from hard group assignments.
//!
//! For word `w` and topic `t`:
//!
//! ```text
//! n_min(w)   = n(w)/k + std_t n(w|t) + max_d n(w,d)
//! score(w|t) = sqrt(max(n(w|t) - n_min(w), 0)) · (p(t|w) - 1/k)
//! ```
//!
//! with `p(t|w) = n(w|t) / n(w)` and the population standard deviation over
//! the `k` topic counts. Only words with a positive score are reported.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Vocabulary, WordId};

/// Count statistics and scores for every vocabulary word.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicScores {
    k: usize,
    n_words: usize,
    /// `n(w|t)`, word-major: `[w * k + t]`.
    n_wt: Vec<u64>,
    n_w: Vec<u64>,
    max_doc_count: Vec<u64>,
    std_across_topics: Vec<f64>,
    n_min: Vec<f64>,
    p_t_given_w: Vec<f64>,
    score: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredWord {
    #[serde(rename = "w")]
    pub word: String,
    pub score: f64,
    pub n_wt: u64,
}

/// `n(w)/k` plus the population standard deviation of the topic counts plus
/// the word's maximum per-document count.
pub fn compute_n_min(topic_counts: &[u64], max_doc_count: u64) -> f64 {
    let (_, std) = mean_std(topic_counts);
    let total: u64 = topic_counts.iter().sum();
    total as f64 / topic_counts.len() as f64 + std + max_doc_count as f64
}

fn mean_std(counts: &[u64]) -> (f64, f64) {
    let k = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / k;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / k;
    (mean, var.sqrt())
}

/// `sqrt(max(n_wt - n_min, 0)) · (p_tw - 1/k)`.
pub fn score(n_wt: u64, n_min: f64, p_t_given_w: f64, k: usize) -> f64 {
    (n_wt as f64 - n_min).max(0.0).sqrt() * (p_t_given_w - 1.0 / k as f64)
}

/// `(n(w), std, n_min, p(t|w) per topic, score per topic)` for one word.
type WordStats = (u64, f64, f64, Vec<f64>, Vec<f64>);

impl TopicScores {
    /// Counts every token of every group under its assigned topic and derives
    /// all per-word statistics.
    pub fn compute(corpus: &Corpus, assignments: &[Vec<usize>], k: usize) -> Self {
        let n_words = corpus.vocabulary().len();
        let mut n_wt = vec![0u64; n_words * k];
        let mut max_doc_count = vec![0u64; n_words];
        let mut doc_counts = vec![0u64; n_words];
        let mut touched: Vec<WordId> = Vec::new();

        for (doc, topics) in corpus.documents().iter().zip(assignments) {
            for (group, &t) in doc.groups.iter().zip(topics) {
                for w in group.tokens() {
                    let w = w as usize;
                    n_wt[w * k + t] += 1;
                    if doc_counts[w] == 0 {
                        touched.push(w as WordId);
                    }
                    doc_counts[w] += 1;
                }
            }
            for w in touched.drain(..) {
                let w = w as usize;
                max_doc_count[w] = max_doc_count[w].max(doc_counts[w]);
                doc_counts[w] = 0;
            }
        }
        Self::from_counts(n_wt, max_doc_count, k)
    }

    /// Builds scores from raw counts: `n_wt` word-major and one maximum
    /// per-document count per word.
    pub fn from_counts(n_wt: Vec<u64>, max_doc_count: Vec<u64>, k: usize) -> Self {
        assert!(k > 0);
        assert_eq!(n_wt.len(), max_doc_count.len() * k);
        let n_words = max_doc_count.len();

        let per_word: Vec<WordStats> = n_wt
            .par_chunks(k)
            .zip(max_doc_count.par_iter())
            .map(|(counts, &max_d)| {
                let n_w: u64 = counts.iter().sum();
                if n_w == 0 {
                    return (0, 0.0, f64::NAN, vec![0.0; k], vec![0.0; k]);
                }
                let (_, std) = mean_std(counts);
                let n_min = compute_n_min(counts, max_d);
                let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n_w as f64).collect();
                let s = counts.iter().zip(&p).map(|(&c, &p)| score(c, n_min, p, k)).collect();
                (n_w, std, n_min, p, s)
            })
            .collect();

        let mut out = Self {
            k,
            n_words,
            n_wt,
            n_w: Vec::with_capacity(n_words),
            max_doc_count,
            std_across_topics: Vec::with_capacity(n_words),
            n_min: Vec::with_capacity(n_words),
            p_t_given_w: Vec::with_capacity(n_words * k),
            score: Vec::with_capacity(n_words * k),
        };
        for (n_w, std, n_min, p, s) in per_word {
            out.n_w.push(n_w);
            out.std_across_topics.push(std);
            out.n_min.push(n_min);
            out.p_t_given_w.extend(p);
            out.score.extend(s);
        }
        out
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_wt(&self, w: WordId, t: usize) -> u64 {
        self.n_wt[w as usize * self.k + t]
    }

    pub fn n_w(&self, w: WordId) -> u64 {
        self.n_w[w as usize]
    }

    pub fn max_doc_count(&self, w: WordId) -> u64 {
        self.max_doc_count[w as usize]
    }

    pub fn std_across_topics(&self, w: WordId) -> f64 {
        self.std_across_topics[w as usize]
    }

    /// `NaN` for words that never occur.
    pub fn n_min(&self, w: WordId) -> f64 {
        self.n_min[w as usize]
    }

    pub fn p_t_given_w(&self, w: WordId, t: usize) -> f64 {
        self.p_t_given_w[w as usize * self.k + t]
    }

    /// Zero for words that never occur.
    pub fn score(&self, w: WordId, t: usize) -> f64 {
        self.score[w as usize * self.k + t]
    }

    /// At most `n` positive-score words of `topic`, by descending score, then
    /// descending `n(w|t)`, then word.
    pub fn top_words(&self, topic: usize, n: usize, vocabulary: &Vocabulary) -> Vec<ScoredWord> {
        let mut ranked: Vec<ScoredWord> = (0..self.n_words as WordId)
            .filter(|&w| self.score(w, topic) > 0.0)
            .map(|w| ScoredWord {
                word: vocabulary.word(w).unwrap_or_default().to_owned(),
                score: self.score(w, topic),
                n_wt: self.n_wt(w, topic),
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then(b.n_wt.cmp(&a.n_wt)).then_with(|| a.word.cmp(&b.word))
        });
        ranked.truncate(n);
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;

    #[test]
    fn worked_case() {
        let n_min = compute_n_min(&[10, 0, 0, 0, 0], 3);
        assert!((n_min - 9.0).abs() < 1e-12);
        let scores = TopicScores::from_counts(vec![10, 0, 0, 0, 0], vec![3], 5);
        assert!((scores.score(0, 0) - 0.8).abs() < 1e-12);
        assert!((1..5).all(|t| scores.score(0, t) == 0.0));
        assert!((scores.std_across_topics(0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_word_is_excluded() {
        let n_min = compute_n_min(&[2, 2, 2, 2, 2], 1);
        assert_eq!(n_min, 3.0);
        let scores = TopicScores::from_counts(vec![2; 5], vec![1], 5);
        assert!((0..5).all(|t| scores.score(0, t) == 0.0));
        assert_eq!(score(2, 3.0, 0.2, 5), 0.0);
    }

    #[test]
    fn relevance_zero_means_score_zero() {
        assert_eq!(score(100, 1.0, 0.25, 4), 0.0);
    }

    #[test]
    fn duplicate_tokens_are_counted() {
        let mut b = CorpusBuilder::new();
        b.add_tokenized("d".into(), None, vec![vec![vec!["fish", "fish"]]]).unwrap();
        let corpus = b.build();
        let s = TopicScores::compute(&corpus, &[vec![0]], 2);
        let fish = corpus.vocabulary().id("fish").unwrap();
        assert_eq!((s.n_wt(fish, 0), s.n_w(fish), s.max_doc_count(fish)), (2, 2, 2));
    }

    #[test]
    fn split_word_counts() {
        let mut b = CorpusBuilder::new();
        b.add_tokenized("d".into(), None, vec![vec![vec!["w"]], vec![vec!["w"]]]).unwrap();
        let corpus = b.build();
        let s = TopicScores::compute(&corpus, &[vec![0, 1]], 2);
        assert_eq!((s.n_wt(0, 0), s.n_wt(0, 1), s.n_w(0)), (1, 1, 2));
        assert_eq!(s.p_t_given_w(0, 0) + s.p_t_given_w(0, 1), 1.0);
    }

    #[test]
    fn top_words_ordering() {
        // apple and berry tie on score; berry has the higher count.
        let mut vocab_builder = CorpusBuilder::new();
        vocab_builder.add_tokenized("v".into(), None, vec![vec![vec!["apple", "berry", "cherry", "date"]]]).unwrap();
        let vocab = vocab_builder.build().vocabulary().clone();
        let k = 2;
        let scores = TopicScores {
            k,
            n_words: 4,
            n_wt: vec![5, 0, 9, 0, 4, 0, 1, 1],
            n_w: vec![5, 9, 4, 2],
            max_doc_count: vec![1; 4],
            std_across_topics: vec![0.0; 4],
            n_min: vec![0.0; 4],
            p_t_given_w: vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.5, 0.5],
            score: vec![1.5, -0.1, 1.5, -0.2, 2.0, 0.0, 0.0, 0.0],
        };
        let top = scores.top_words(0, 10, &vocab);
        let words: Vec<&str> = top.iter().map(|s| s.word.as_str()).collect();
        assert_eq!(words, vec!["cherry", "berry", "apple"]);
        assert_eq!(scores.top_words(0, 1, &vocab).len(), 1);
        assert!(scores.top_words(1, 10, &vocab).is_empty());
    }
}
