//! Naive reference implementations used to cross-check the engine. They
//! deliberately share no code with the library beyond reading a corpus.

#![allow(dead_code, clippy::needless_range_loop)]

use bos_core::Corpus;

/// `n(w|t)` by looping over topics, documents, groups assigned to the
/// topic, sentences and tokens.
pub fn topic_word_counts(corpus: &Corpus, assignments: &[Vec<usize>], k: usize) -> Vec<Vec<u64>> {
    let n_words = corpus.vocabulary().len();
    let mut counts = vec![vec![0u64; k]; n_words];
    for w in 0..n_words {
        for t in 0..k {
            for (d, doc) in corpus.documents().iter().enumerate() {
                for (g, group) in doc.groups.iter().enumerate() {
                    if assignments[d][g] != t {
                        continue;
                    }
                    for sentence in &group.sentences {
                        for &token in sentence {
                            if token as usize == w {
                                counts[w][t] += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    counts
}

/// `max_d n(w,d)`.
pub fn max_doc_counts(corpus: &Corpus) -> Vec<u64> {
    let n_words = corpus.vocabulary().len();
    (0..n_words)
        .map(|w| {
            corpus
                .documents()
                .iter()
                .map(|doc| {
                    let mut n = 0;
                    for group in &doc.groups {
                        for sentence in &group.sentences {
                            n += sentence.iter().filter(|&&x| x as usize == w).count() as u64;
                        }
                    }
                    n
                })
                .max()
                .unwrap_or(0)
        })
        .collect()
}

pub fn population_std(values: &[u64]) -> f64 {
    let n = values.len() as f64;
    let mut mean = 0.0;
    for &v in values {
        mean += v as f64;
    }
    mean /= n;
    let mut var = 0.0;
    for &v in values {
        var += (v as f64 - mean) * (v as f64 - mean);
    }
    (var / n).sqrt()
}

pub fn n_min(counts: &[u64], max_doc: u64) -> f64 {
    let total: u64 = counts.iter().sum();
    total as f64 / counts.len() as f64 + population_std(counts) + max_doc as f64
}

pub fn score(counts: &[u64], max_doc: u64, t: usize) -> f64 {
    let k = counts.len() as f64;
    let total: u64 = counts.iter().sum();
    let p = counts[t] as f64 / total as f64;
    let freq = counts[t] as f64 - n_min(counts, max_doc);
    let damped = if freq > 0.0 { freq.sqrt() } else { 0.0 };
    damped * (p - 1.0 / k)
}

/// NMI from an explicit contingency table, geometric-mean normalization.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let la: Vec<usize> = distinct(a);
    let lb: Vec<usize> = distinct(b);
    let count = |pred: &dyn Fn(usize) -> bool| (0..a.len()).filter(|&i| pred(i)).count() as f64;
    let mut ha = 0.0;
    for &x in &la {
        let p = count(&|i| a[i] == x) / n;
        ha -= p * p.ln();
    }
    let mut hb = 0.0;
    for &y in &lb {
        let p = count(&|i| b[i] == y) / n;
        hb -= p * p.ln();
    }
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for &x in &la {
        for &y in &lb {
            let pxy = count(&|i| a[i] == x && b[i] == y) / n;
            if pxy > 0.0 {
                let px = count(&|i| a[i] == x) / n;
                let py = count(&|i| b[i] == y) / n;
                mi += pxy * (pxy / (px * py)).ln();
            }
        }
    }
    mi / (ha * hb).sqrt()
}

fn distinct(v: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = v.to_vec();
    out.sort_unstable();
    out.dedup();
    out
}

/// Set partitions of `n` elements into at most `max_blocks` blocks, as
/// restricted-growth strings.
pub fn set_partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, max_blocks: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let used = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=used.min(max_blocks - 1) {
            prefix.push(label);
            rec(prefix, n, max_blocks, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, max_blocks, &mut out);
    out
}

pub fn doc_frequency(docs: &[Vec<String>], word: &str) -> u64 {
    docs.iter().filter(|d| d.iter().any(|w| w == word)).count() as u64
}

pub fn pair_frequency(docs: &[Vec<String>], a: &str, b: &str) -> u64 {
    docs.iter().filter(|d| d.iter().any(|w| w == a) && d.iter().any(|w| w == b)).count() as u64
}

pub fn npmi(docs: &[Vec<String>], a: &str, b: &str) -> f64 {
    let n = docs.len() as f64;
    let (da, db) = (doc_frequency(docs, a), doc_frequency(docs, b));
    if da == 0 || db == 0 {
        return -1.0;
    }
    let pair = pair_frequency(docs, a, b);
    if pair == docs.len() as u64 {
        return 1.0;
    }
    let pj = (pair as f64 + 1e-12) / n;
    (pj / ((da as f64 / n) * (db as f64 / n))).ln() / -pj.ln()
}
