//! Clustering agreement (NMI) and topic coherence (document-level NPMI).

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::em::{pick_ranked, ModelState, Rank};
use crate::error::{Error, Result};

/// Additive smoothing on the joint count.
pub const NPMI_EPSILON: f64 = 1e-12;

/// Each document's label: its most probable topic, ties to the smaller id.
pub fn doc_topic_labels(state: &ModelState) -> Vec<usize> {
    state.topic_doc.iter().map(|row| pick_ranked(row, Rank::Best)).collect()
}

fn dense_labels<T: Hash + Eq>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect();
    (dense, ids.len())
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(pred; truth) / sqrt(H(pred) H(truth))` in nats. Two single-cluster
/// partitions score 1; a single-cluster partition against a non-trivial one
/// scores 0.
pub fn nmi<A: Hash + Eq, B: Hash + Eq>(pred: &[A], truth: &[B]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::Validation("nmi needs at least one element".into()));
    }
    let (p, np) = dense_labels(pred);
    let (t, nt) = dense_labels(truth);
    let n = pred.len() as f64;

    let mut joint = vec![0u64; np * nt];
    let mut row = vec![0u64; np];
    let mut col = vec![0u64; nt];
    for (&a, &b) in p.iter().zip(&t) {
        joint[a * nt + b] += 1;
        row[a] += 1;
        col[b] += 1;
    }
    let (hp, ht) = (entropy(&row, n), entropy(&col, n));
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    // Terms are summed in sorted order so that nmi(a, b) == nmi(b, a) exactly.
    let mut terms: Vec<f64> = Vec::new();
    for a in 0..np {
        for b in 0..nt {
            let c = joint[a * nt + b];
            if c > 0 {
                let c = c as f64;
                terms.push(c / n * (c * n / (row[a] as f64 * col[b] as f64)).ln());
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    let mi: f64 = terms.iter().sum();
    let value = (mi / (hp * ht).sqrt()).clamp(0.0, 1.0);
    Ok(value)
}

/// Document-frequency statistics of a reference corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceIndex {
    n_docs: u64,
    doc_frequency: HashMap<String, u64>,
    candidates: HashMap<String, usize>,
    /// Keyed by candidate indices `(i, j)` with `i < j`.
    pair_frequency: HashMap<(usize, usize), u64>,
}

impl ReferenceIndex {
    /// Indexes `documents` (each an iterator of tokens). Pair counts are kept
    /// only for words in `candidates`.
    pub fn build<D, W>(documents: &[D], candidates: &[W]) -> Result<Self>
    where
        D: AsRef<[String]> + Sync,
        W: AsRef<str>,
    {
        if documents.is_empty() {
            return Err(Error::Validation("reference corpus is empty".into()));
        }
        let mut candidate_ids: HashMap<String, usize> = HashMap::new();
        for w in candidates {
            let next = candidate_ids.len();
            candidate_ids.entry(w.as_ref().to_owned()).or_insert(next);
        }

        type Partial = (HashMap<String, u64>, HashMap<(usize, usize), u64>);
        let (doc_frequency, pair_frequency) = documents
            .par_iter()
            .fold(Partial::default, |(mut df, mut pairs), doc| {
                let words: HashSet<&str> = doc.as_ref().iter().map(String::as_str).collect();
                let mut present: Vec<usize> = Vec::new();
                for w in words {
                    *df.entry(w.to_owned()).or_insert(0) += 1;
                    if let Some(&id) = candidate_ids.get(w) {
                        present.push(id);
                    }
                }
                present.sort_unstable();
                for (i, &a) in present.iter().enumerate() {
                    for &b in &present[i + 1..] {
                        *pairs.entry((a, b)).or_insert(0) += 1;
                    }
                }
                (df, pairs)
            })
            .reduce(Partial::default, |(mut df, mut pairs), (df2, pairs2)| {
                for (w, c) in df2 {
                    *df.entry(w).or_insert(0) += c;
                }
                for (p, c) in pairs2 {
                    *pairs.entry(p).or_insert(0) += c;
                }
                (df, pairs)
            });

        Ok(Self { n_docs: documents.len() as u64, doc_frequency, candidates: candidate_ids, pair_frequency })
    }

    /// Indexes a corpus, ignoring sentence and group boundaries.
    pub fn from_corpus<W: AsRef<str>>(corpus: &Corpus, candidates: &[W]) -> Result<Self> {
        let vocab = corpus.vocabulary();
        let docs: Vec<Vec<String>> = corpus
            .documents()
            .iter()
            .map(|d| d.tokens().map(|w| vocab.word(w).unwrap_or_default().to_owned()).collect())
            .collect();
        Self::build(&docs, candidates)
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn doc_frequency(&self, word: &str) -> u64 {
        self.doc_frequency.get(word).copied().unwrap_or(0)
    }

    /// Documents containing both words. `None` if either word was not a
    /// candidate at build time.
    pub fn pair_frequency(&self, a: &str, b: &str) -> Option<u64> {
        let (i, j) = (*self.candidates.get(a)?, *self.candidates.get(b)?);
        if i == j {
            return Some(self.doc_frequency(a));
        }
        let key = if i < j { (i, j) } else { (j, i) };
        Some(self.pair_frequency.get(&key).copied().unwrap_or(0))
    }

    /// NPMI of two distinct words; `-1` when either never occurs. Words
    /// that both occur in every reference document score `1`.
    pub fn npmi(&self, a: &str, b: &str) -> Result<f64> {
        let n = self.n_docs as f64;
        let (df_a, df_b) = (self.doc_frequency(a), self.doc_frequency(b));
        if df_a == 0 || df_b == 0 {
            return Ok(-1.0);
        }
        let pair = self.pair_frequency(a, b).ok_or_else(|| Error::Validation(format!("pair ({a:?}, {b:?}) was not indexed")))?;
        if pair == self.n_docs {
            return Ok(1.0);
        }
        let p_joint = (pair as f64 + NPMI_EPSILON) / n;
        let (p_a, p_b) = (df_a as f64 / n, df_b as f64 / n);
        let value = (p_joint / (p_a * p_b)).ln() / -p_joint.ln();
        debug_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&value), "npmi {value} out of range");
        Ok(value.clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// Mean over retained topics; `None` if every topic was skipped.
    pub overall: Option<f64>,
    /// Mean pairwise NPMI per topic; `None` for topics with fewer than two
    /// distinct words.
    pub per_topic: Vec<Option<f64>>,
}

/// Mean pairwise NPMI of each topic's word list (duplicates removed).
pub fn npmi_coherence<W: AsRef<str>>(topics: &[Vec<W>], index: &ReferenceIndex) -> Result<CoherenceReport> {
    let mut per_topic = Vec::with_capacity(topics.len());
    for words in topics {
        let mut seen = HashSet::new();
        let distinct: Vec<&str> = words.iter().map(AsRef::as_ref).filter(|w| seen.insert(*w)).collect();
        if distinct.len() < 2 {
            per_topic.push(None);
            continue;
        }
        let mut total = 0.0;
        let mut pairs = 0usize;
        for (i, a) in distinct.iter().enumerate() {
            for b in &distinct[i + 1..] {
                total += index.npmi(a, b)?;
                pairs += 1;
            }
        }
        per_topic.push(Some(total / pairs as f64));
    }
    let retained: Vec<f64> = per_topic.iter().flatten().copied().collect();
    let overall = (!retained.is_empty()).then(|| retained.iter().sum::<f64>() / retained.len() as f64);
    Ok(CoherenceReport { overall, per_topic })
}
