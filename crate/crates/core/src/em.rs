//! Annealed hard-assignment EM over sentence-group embeddings.
//!
//! Each epoch runs an E-step that assigns every group of a document to the
//! topic maximizing `cos(v_g, v_t) · p(t|d)` (or, with a per-document
//! probability that decays over the epochs, the second best topic), then an
//! M-step that recomputes topic vectors as group means and smooths
//! `p(t|d) = (|A_{t,d}| + c) / (|d| + k·c)`. The smoothing constant starts
//! at `max(c0, alpha)` and halves every epoch down to `alpha`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::embedding::{dot, l2_norm, EmbeddingMatrix, F32Matrix};
use crate::error::{Error, Result};
use crate::init::kmeanspp_init;
use crate::rng::SeedStreams;

/// Documents per M-step reduction block. Fixed so that floating-point sums
/// do not depend on the number of worker threads.
const REDUCTION_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub k: usize,
    pub alpha: f64,
    pub n_s: usize,
    pub epochs: usize,
    pub c0: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { k: 50, alpha: 2.0, n_s: 3, epochs: 10, c0: 8.0, seed: 0 }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be finite and non-negative, got {}", self.alpha));
        }
        if self.n_s == 0 {
            return bad("n_s must be at least 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad(format!("c0 must be finite and positive, got {}", self.c0));
        }
        Ok(())
    }

    /// Smoothing constant used in the first M-step.
    pub fn initial_c(&self) -> f64 {
        self.c0.max(self.alpha)
    }
}

/// Result of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// `k × dim` topic vectors.
    pub topic_vectors: F32Matrix,
    /// `|D| × k` topic-document distribution.
    pub topic_doc: Vec<Vec<f64>>,
    /// Topic of every group, per document.
    pub assignments: Vec<Vec<usize>>,
    /// Smoothing constant used by the most recent M-step.
    pub c_current: f64,
}

impl ModelState {
    pub fn k(&self) -> usize {
        self.topic_vectors.n_rows()
    }

    /// `|A_{t,d}|` for every topic of document `doc`.
    pub fn topic_counts(&self, doc: usize) -> Vec<usize> {
        let mut counts = vec![0; self.k()];
        for &t in &self.assignments[doc] {
            counts[t] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    Best,
    SecondBest,
}

/// Probability that a document uses its best topic in `epoch` (1-based).
pub fn best_rank_probability(epoch: usize, epochs: usize) -> f64 {
    (0.5 + epoch as f64 / (2.0 * epochs as f64)).min(1.0)
}

pub fn explore_rank<R: Rng + ?Sized>(epoch: usize, epochs: usize, rng: &mut R) -> Rank {
    let r: f64 = rng.random();
    if r < 0.5 + epoch as f64 / (2.0 * epochs as f64) {
        Rank::Best
    } else {
        Rank::SecondBest
    }
}

/// Topic vectors with cached norms. A zero topic vector has affinity 0 to
/// every group.
#[derive(Debug, Clone)]
pub struct TopicSet<'a> {
    vectors: &'a F32Matrix,
    norms: Vec<f64>,
}

impl<'a> TopicSet<'a> {
    pub fn new(vectors: &'a F32Matrix) -> Self {
        Self { norms: vectors.rows().map(l2_norm).collect(), vectors }
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn cosines(&self, group: &[f32]) -> Vec<f64> {
        let group_norm = l2_norm(group);
        self.vectors
            .rows()
            .zip(&self.norms)
            .map(|(v, &n)| if n == 0.0 || group_norm == 0.0 { 0.0 } else { (dot(group, v) / (group_norm * n)).clamp(-1.0, 1.0) })
            .collect()
    }

    /// `cos(v_g, v_t) · p(t|d)` for every topic.
    pub fn products(&self, group: &[f32], topic_doc_row: &[f64]) -> Vec<f64> {
        self.cosines(group).into_iter().zip(topic_doc_row).map(|(c, &p)| c * p).collect()
    }
}

/// Index of the largest (or second largest) value; ties go to the smaller
/// index. With a single topic the second-best request returns topic 0.
pub fn pick_ranked(scores: &[f64], rank: Rank) -> usize {
    let better = |a: usize, b: usize| scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    let mut best = 0;
    let mut second: Option<usize> = None;
    for t in 1..scores.len() {
        if better(t, best) {
            second = Some(best);
            best = t;
        } else if second.is_none_or(|s| better(t, s)) {
            second = Some(t);
        }
    }
    match rank {
        Rank::Best => best,
        Rank::SecondBest => second.unwrap_or(best),
    }
}

pub fn select_topic(group_vector: &[f32], topics: &TopicSet<'_>, topic_doc_row: &[f64], rank: Rank) -> usize {
    pick_ranked(&topics.products(group_vector, topic_doc_row), rank)
}

/// Assigns all groups of one document at a single rank.
fn assign_document(doc: &Document, embeddings: &EmbeddingMatrix, topics: &TopicSet<'_>, row: &[f64], rank: Rank) -> Vec<usize> {
    doc.groups.iter().map(|g| select_topic(embeddings.row(g.global_index), topics, row, rank)).collect()
}

/// Output of one E-step.
#[derive(Debug, Clone, PartialEq)]
pub struct EStep {
    pub assignments: Vec<Vec<usize>>,
    pub ranks: Vec<Rank>,
}

/// One E-step. Each document draws its rank from its own stream
/// `streams.document(epoch, d)`, so the result does not depend on
/// scheduling.
pub fn e_step(
    topic_vectors: &F32Matrix,
    topic_doc: &[Vec<f64>],
    corpus: &Corpus,
    embeddings: &EmbeddingMatrix,
    epoch: usize,
    epochs: usize,
    streams: &SeedStreams,
) -> EStep {
    let topics = TopicSet::new(topic_vectors);
    let (assignments, ranks) = corpus
        .documents()
        .par_iter()
        .enumerate()
        .map(|(d, doc)| {
            let rank = explore_rank(epoch, epochs, &mut streams.document(epoch, d));
            (assign_document(doc, embeddings, &topics, &topic_doc[d], rank), rank)
        })
        .unzip();
    EStep { assignments, ranks }
}

/// One M-step. Topics without any assigned group keep their previous vector.
pub fn m_step(
    assignments: &[Vec<usize>],
    corpus: &Corpus,
    embeddings: &EmbeddingMatrix,
    c: f64,
    previous: &F32Matrix,
) -> (F32Matrix, Vec<Vec<f64>>) {
    let k = previous.n_rows();
    let dim = embeddings.dim();
    let docs = corpus.documents();

    let partials: Vec<(Vec<f64>, Vec<u64>)> = docs
        .par_chunks(REDUCTION_BLOCK)
        .zip(assignments.par_chunks(REDUCTION_BLOCK))
        .map(|(doc_block, assign_block)| {
            let mut sums = vec![0.0f64; k * dim];
            let mut counts = vec![0u64; k];
            for (doc, topics) in doc_block.iter().zip(assign_block) {
                for (group, &t) in doc.groups.iter().zip(topics) {
                    counts[t] += 1;
                    let acc = &mut sums[t * dim..(t + 1) * dim];
                    for (a, &x) in acc.iter_mut().zip(embeddings.row(group.global_index)) {
                        *a += f64::from(x);
                    }
                }
            }
            (sums, counts)
        })
        .collect();

    let mut sums = vec![0.0f64; k * dim];
    let mut counts = vec![0u64; k];
    for (block_sums, block_counts) in &partials {
        for (a, b) in sums.iter_mut().zip(block_sums) {
            *a += b;
        }
        for (a, b) in counts.iter_mut().zip(block_counts) {
            *a += b;
        }
    }

    let mut vectors = Vec::with_capacity(k * dim);
    for t in 0..k {
        if counts[t] == 0 {
            vectors.extend_from_slice(previous.row(t));
        } else {
            let n = counts[t] as f64;
            vectors.extend(sums[t * dim..(t + 1) * dim].iter().map(|s| (s / n) as f32));
        }
    }
    let topic_vectors = F32Matrix::new(vectors, dim).expect("means of finite rows are finite");

    let topic_doc = assignments.par_iter().map(|topics| smoothed_distribution(topics, k, c)).collect();
    (topic_vectors, topic_doc)
}

/// `(|A_{t,d}| + c) / (|d| + k·c)` for every topic.
pub fn smoothed_distribution(doc_assignments: &[usize], k: usize, c: f64) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &t in doc_assignments {
        counts[t] += 1;
    }
    let denom = doc_assignments.len() as f64 + k as f64 * c;
    counts.into_iter().map(|n| (n as f64 + c) / denom).collect()
}

pub fn decay_c(c: f64, alpha: f64) -> f64 {
    (c / 2.0).max(alpha)
}

/// Per-epoch information handed to a fit observer.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// Smoothing constant used by this epoch's M-step.
    pub c: f64,
    pub ranks: Vec<Rank>,
}

pub fn fit(corpus: &Corpus, embeddings: &EmbeddingMatrix, config: &FitConfig) -> Result<ModelState> {
    fit_with_observer(corpus, embeddings, config, |_, _| {})
}

/// Runs the full fit, calling `observer` after every epoch's M-step.
pub fn fit_with_observer<F>(
    corpus: &Corpus,
    embeddings: &EmbeddingMatrix,
    config: &FitConfig,
    mut observer: F,
) -> Result<ModelState>
where
    F: FnMut(&EpochReport, &ModelState),
{
    config.validate()?;
    if embeddings.n_rows() != corpus.n_groups() {
        return Err(Error::Validation(format!(
            "embedding matrix has {} rows but the corpus has {} sentence groups",
            embeddings.n_rows(),
            corpus.n_groups()
        )));
    }
    if config.k > corpus.n_groups() {
        return Err(Error::InvalidConfig(format!("k = {} exceeds the {} sentence groups", config.k, corpus.n_groups())));
    }

    let unit = embeddings.unit_normalize();
    let streams = SeedStreams::new(config.seed);
    let k = config.k;
    let init = kmeanspp_init(&unit, k, &mut streams.init())?;

    let mut state = ModelState {
        topic_vectors: F32Matrix::from_rows(&init, unit.dim())?,
        topic_doc: vec![vec![1.0 / k as f64; k]; corpus.len()],
        assignments: Vec::new(),
        c_current: config.initial_c(),
    };

    let mut c = config.initial_c();
    for epoch in 1..=config.epochs {
        let estep = e_step(&state.topic_vectors, &state.topic_doc, corpus, &unit, epoch, config.epochs, &streams);
        let (topic_vectors, topic_doc) = m_step(&estep.assignments, corpus, &unit, c, &state.topic_vectors);
        state = ModelState { topic_vectors, topic_doc, assignments: estep.assignments, c_current: c };
        let report = EpochReport { epoch, c, ranks: estep.ranks };
        observer(&report, &state);
        c = decay_c(c, config.alpha);
    }
    Ok(state)
}

/// Diagnostics for one group: the products `h(g,t)·p(t|d)`, their argmax,
/// and `max / sum`. The ratio is `None` when the products sum to zero; it
/// can leave `[0, 1]` when some cosines are negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPosterior {
    pub products: Vec<f64>,
    pub argmax: usize,
    pub ratio: Option<f64>,
    pub in_unit_interval: bool,
}

/// `embeddings` is the matrix the model was fitted on, raw or normalized:
/// cosine does not depend on row scale.
pub fn group_posterior(
    state: &ModelState,
    corpus: &Corpus,
    embeddings: &EmbeddingMatrix,
    doc_index: usize,
    group_index: usize,
) -> Result<GroupPosterior> {
    let doc = corpus
        .documents()
        .get(doc_index)
        .ok_or_else(|| Error::OutOfRange(format!("document {doc_index} of {}", corpus.len())))?;
    let group = doc
        .groups
        .get(group_index)
        .ok_or_else(|| Error::OutOfRange(format!("group {group_index} of {} in {:?}", doc.groups.len(), doc.doc_id)))?;
    let row = state
        .topic_doc
        .get(doc_index)
        .ok_or_else(|| Error::OutOfRange(format!("document {doc_index} has no topic distribution")))?;
    if group.global_index >= embeddings.n_rows() {
        return Err(Error::OutOfRange(format!("embedding row {}", group.global_index)));
    }
    let vector = embeddings.row(group.global_index);
    if vector.len() != state.topic_vectors.dim() {
        return Err(Error::DimensionMismatch { left: vector.len(), right: state.topic_vectors.dim() });
    }
    Ok(posterior_from_products(TopicSet::new(&state.topic_vectors).products(vector, row)))
}

pub fn posterior_from_products(products: Vec<f64>) -> GroupPosterior {
    let argmax = pick_ranked(&products, Rank::Best);
    let sum: f64 = products.iter().sum();
    let ratio = (sum != 0.0).then(|| products[argmax] / sum);
    GroupPosterior { in_unit_interval: ratio.is_some_and(|r| (0.0..=1.0).contains(&r)), ratio, argmax, products }
}
