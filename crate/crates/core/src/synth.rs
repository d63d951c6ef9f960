//! Synthetic corpora with planted topics, for testing recovery.
//!
//! Topic `t` has a random unit direction (the `k` directions are mutually
//! orthonormal) and a planted word `topic{t}`. Each document draws a topic
//! mixture from a symmetric Dirichlet, each group draws its topic from the
//! mixture, and the group vector is `normalize(direction + noise · N(0, I))`.
//! Every sentence holds the planted word plus uniformly drawn filler words.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::corpus::{Corpus, CorpusBuilder};
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::SeedStreams;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub k: usize,
    pub docs: usize,
    pub groups_per_doc: usize,
    pub dim: usize,
    pub noise: f64,
    pub seed: u64,
    pub sentences_per_group: usize,
    pub fillers_per_sentence: usize,
    pub filler_vocabulary: usize,
    /// Symmetric Dirichlet concentration of the per-document mixture.
    pub mixture_concentration: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            k: 5,
            docs: 200,
            groups_per_doc: 20,
            dim: 64,
            noise: 0.05,
            seed: 0,
            sentences_per_group: 2,
            fillers_per_sentence: 4,
            filler_vocabulary: 40,
            mixture_concentration: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub corpus: Corpus,
    pub embeddings: EmbeddingMatrix,
    /// Planted topic of every group, per document.
    pub truth: Vec<Vec<usize>>,
    /// `k × dim` orthonormal topic directions.
    pub directions: Vec<Vec<f64>>,
}

pub fn planted_word(topic: usize) -> String {
    format!("topic{topic}")
}

pub fn generate(config: &SynthConfig) -> Result<SyntheticData> {
    let c = config;
    if c.k == 0 || c.docs == 0 || c.groups_per_doc == 0 || c.dim == 0 || c.sentences_per_group == 0 {
        return Err(Error::InvalidConfig("k, docs, groups-per-doc, dim and sentences must be positive".into()));
    }
    if c.k > c.dim {
        return Err(Error::InvalidConfig(format!("k = {} orthogonal topics need dim ≥ k, got dim = {}", c.k, c.dim)));
    }
    if !(c.noise >= 0.0 && c.noise.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise must be finite and non-negative, got {}", c.noise)));
    }
    if c.fillers_per_sentence > 0 && c.filler_vocabulary == 0 {
        return Err(Error::InvalidConfig("filler words requested from an empty filler vocabulary".into()));
    }
    let gamma =
        Gamma::new(c.mixture_concentration, 1.0).map_err(|e| Error::InvalidConfig(format!("mixture concentration: {e}")))?;

    let mut rng = SeedStreams::new(c.seed).synth();
    let directions = orthonormal_directions(c.k, c.dim, &mut rng);
    let planted: Vec<String> = (0..c.k).map(planted_word).collect();
    let fillers: Vec<String> = (0..c.filler_vocabulary).map(|i| format!("filler{i}")).collect();

    let mut builder = CorpusBuilder::new();
    let mut data = Vec::with_capacity(c.docs * c.groups_per_doc * c.dim);
    let mut truth = Vec::with_capacity(c.docs);
    for d in 0..c.docs {
        let mixture = sample_mixture(&gamma, c.k, &mut rng);
        let mut topics = Vec::with_capacity(c.groups_per_doc);
        let mut groups = Vec::with_capacity(c.groups_per_doc);
        for _ in 0..c.groups_per_doc {
            let t = sample_categorical(&mixture, &mut rng);
            topics.push(t);
            data.extend(group_vector(&directions[t], c.noise, &mut rng));
            let sentences: Vec<Vec<&str>> = (0..c.sentences_per_group)
                .map(|_| {
                    let mut s = vec![planted[t].as_str()];
                    s.extend((0..c.fillers_per_sentence).map(|_| fillers[rng.random_range(0..fillers.len())].as_str()));
                    s
                })
                .collect();
            groups.push(sentences);
        }
        let mut counts = vec![0usize; c.k];
        topics.iter().for_each(|&t| counts[t] += 1);
        let dominant = (0..c.k).fold(0, |best, t| if counts[t] > counts[best] { t } else { best });
        builder.add_tokenized(format!("doc{d}"), Some(planted_word(dominant)), groups)?;
        truth.push(topics);
    }

    Ok(SyntheticData { corpus: builder.build(), embeddings: EmbeddingMatrix::new(data, c.dim)?, truth, directions })
}

fn orthonormal_directions<R: Rng>(k: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

fn sample_mixture<R: Rng>(gamma: &Gamma<f64>, k: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 {
            return draws.into_iter().map(|x| x / total).collect();
        }
    }
}

fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn group_vector<R: Rng>(direction: &[f64], noise: f64, rng: &mut R) -> Vec<f32> {
    if noise == 0.0 {
        return direction.iter().map(|&x| x as f32).collect();
    }
    let v: Vec<f64> = direction.iter().map(|&x| x + noise * rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| (x / norm) as f32).collect()
}
