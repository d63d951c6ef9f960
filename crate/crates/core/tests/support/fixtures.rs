#![allow(dead_code)]

use bos_core::{Corpus, CorpusBuilder, EmbeddingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `docs` documents of 1–4 groups, 1–3 sentences of 1–8 tokens each, drawn
/// from `vocab` words.
pub fn random_corpus(seed: u64, docs: usize, vocab: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let mut b = CorpusBuilder::new();
    for d in 0..docs {
        let groups: Vec<Vec<Vec<&str>>> = (0..rng.random_range(1..=4))
            .map(|_| {
                (0..rng.random_range(1..=3))
                    .map(|_| (0..rng.random_range(1..=8)).map(|_| words[rng.random_range(0..vocab)].as_str()).collect())
                    .collect()
            })
            .collect();
        b.add_tokenized(format!("doc{d}"), None, groups).unwrap();
    }
    b.build()
}

pub fn random_assignments(corpus: &Corpus, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    corpus.documents().iter().map(|d| d.groups.iter().map(|_| rng.random_range(0..k)).collect()).collect()
}

pub fn random_embeddings(n: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    EmbeddingMatrix::new(data, dim).unwrap()
}

/// Two tight clusters around orthogonal axes, `per_cluster` points each.
/// Rows `0..per_cluster` belong to the first cluster.
pub fn two_clusters(per_cluster: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * per_cluster * dim);
    for axis in [0, 1] {
        for _ in 0..per_cluster {
            for j in 0..dim {
                let base = if j == axis { 1.0 } else { 0.0 };
                data.push(base + rng.random_range(-0.05f32..0.05));
            }
        }
    }
    EmbeddingMatrix::new(data, dim).unwrap()
}

/// One group per document; document `i` lies exactly on axis `i % k`.
pub fn orthogonal_single_group(k: usize, docs: usize, dim: usize) -> (Corpus, EmbeddingMatrix, Vec<usize>) {
    let mut b = CorpusBuilder::new();
    let mut data = Vec::with_capacity(docs * dim);
    let mut labels = Vec::with_capacity(docs);
    for i in 0..docs {
        let t = i % k;
        b.add_tokenized(format!("d{i}"), Some(format!("c{t}")), vec![vec![vec![format!("word{t}")]]]).unwrap();
        data.extend((0..dim).map(|j| if j == t { 1.0f32 } else { 0.0 }));
        labels.push(t);
    }
    (b.build(), EmbeddingMatrix::new(data, dim).unwrap(), labels)
}
