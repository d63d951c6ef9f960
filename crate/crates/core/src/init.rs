//! k-means++ seeding of topic vectors under cosine dissimilarity.

use rand::Rng;

use crate::embedding::{dot, l2_norm, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Picks `k` row indices: the first uniformly, each further one with
/// probability proportional to `D(x)²`, where `D(x) = 1 - max cos(x, center)`.
/// Chosen rows get weight zero. If every remaining weight is zero the next
/// row is drawn uniformly from the unchosen rows.
pub fn kmeanspp_indices<R: Rng + ?Sized>(embeddings: &EmbeddingMatrix, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = embeddings.n_rows();
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds the {n} sentence groups")));
    }
    if k > 1 && embeddings.rows().all(|row| row == embeddings.row(0)) {
        return Err(Error::DegenerateInput(format!("all {n} rows are identical but k = {k}")));
    }

    let norms: Vec<f64> = embeddings.rows().map(l2_norm).collect();
    let cos = |i: usize, j: usize| (dot(embeddings.row(i), embeddings.row(j)) / (norms[i] * norms[j])).clamp(-1.0, 1.0);

    let mut chosen = vec![false; n];
    let mut best_cos = vec![f64::NEG_INFINITY; n];
    let mut centers = Vec::with_capacity(k);

    let mut next = rng.random_range(0..n);
    loop {
        chosen[next] = true;
        centers.push(next);
        if centers.len() == k {
            break;
        }
        for (i, best) in best_cos.iter_mut().enumerate() {
            if !chosen[i] {
                *best = best.max(cos(i, next));
            }
        }
        let weights: Vec<f64> = (0..n).map(|i| if chosen[i] { 0.0 } else { (1.0 - best_cos[i]).powi(2) }).collect();
        next = sample_weighted(&weights, rng).unwrap_or_else(|| {
            let open: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            open[rng.random_range(0..open.len())]
        });
    }
    Ok(centers)
}

/// Initial topic vectors: copies of the rows picked by [`kmeanspp_indices`].
pub fn kmeanspp_init<R: Rng + ?Sized>(embeddings: &EmbeddingMatrix, k: usize, rng: &mut R) -> Result<Vec<Vec<f32>>> {
    Ok(kmeanspp_indices(embeddings, k, rng)?.into_iter().map(|i| embeddings.row(i).to_vec()).collect())
}

fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    // Also catches a NaN total.
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStreams;

    fn matrix(rows: &[Vec<f32>]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows, rows[0].len()).unwrap()
    }

    #[test]
    fn single_center_is_a_row() {
        let m = matrix(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let init = kmeanspp_init(&m, 1, &mut SeedStreams::new(3).init()).unwrap();
        assert_eq!(init.len(), 1);
        assert!(m.rows().any(|r| r == init[0].as_slice()));
    }

    #[test]
    fn k_equal_n_is_a_permutation() {
        let rows: Vec<Vec<f32>> = (0..12)
            .map(|i| {
                let a = i as f32 * 0.4;
                vec![a.cos(), a.sin(), 0.1 * i as f32]
            })
            .collect();
        let m = matrix(&rows);
        for seed in 0..50 {
            let mut picked = kmeanspp_indices(&m, 12, &mut SeedStreams::new(seed).init()).unwrap();
            picked.sort_unstable();
            assert_eq!(picked, (0..12).collect::<Vec<_>>(), "seed {seed}");
        }
    }

    #[test]
    fn duplicate_heavy_input_falls_back_to_uniform() {
        let m = matrix(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        for seed in 0..20 {
            let mut picked = kmeanspp_indices(&m, 4, &mut SeedStreams::new(seed).init()).unwrap();
            picked.sort_unstable();
            assert_eq!(picked, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn errors() {
        let m = matrix(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        let mut rng = SeedStreams::new(0).init();
        assert!(matches!(kmeanspp_indices(&m, 3, &mut rng), Err(Error::InvalidConfig(_))));
        assert!(matches!(kmeanspp_indices(&m, 0, &mut rng), Err(Error::InvalidConfig(_))));
        assert!(matches!(kmeanspp_indices(&m, 2, &mut rng), Err(Error::DegenerateInput(_))));
        assert_eq!(kmeanspp_indices(&m, 1, &mut rng).unwrap().len(), 1);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let rows: Vec<Vec<f32>> = (0..30).map(|i| vec![(i as f32).sin(), (i as f32).cos(), 0.5]).collect();
        let m = matrix(&rows);
        let a = kmeanspp_indices(&m, 5, &mut SeedStreams::new(11).init()).unwrap();
        let b = kmeanspp_indices(&m, 5, &mut SeedStreams::new(11).init()).unwrap();
        assert_eq!(a, b);
    }
}
