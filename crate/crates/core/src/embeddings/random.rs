use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{EmbeddingError, EmbeddingMatrix, EmbeddingProvider};
use crate::data::ProbingExample;
use crate::hash::seeded_hash;

/// Type-keyed random embeddings: each distinct token string maps to a fixed
/// vector of i.i.d. `N(0, 1/dim)` values. Position and context are ignored.
#[derive(Clone, Debug)]
pub struct RandomProvider {
    dim: usize,
    seed: u64,
    normal: Normal<f32>,
}

impl RandomProvider {
    pub fn new(dim: usize, seed: u64) -> RandomProvider {
        assert!(dim > 0, "embedding dimension must be positive");
        let std = (1.0 / dim as f64).sqrt() as f32;
        RandomProvider {
            dim,
            seed,
            normal: Normal::new(0.0, std).expect("finite positive std"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vector_for(&self, token: &str) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seeded_hash(self.seed, "random-embedding", &[token]));
        (0..self.dim).map(|_| self.normal.sample(&mut rng)).collect()
    }

    pub(crate) fn fill_row(&self, token: &str, row: &mut [f32]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seeded_hash(self.seed, "random-embedding", &[token]));
        for v in row {
            *v = self.normal.sample(&mut rng);
        }
    }
}

impl EmbeddingProvider for RandomProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, example: &ProbingExample) -> Result<EmbeddingMatrix, EmbeddingError> {
        let mut vectors = Array2::zeros((example.tokens.len(), self.dim));
        for (mut row, token) in vectors.rows_mut().into_iter().zip(&example.tokens) {
            self.fill_row(token, row.as_slice_mut().expect("standard layout"));
        }
        EmbeddingMatrix::new(vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(tokens: &[&str]) -> ProbingExample {
        ProbingExample {
            id: "e".into(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            targets: vec![],
        }
    }

    #[test]
    fn rows_are_keyed_by_token_type() {
        let p = RandomProvider::new(16, 42);
        let m = p.encode(&example(&["dog", "runs", "dog"])).unwrap();
        assert_eq!(m.row(0), m.row(2));
        assert_ne!(m.row(0), m.row(1));
        let again = p.encode(&example(&["dog", "runs", "dog"])).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn seed_changes_vectors() {
        let a = RandomProvider::new(8, 1).vector_for("dog");
        let b = RandomProvider::new(8, 2).vector_for("dog");
        assert_ne!(a, b);
    }

    // Statistical oracle: over 10k distinct tokens the per-coordinate sample
    // mean and variance must match N(0, 1/dim).
    #[test]
    fn coordinate_moments_match_configuration() {
        let dim = 128;
        let p = RandomProvider::new(dim, 9);
        let n = 10_000;
        let mut sum = vec![0f64; dim];
        let mut sq = vec![0f64; dim];
        for i in 0..n {
            for (j, v) in p.vector_for(&format!("tok{i}")).into_iter().enumerate() {
                sum[j] += v as f64;
                sq[j] += (v as f64) * (v as f64);
            }
        }
        let target = 1.0 / dim as f64;
        for j in 0..dim {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            assert!(mean.abs() <= 0.05, "coordinate {j} mean {mean}");
            assert!((var - target).abs() <= 0.2 * target, "coordinate {j} var {var}");
        }
    }
}
