//! Reproducible random discrete test cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::discrete::DiscreteDist;

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Law with `1..=max_k` atoms at random increasing points; probabilities
/// are normalized exponentials, floored away from zero.
pub fn random_discrete_dist<R: Rng + ?Sized>(rng: &mut R, max_k: usize) -> DiscreteDist {
    let k = rng.random_range(1..=max_k.max(1));
    let mut support = Vec::with_capacity(k);
    let mut x = rng.random::<f64>() * 10.0 - 5.0;
    for _ in 0..k {
        support.push(x);
        x += 0.1 + exp1(rng);
    }
    let raw: Vec<f64> = (0..k).map(|_| 1e-3 + exp1(rng)).collect();
    let total: f64 = raw.iter().sum();
    let probs = raw.iter().map(|p| p / total).collect();
    DiscreteDist::new(support, probs).expect("generated law is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomCase {
    pub n: u64,
    pub dist: DiscreteDist,
    pub r: u64,
    pub m: u64,
}

/// `count` cases with `2 ≤ n ≤ max_n`, `K ≤ max_k` and a random pair `r < m`.
pub fn random_cases(seed: u64, count: usize, max_n: u64, max_k: usize) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_n.max(2));
            let dist = random_discrete_dist(&mut rng, max_k);
            let r = rng.random_range(1..n);
            let m = rng.random_range(r + 1..=n);
            RandomCase { n, dist, r, m }
        })
        .collect()
}
