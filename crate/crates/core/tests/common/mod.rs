#![allow(dead_code)]

use coda_augment::rng::Draws;
use coda_augment::{close, Composition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Strictly positive composition with parts spread over four decades.
pub fn random_composition<R: Rng>(rng: &mut R, p: usize) -> Composition<f64> {
    let raw: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.random_range(-3.0..1.0))).collect();
    close(&raw).unwrap()
}

/// Composition with roughly a third of the parts zeroed (at least one kept).
pub fn sparse_composition<R: Rng>(rng: &mut R, p: usize) -> Composition<f64> {
    let mut raw: Vec<f64> = (0..p).map(|_| rng.random_range(0.0..10.0)).collect();
    for v in raw.iter_mut() {
        if rng.random::<f64>() < 0.33 {
            *v = 0.0;
        }
    }
    let keep = rng.random_range(0..p);
    raw[keep] = raw[keep].max(1.0);
    close(&raw).unwrap()
}

pub fn assert_parts_rel(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (j, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol * y.abs(), "{what}: part {j}: {x} vs {y}");
    }
}

/// Draws from a seeded generator except for a pinned mixing weight.
pub struct PinnedLambda {
    pub lambda: f64,
    pub rng: ChaCha8Rng,
}

impl Draws for PinnedLambda {
    fn lambda(&mut self) -> f64 {
        self.lambda
    }
    fn index(&mut self, n: usize) -> usize {
        self.rng.index(n)
    }
    fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.bernoulli(p)
    }
    fn binomial(&mut self, trials: u64, p: f64) -> u64 {
        self.rng.binomial(trials, p)
    }
}
