//! Seeded random streams.
//!
//! Every random quantity in the toolkit comes from a ChaCha stream keyed by
//! `(seed, domain, index)`, e.g. one stream per synthetic sample or per epoch.
//! Results therefore do not depend on thread count or iteration order.

use rand::distr::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Independent generator for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(domain.as_bytes()).rotate_left(17) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// The random draws the augmentation procedures consume.
///
/// Any [`rand::Rng`] implements it; tests substitute scripted sources to pin
/// particular draws (for example a mixing weight of exactly 1).
pub trait Draws {
    /// A mixing weight drawn from U(0, 1). Never exactly 0.
    fn lambda(&mut self) -> f64;
    /// Uniform index in `0..n`; `n > 0`.
    fn index(&mut self, n: usize) -> usize;
    fn bernoulli(&mut self, p: f64) -> bool;
    fn binomial(&mut self, trials: u64, p: f64) -> u64;
}

impl<R: Rng + ?Sized> Draws for R {
    fn lambda(&mut self) -> f64 {
        self.sample(OpenClosed01)
    }

    fn index(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        // p >= 1 must never fail; random::<f64>() lies in [0, 1).
        self.random::<f64>() < p
    }

    fn binomial(&mut self, trials: u64, p: f64) -> u64 {
        if p <= 0.0 || trials == 0 {
            return 0;
        }
        if p >= 1.0 {
            return trials;
        }
        Binomial::new(trials, p).expect("p in (0, 1)").sample(self)
    }
}

/// Multinomial counts over `probs` (which need not be exactly normalized)
/// via sequential conditional binomials. Parts with zero probability always
/// get zero counts.
pub fn multinomial<D: Draws + ?Sized>(draws: &mut D, trials: u64, probs: &[f64]) -> Vec<u64> {
    let p = probs.len();
    let mut tail = vec![0.0; p + 1];
    for j in (0..p).rev() {
        tail[j] = tail[j + 1] + probs[j];
    }
    let mut counts = vec![0u64; p];
    let mut remaining = trials;
    for j in 0..p {
        if remaining == 0 {
            break;
        }
        if probs[j] <= 0.0 {
            continue;
        }
        let q = if j + 1 == p { 1.0 } else { (probs[j] / tail[j]).min(1.0) };
        let k = draws.binomial(remaining, q);
        counts[j] = k;
        remaining -= k;
    }
    counts
}
