//! Positive-pair samplers for contrastive pretraining.
//!
//! Views `2i` and `2i + 1` always form a positive pair; every other pair of
//! views in the batch is a negative.

use crate::augment::{
    aitchison_mixup_core, compositional_cutmix_core, random_subcomposition_core,
    sample_subcomposition_mask, MaskVector, Strategy,
};
use crate::composition::Composition;
use crate::error::{Error, Result};
use crate::rng::Draws;
use crate::scalar::Scalar;

const CUTMIX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ViewBatch<T> {
    pub views: Vec<Composition<T>>,
    pub partner: Vec<usize>,
    /// Training example index (subcompositions) or partition pair index
    /// (paired strategies) of each view.
    pub origin: Vec<usize>,
}

impl<T> ViewBatch<T> {
    fn with_capacity(n: usize) -> Self {
        Self { views: Vec::with_capacity(n), partner: Vec::with_capacity(n), origin: Vec::with_capacity(n) }
    }

    fn push_pair(&mut self, a: Composition<T>, b: Composition<T>, origin: usize) {
        let i = self.views.len();
        self.views.push(a);
        self.views.push(b);
        self.partner.extend([i + 1, i]);
        self.origin.extend([origin, origin]);
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }
}

fn subcomposition_view<T: Scalar, D: Draws + ?Sized>(x: &Composition<T>, draws: &mut D) -> Result<Composition<T>> {
    let lambda = draws.lambda();
    let mask = sample_subcomposition_mask(x, lambda, draws);
    random_subcomposition_core(x, &mask)
}

/// Two independent Random Subcompositions of every training example.
pub fn sample_views_subcomposition<T: Scalar, D: Draws + ?Sized>(
    train: &[Composition<T>],
    draws: &mut D,
) -> Result<ViewBatch<T>> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut batch = ViewBatch::with_capacity(2 * train.len());
    for (i, x) in train.iter().enumerate() {
        let a = subcomposition_view(x, draws)?;
        let b = subcomposition_view(x, draws)?;
        batch.push_pair(a, b, i);
    }
    Ok(batch)
}

fn paired_view<T: Scalar, D: Draws + ?Sized>(
    x1: &Composition<T>,
    x2: &Composition<T>,
    strategy: Strategy,
    draws: &mut D,
) -> Result<Composition<T>> {
    let lambda = draws.lambda();
    match strategy {
        Strategy::AitchisonMixup => aitchison_mixup_core(x1, x2, T::lit(lambda)),
        Strategy::CompositionalCutMix => {
            let mut last = Err(Error::EmptySubcomposition);
            for _ in 0..CUTMIX_ATTEMPTS {
                let mask = MaskVector::new((0..x1.dim()).map(|_| draws.bernoulli(lambda)).collect());
                last = compositional_cutmix_core(x1, x2, &mask);
                if !matches!(last, Err(Error::EmptySubcomposition)) {
                    break;
                }
            }
            last
        }
        other => Err(Error::InvalidConfig(format!("{other} does not combine pairs"))),
    }
}

/// Random partition into pairs (an odd leftover is paired with itself), then
/// two independent combinations of each pair. Classes are ignored.
pub fn sample_views_paired<T: Scalar, D: Draws + ?Sized>(
    train: &[Composition<T>],
    strategy: Strategy,
    draws: &mut D,
) -> Result<ViewBatch<T>> {
    if !matches!(strategy, Strategy::AitchisonMixup | Strategy::CompositionalCutMix) {
        return Err(Error::InvalidConfig(format!("{strategy} does not combine pairs")));
    }
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let n = train.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, draws.index(i + 1));
    }
    let pairs: Vec<(usize, usize)> = order
        .chunks(2)
        .map(|c| (c[0], *c.get(1).unwrap_or(&c[0])))
        .collect();
    let mut batch = ViewBatch::with_capacity(2 * pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let a = paired_view(&train[i], &train[j], strategy, draws)?;
        let b = paired_view(&train[i], &train[j], strategy, draws)?;
        batch.push_pair(a, b, k);
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    /// Draws with a pinned mixing weight; everything else from a real stream.
    struct PinnedLambda(f64, rand_chacha::ChaCha8Rng);

    impl Draws for PinnedLambda {
        fn lambda(&mut self) -> f64 {
            self.0
        }
        fn index(&mut self, n: usize) -> usize {
            self.1.index(n)
        }
        fn bernoulli(&mut self, p: f64) -> bool {
            self.1.bernoulli(p)
        }
        fn binomial(&mut self, trials: u64, p: f64) -> u64 {
            self.1.binomial(trials, p)
        }
    }

    fn data(n: usize) -> Vec<Composition<f64>> {
        (0..n)
            .map(|i| crate::composition::close(&[1.0 + i as f64, 2.0, 0.5 + i as f64 * 0.1]).unwrap())
            .collect()
    }

    #[test]
    fn subcomposition_pairing() {
        let b = sample_views_subcomposition(&data(3), &mut stream(0, "v", 0)).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.partner, vec![1, 0, 3, 2, 5, 4]);
        assert_eq!(b.origin, vec![0, 0, 1, 1, 2, 2]);
        for v in &b.views {
            assert!((v.parts().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_masks_copy_the_source() {
        let xs = data(4);
        let b = sample_views_subcomposition(&xs, &mut PinnedLambda(1.0, stream(1, "v", 0))).unwrap();
        for (k, v) in b.views.iter().enumerate() {
            assert_eq!(v, &xs[k / 2]);
        }
    }

    #[test]
    fn paired_partition() {
        let b = sample_views_paired(&data(4), Strategy::CompositionalCutMix, &mut stream(2, "v", 0)).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.origin, vec![0, 0, 1, 1]);
        assert_eq!(b.partner, vec![1, 0, 3, 2]);
    }

    #[test]
    fn mixup_at_unit_weight_copies_first_of_pair() {
        let xs = data(6);
        let b = sample_views_paired(&xs, Strategy::AitchisonMixup, &mut PinnedLambda(1.0, stream(3, "v", 0))).unwrap();
        for pair in b.views.chunks(2) {
            assert_eq!(pair[0], pair[1]);
            assert!(xs.iter().any(|x| x.parts().iter().zip(pair[0].parts()).all(|(a, b)| (a - b).abs() < 1e-12)));
        }
    }

    #[test]
    fn odd_leftover_is_self_paired() {
        let xs = data(5);
        let b = sample_views_paired(&xs, Strategy::AitchisonMixup, &mut stream(4, "v", 0)).unwrap();
        assert_eq!(b.len(), 6);
        // The self pair's views are combinations of (x, x) = x.
        let last = &b.views[4..6];
        let hit = xs.iter().any(|x| {
            last.iter().all(|v| v.parts().iter().zip(x.parts()).all(|(a, b)| (a - b).abs() < 1e-12))
        });
        assert!(hit);
    }

    #[test]
    fn rejects_empty_and_unpaired_strategies() {
        let empty: Vec<Composition<f64>> = vec![];
        assert!(matches!(
            sample_views_subcomposition(&empty, &mut stream(0, "v", 0)),
            Err(Error::EmptyTrainingSet)
        ));
        assert!(sample_views_paired(&data(2), Strategy::RandomSubcompositions, &mut stream(0, "v", 0)).is_err());
    }
}
