mod common;

use std::collections::BTreeSet;

use coda_augment::augment::{
    sample_augmented_with, sample_subcomposition_mask, synthesize_one, total_weight, ClassGroups,
};
use coda_augment::rng::stream;
use coda_augment::{
    augment_dataset, close, multinomial_resample_core, random_subcomposition_core, sample_augmented,
    zero_replace, AugmentationConfig, ClassId, Composition, LabeledSample, LibrarySize, MaskVector,
    Provenance, Strategy,
};
use common::{sparse_composition, PinnedLambda};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 8;

/// Class 0 lives on parts 0..4 and class 1 on parts 4..8; every sample has
/// its own sparsity pattern within its class block.
fn block_train(n_per_class: usize, seed: u64) -> Vec<LabeledSample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * n_per_class)
        .map(|i| {
            let c = i % 2;
            let block = sparse_composition(&mut rng, P / 2);
            let mut raw = vec![0.0; P];
            raw[c * P / 2..(c + 1) * P / 2].copy_from_slice(block.parts());
            LabeledSample::original(close(&raw).unwrap(), ClassId(c))
        })
        .collect()
}

/// Strictly positive training set whose class blocks dominate: every part in
/// a sample's own block exceeds every part outside it.
fn dominant_train(n_per_class: usize, seed: u64) -> Vec<LabeledSample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * n_per_class)
        .map(|i| {
            let c = i % 2;
            let raw: Vec<f64> = (0..P)
                .map(|j| if j / (P / 2) == c { rng.random_range(1.0..10.0) } else { rng.random_range(1e-4..1e-2) })
                .collect();
            LabeledSample::original(close(&raw).unwrap(), ClassId(c))
        })
        .collect()
}

fn support(x: &Composition<f64>) -> Vec<bool> {
    x.parts().iter().map(|&v| v > 0.0).collect()
}

fn subset_of(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

fn check_closure(out: &[LabeledSample<f64>], strategy: Strategy) {
    for s in out {
        let sum: f64 = s.x.parts().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12, "{strategy}: sum {sum}");
        assert!(s.x.parts().iter().all(|&v| v >= 0.0));
        assert_eq!(s.provenance, Provenance::Synthetic(strategy));
        if strategy == Strategy::AitchisonMixup {
            assert!(s.x.is_strictly_positive());
        }
    }
}

#[test]
fn ten_thousand_samples_per_strategy_stay_closed_and_keep_labels() {
    let block = block_train(6, 1);
    for strategy in [Strategy::RandomSubcompositions, Strategy::CompositionalCutMix, Strategy::MultinomialResampling] {
        let out = sample_augmented(&block, &AugmentationConfig::new(strategy, 5), 10_000).unwrap();
        assert_eq!(out.len(), 10_000);
        check_closure(&out, strategy);
        for s in &out {
            let own = s.y.0 * P / 2..(s.y.0 + 1) * P / 2;
            assert!(s.x.parts().iter().enumerate().all(|(j, &v)| v == 0.0 || own.contains(&j)), "{strategy}: label");
        }
    }
    let dominant = dominant_train(6, 2);
    let out = sample_augmented(&dominant, &AugmentationConfig::new(Strategy::AitchisonMixup, 5), 10_000).unwrap();
    check_closure(&out, Strategy::AitchisonMixup);
    for s in &out {
        let (own, other): (Vec<_>, Vec<_>) = s.x.parts().iter().enumerate().partition(|(j, _)| j / (P / 2) == s.y.0);
        let min_own = own.iter().map(|(_, v)| **v).fold(f64::INFINITY, f64::min);
        let max_other = other.iter().map(|(_, v)| **v).fold(0.0, f64::max);
        assert!(min_own > max_other, "mixup label");
    }
}

#[test]
fn subcompositions_rescale_one_source_on_its_support() {
    let train = block_train(6, 3);
    let out = sample_augmented(&train, &AugmentationConfig::new(Strategy::RandomSubcompositions, 8), 10_000).unwrap();
    for s in &out {
        let found = train.iter().any(|t| {
            if t.y != s.y || !subset_of(&support(&s.x), &support(&t.x)) {
                return false;
            }
            let kept: f64 = t.x.parts().iter().zip(s.x.parts()).filter(|(_, &o)| o > 0.0).map(|(v, _)| v).sum();
            t.x.parts().iter().zip(s.x.parts()).all(|(v, o)| *o == 0.0 || (o - v / kept).abs() <= 1e-12)
        });
        assert!(found, "no source for {:?}", s.x.parts());
    }
}

#[test]
fn cutmix_support_is_covered_by_a_same_class_pair() {
    let train = block_train(6, 4);
    let out = sample_augmented(&train, &AugmentationConfig::new(Strategy::CompositionalCutMix, 9), 10_000).unwrap();
    for s in &out {
        let sup = support(&s.x);
        let class: Vec<&LabeledSample<f64>> = train.iter().filter(|t| t.y == s.y).collect();
        let covered = class.iter().any(|a| {
            class.iter().any(|b| {
                let union: Vec<bool> = support(&a.x).iter().zip(support(&b.x)).map(|(u, v)| *u || v).collect();
                subset_of(&sup, &union)
            })
        });
        assert!(covered);
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let train = dominant_train(5, 6);
    for strategy in Strategy::ALL {
        let cfg = AugmentationConfig::new(strategy, 42);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| augment_dataset(&train, &cfg).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(7));
        assert_ne!(one, augment_dataset(&train, &AugmentationConfig::new(strategy, 43)).unwrap());
    }
}

#[test]
fn count_zero_is_empty() {
    let train = dominant_train(2, 0);
    assert!(sample_augmented(&train, &AugmentationConfig::new(Strategy::AitchisonMixup, 0), 0).unwrap().is_empty());
}

#[test]
fn synthetic_weight_equals_original_weight_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sizes: Vec<usize> = (1..=60).chain((0..40).map(|_| rng.random_range(61..1500))).collect();
    let template = dominant_train(1, 9);
    for n in sizes {
        let train: Vec<LabeledSample<f64>> = (0..n).map(|i| template[i % 2].clone()).collect();
        let cfg = AugmentationConfig::new(Strategy::MultinomialResampling, n as u64).with_factor(10);
        let out = augment_dataset(&train, &cfg).unwrap();
        assert_eq!(out.len(), 11 * n);
        assert_eq!(total_weight(&out[n..]), total_weight(&out[..n]), "n = {n}");
        assert_eq!(total_weight(&out), 2.0 * n as f64);
    }
}

#[test]
fn balanced_doubling() {
    let train = dominant_train(3, 1);
    let cfg = AugmentationConfig::new(Strategy::CompositionalCutMix, 1).with_factor(1).with_synthetic_weight(1.0);
    let out = augment_dataset(&train, &cfg).unwrap();
    assert_eq!(out.len(), 12);
    assert!(out.iter().all(|s| s.weight == 1.0));
}

#[test]
fn pinned_unit_lambda_mixup_copies_training_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let train: Vec<LabeledSample<f64>> = (0..5)
        .map(|_| LabeledSample::original(common::random_composition(&mut rng, 6), ClassId(0)))
        .collect();
    let cfg = AugmentationConfig::new(Strategy::AitchisonMixup, 0);
    let out = sample_augmented_with(&train, &cfg, 500, |k| PinnedLambda { lambda: 1.0, rng: stream(3, "pinned", k as u64) })
        .unwrap();
    for s in &out {
        assert!(train.iter().any(|t| t.x.parts().iter().zip(s.x.parts()).all(|(a, b)| (a - b).abs() <= 1e-12)));
    }
}

#[test]
fn two_part_subcompositions_reach_exactly_the_enumerated_outputs() {
    let x = close(&[0.3f64, 0.7]).unwrap();
    let mut enumerated = BTreeSet::new();
    for bits in 0..4u8 {
        let mask = MaskVector::new(vec![bits & 1 != 0, bits & 2 != 0]);
        if let Ok(out) = random_subcomposition_core(&x, &mask) {
            enumerated.insert(out.parts().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
    assert_eq!(enumerated.len(), 3);
    let mut reached = BTreeSet::new();
    for (k, lambda) in [0.0, 1.0].into_iter().cycle().take(400).enumerate() {
        let mut draws = PinnedLambda { lambda, rng: stream(4, "enumerate", k as u64) };
        let mask = sample_subcomposition_mask(&x, lambda, &mut draws);
        let out = random_subcomposition_core(&x, &mask).unwrap();
        reached.insert(out.parts().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
    assert_eq!(reached, enumerated);
}

#[test]
fn multinomial_resampling_statistics() {
    let x = close(&[0.5f64, 0.3, 0.2]).unwrap();
    let l = LibrarySize::new(10_000).unwrap();
    let mut rng = stream(2024, "multinomial-test", 0);
    let draws = 10_000;
    let mut mean = [0.0; 3];
    for _ in 0..draws {
        let out = multinomial_resample_core(&x, l, &mut rng);
        for (m, v) in mean.iter_mut().zip(out.parts()) {
            *m += v / draws as f64;
        }
    }
    for (j, (&m, &xj)) in mean.iter().zip(x.parts()).enumerate() {
        let se = (xj * (1.0 - xj) / 10_000.0 / draws as f64).sqrt();
        assert!((m - xj).abs() <= 3.0 * se, "part {j}: {m} vs {xj} (se {se})");
    }
    let ten = LibrarySize::new(10).unwrap();
    for _ in 0..1000 {
        let out = multinomial_resample_core(&x, ten, &mut rng);
        let counts: Vec<f64> = out.parts().iter().map(|v| v * 10.0).collect();
        assert!(counts.iter().all(|k| (k - k.round()).abs() <= 1e-12));
        assert_eq!(counts.iter().map(|k| k.round() as u64).sum::<u64>(), 10);
    }
    let vertex = Composition::<f64>::vertex(4, 2).unwrap();
    assert_eq!(multinomial_resample_core(&vertex, l, &mut rng), vertex);
    let one = multinomial_resample_core(&x, LibrarySize::new(1).unwrap(), &mut rng);
    assert_eq!(one.parts().iter().filter(|&&v| v == 1.0).count(), 1);
}

#[test]
fn library_size_follows_the_source() {
    let train: Vec<LabeledSample<f64>> = dominant_train(2, 5)
        .into_iter()
        .map(|s| s.with_library_size(LibrarySize::new(7).unwrap()))
        .collect();
    let cfg = AugmentationConfig::new(Strategy::MultinomialResampling, 1);
    let groups = ClassGroups::new(&train);
    let mut rng = stream(1, "lib", 0);
    for _ in 0..100 {
        let s = synthesize_one(&train, &groups, &cfg, &mut rng).unwrap();
        assert!(s.x.parts().iter().all(|v| ((v * 7.0) - (v * 7.0).round()).abs() <= 1e-12));
    }
}

#[test]
fn mixup_needs_zero_replaced_inputs() {
    let train = block_train(3, 2);
    let cfg = AugmentationConfig::new(Strategy::AitchisonMixup, 1);
    assert!(sample_augmented(&train, &cfg, 10).is_err());
    let fixed: Vec<LabeledSample<f64>> = train
        .iter()
        .map(|s| LabeledSample { x: zero_replace(&s.x, LibrarySize::default()), ..s.clone() })
        .collect();
    assert_eq!(sample_augmented(&fixed, &cfg, 10).unwrap().len(), 10);
}
