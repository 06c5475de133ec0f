//! Augmentation strategies for compositional data.
//!
//! Each strategy has a deterministic core that takes every random quantity as
//! an argument, and a sampling step ([`synthesize_one`]) that draws those
//! quantities from a [`Draws`] source. [`sample_augmented`] and
//! [`augment_dataset`] generate whole synthetic sets in parallel, using one
//! random stream per synthetic index so the output never depends on thread
//! scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composition::{close, perturb, power, Composition};
use crate::error::{Error, Result};
use crate::preprocess::LibrarySize;
use crate::rng::{multinomial, stream, Draws};
use crate::scalar::{compensated_sum, Scalar};

/// Rejection attempts for a valid mask before switching to exact
/// conditional sampling.
const MASK_ATTEMPTS: usize = 64;

/// The augmentation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Intra-class convex combinations under perturbation and powering.
    #[serde(rename = "mixup")]
    AitchisonMixup,
    /// Zero out Bernoulli-masked parts of one example and re-close.
    #[serde(rename = "subcomposition")]
    RandomSubcompositions,
    /// Per-part selection between two same-class examples, then closure.
    #[serde(rename = "cutmix")]
    CompositionalCutMix,
    /// Redraw an example as multinomial counts at its sequencing depth.
    #[serde(rename = "multinomial")]
    MultinomialResampling,
}

impl Strategy {
    /// Mixup, Subcompositions and CutMix: the strategies that need no
    /// sequencing depth.
    pub const GEOMETRIC: [Strategy; 3] = [
        Strategy::AitchisonMixup,
        Strategy::RandomSubcompositions,
        Strategy::CompositionalCutMix,
    ];

    pub const ALL: [Strategy; 4] = [
        Strategy::AitchisonMixup,
        Strategy::RandomSubcompositions,
        Strategy::CompositionalCutMix,
        Strategy::MultinomialResampling,
    ];

    /// Short tag used in provenance columns, CLI flags and stream keys.
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::AitchisonMixup => "mixup",
            Strategy::RandomSubcompositions => "subcomposition",
            Strategy::CompositionalCutMix => "cutmix",
            Strategy::MultinomialResampling => "multinomial",
        }
    }

    /// Whether the strategy takes logs of its inputs.
    pub fn needs_strictly_positive(self) -> bool {
        matches!(self, Strategy::AitchisonMixup)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "mixup" | "aitchisonmixup" => Ok(Strategy::AitchisonMixup),
            "subcomposition" | "subcompositions" | "randomsubcompositions" => {
                Ok(Strategy::RandomSubcompositions)
            }
            "cutmix" | "compositionalcutmix" => Ok(Strategy::CompositionalCutMix),
            "multinomial" | "multinomialresampling" => Ok(Strategy::MultinomialResampling),
            _ => Err(Error::InvalidConfig(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Per-part Bernoulli indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskVector(Vec<bool>);

impl MaskVector {
    pub fn new(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    pub fn filled(p: usize, value: bool) -> Self {
        Self(vec![value; p])
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Dense class identifier, an index into a dataset's class catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub usize);

/// Where a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Original,
    Synthetic(Strategy),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => f.write_str("original"),
            Provenance::Synthetic(s) => write!(f, "synthetic:{}", s.tag()),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "original" => Ok(Provenance::Original),
            Some(("synthetic", tag)) => Ok(Provenance::Synthetic(tag.parse()?)),
            _ => Err(Error::InvalidConfig(format!("unknown provenance {s:?}"))),
        }
    }
}

/// A composition with its label, sample weight and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<T> {
    pub x: Composition<T>,
    pub y: ClassId,
    pub weight: T,
    pub provenance: Provenance,
    /// Sequencing depth, when known. Multinomial resampling falls back to the
    /// configured default otherwise.
    pub library_size: Option<LibrarySize>,
}

impl<T: Scalar> LabeledSample<T> {
    /// An original sample with weight 1.
    pub fn original(x: Composition<T>, y: ClassId) -> Self {
        Self { x, y, weight: T::one(), provenance: Provenance::Original, library_size: None }
    }

    pub fn with_library_size(mut self, library_size: LibrarySize) -> Self {
        self.library_size = Some(library_size);
        self
    }
}

/// How to generate a synthetic set. The mixing weight law is fixed to U(0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationConfig<T> {
    pub strategy: Strategy,
    /// Synthetic samples per original sample.
    pub factor: usize,
    pub synthetic_weight: T,
    pub seed: u64,
    pub default_library_size: LibrarySize,
}

impl<T: Scalar> AugmentationConfig<T> {
    /// Ten synthetic samples per original, each weighted 1/10.
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            factor: 10,
            synthetic_weight: T::lit(0.1),
            seed,
            default_library_size: LibrarySize::default(),
        }
    }

    /// Sets the factor and the matching weight `1/factor`, so synthetic and
    /// original data carry equal total weight.
    pub fn with_factor(mut self, factor: usize) -> Self {
        self.factor = factor;
        self.synthetic_weight = T::one() / T::lit(factor.max(1) as f64);
        self
    }

    pub fn with_synthetic_weight(mut self, weight: T) -> Self {
        self.synthetic_weight = weight;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.factor == 0 {
            return Err(Error::InvalidConfig("augmentation factor must be at least 1".into()));
        }
        if !(self.synthetic_weight > T::zero()) || !self.synthetic_weight.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "synthetic weight must be positive, got {}",
                self.synthetic_weight
            )));
        }
        Ok(())
    }
}

fn same_dim<T>(a: &Composition<T>, b: &Composition<T>) -> Result<()>
where
    T: Scalar,
{
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

fn check_mask<T: Scalar>(x: &Composition<T>, mask: &MaskVector) -> Result<()> {
    if mask.len() != x.dim() {
        return Err(Error::DimensionMismatch { left: x.dim(), right: mask.len() });
    }
    Ok(())
}

fn close_selection<T: Scalar>(selected: &[T]) -> Result<Composition<T>> {
    close(selected).map_err(|e| match e {
        Error::AllZero => Error::EmptySubcomposition,
        other => other,
    })
}

/// `(λ ⊙ x1) ⊕ ((1 - λ) ⊙ x2)`: the point a fraction `1 - λ` of the way along
/// the Aitchison geodesic from `x1` to `x2`.
pub fn aitchison_mixup_core<T: Scalar>(
    x1: &Composition<T>,
    x2: &Composition<T>,
    lambda: T,
) -> Result<Composition<T>> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::LambdaOutOfRange(lambda.to_f64_lossy()));
    }
    same_dim(x1, x2)?;
    perturb(&power(lambda, x1)?, &power(T::one() - lambda, x2)?)
}

/// Zeroes the parts whose flag is false and re-closes the rest. The output
/// keeps all `p` parts.
pub fn random_subcomposition_core<T: Scalar>(
    x: &Composition<T>,
    mask: &MaskVector,
) -> Result<Composition<T>> {
    check_mask(x, mask)?;
    let kept: Vec<T> = x
        .parts()
        .iter()
        .zip(mask.flags())
        .map(|(&v, &keep)| if keep { v } else { T::zero() })
        .collect();
    close_selection(&kept)
}

/// Takes part `j` from `x2` where the flag is set and from `x1` elsewhere,
/// then closes.
pub fn compositional_cutmix_core<T: Scalar>(
    x1: &Composition<T>,
    x2: &Composition<T>,
    mask: &MaskVector,
) -> Result<Composition<T>> {
    same_dim(x1, x2)?;
    check_mask(x1, mask)?;
    let picked: Vec<T> = x1
        .parts()
        .iter()
        .zip(x2.parts())
        .zip(mask.flags())
        .map(|((&a, &b), &from_second)| if from_second { b } else { a })
        .collect();
    close_selection(&picked)
}

/// Draws counts `k ~ Multinomial(L, x)` and returns `k / L`.
pub fn multinomial_resample_core<T: Scalar, D: Draws + ?Sized>(
    x: &Composition<T>,
    library_size: LibrarySize,
    draws: &mut D,
) -> Composition<T> {
    let probs: Vec<f64> = x.parts().iter().map(|v| v.to_f64_lossy()).collect();
    let counts = multinomial(draws, library_size.get(), &probs);
    let raw: Vec<T> = counts.iter().map(|&k| T::lit(k as f64)).collect();
    close(&raw).expect("multinomial counts sum to L >= 1")
}

/// Bernoulli(λ) mask conditioned on keeping at least one nonzero part of `x`.
///
/// Masks are redrawn with the same λ; after [`MASK_ATTEMPTS`] failures the
/// conditional law is sampled directly, which gives the same distribution.
pub fn sample_subcomposition_mask<T: Scalar, D: Draws + ?Sized>(
    x: &Composition<T>,
    lambda: f64,
    draws: &mut D,
) -> MaskVector {
    let p = x.dim();
    let support: Vec<usize> = (0..p).filter(|&j| x.parts()[j] > T::zero()).collect();
    if lambda > 0.0 {
        for _ in 0..MASK_ATTEMPTS {
            let flags: Vec<bool> = (0..p).map(|_| draws.bernoulli(lambda)).collect();
            if support.iter().any(|&j| flags[j]) {
                return MaskVector(flags);
            }
        }
    }
    conditional_mask(p, &support, lambda, draws)
}

fn conditional_mask<D: Draws + ?Sized>(
    p: usize,
    support: &[usize],
    lambda: f64,
    draws: &mut D,
) -> MaskVector {
    let mut flags = vec![false; p];
    if lambda <= 0.0 {
        // Limit of the conditional law as λ -> 0: one survivor, uniform.
        flags[support[draws.index(support.len())]] = true;
        return MaskVector(flags);
    }
    let log_miss = (-lambda).ln_1p();
    let mut first = support.len() - 1;
    for (k, _) in support.iter().enumerate() {
        let remaining = (support.len() - k) as f64;
        // P(first kept is here | none kept before, at least one kept overall)
        let hit = lambda / -(remaining * log_miss).exp_m1();
        if draws.bernoulli(hit) {
            first = k;
            break;
        }
    }
    let in_support: Vec<bool> = (0..p).map(|j| support.binary_search(&j).is_ok()).collect();
    let first_index = support[first];
    for j in 0..p {
        flags[j] = if j == first_index {
            true
        } else if in_support[j] && j < first_index {
            false
        } else {
            draws.bernoulli(lambda)
        };
    }
    MaskVector(flags)
}

fn sample_cutmix<T: Scalar, D: Draws + ?Sized>(
    x1: &Composition<T>,
    x2: &Composition<T>,
    lambda: f64,
    draws: &mut D,
) -> Result<Composition<T>> {
    let p = x1.dim();
    let mut last = Err(Error::EmptySubcomposition);
    for _ in 0..MASK_ATTEMPTS {
        let mask = MaskVector((0..p).map(|_| draws.bernoulli(lambda)).collect());
        last = compositional_cutmix_core(x1, x2, &mask);
        if !matches!(last, Err(Error::EmptySubcomposition)) {
            break;
        }
    }
    last
}

/// Training-set indices grouped by class.
#[derive(Debug, Clone)]
pub struct ClassGroups {
    labels: Vec<ClassId>,
    members: BTreeMap<ClassId, Vec<usize>>,
}

impl ClassGroups {
    pub fn new<T>(train: &[LabeledSample<T>]) -> Self {
        let mut members: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        for (i, s) in train.iter().enumerate() {
            members.entry(s.y).or_default().push(i);
        }
        Self { labels: train.iter().map(|s| s.y).collect(), members }
    }

    pub fn members(&self, class: ClassId) -> &[usize] {
        self.members.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Class drawn from the empirical class prior. Taking the label of a
    /// uniformly drawn example gives exactly that law.
    fn draw_class<D: Draws + ?Sized>(&self, draws: &mut D) -> ClassId {
        self.labels[draws.index(self.labels.len())]
    }

    fn draw_pair<D: Draws + ?Sized>(&self, class: ClassId, draws: &mut D) -> (usize, usize) {
        let m = self.members(class);
        (m[draws.index(m.len())], m[draws.index(m.len())])
    }
}

/// Generates one synthetic sample following the steps of `cfg.strategy`.
pub fn synthesize_one<T: Scalar, D: Draws + ?Sized>(
    train: &[LabeledSample<T>],
    groups: &ClassGroups,
    cfg: &AugmentationConfig<T>,
    draws: &mut D,
) -> Result<LabeledSample<T>> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let (x, y, library_size) = match cfg.strategy {
        Strategy::AitchisonMixup => {
            let c = groups.draw_class(draws);
            let lambda = draws.lambda();
            let (i1, i2) = groups.draw_pair(c, draws);
            let x = aitchison_mixup_core(&train[i1].x, &train[i2].x, T::lit(lambda))?;
            (x, c, None)
        }
        Strategy::RandomSubcompositions => {
            let lambda = draws.lambda();
            let i = draws.index(train.len());
            let mask = sample_subcomposition_mask(&train[i].x, lambda, draws);
            let x = random_subcomposition_core(&train[i].x, &mask)?;
            (x, train[i].y, train[i].library_size)
        }
        Strategy::CompositionalCutMix => {
            let c = groups.draw_class(draws);
            let lambda = draws.lambda();
            let (i1, i2) = groups.draw_pair(c, draws);
            let x = sample_cutmix(&train[i1].x, &train[i2].x, lambda, draws)?;
            (x, c, None)
        }
        Strategy::MultinomialResampling => {
            let i = draws.index(train.len());
            let depth = train[i].library_size.unwrap_or(cfg.default_library_size);
            let x = multinomial_resample_core(&train[i].x, depth, draws);
            (x, train[i].y, train[i].library_size)
        }
    };
    Ok(LabeledSample {
        x,
        y,
        weight: cfg.synthetic_weight,
        provenance: Provenance::Synthetic(cfg.strategy),
        library_size,
    })
}

/// `count` synthetic samples, synthetic index `k` drawing from
/// `make_draws(k)`.
pub fn sample_augmented_with<T, D, F>(
    train: &[LabeledSample<T>],
    cfg: &AugmentationConfig<T>,
    count: usize,
    make_draws: F,
) -> Result<Vec<LabeledSample<T>>>
where
    T: Scalar,
    D: Draws,
    F: Fn(usize) -> D + Sync,
{
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let groups = ClassGroups::new(train);
    (0..count)
        .into_par_iter()
        .map(|k| synthesize_one(train, &groups, cfg, &mut make_draws(k)))
        .collect()
}

/// `count` synthetic samples from the seeded per-index streams of `cfg`.
pub fn sample_augmented<T: Scalar>(
    train: &[LabeledSample<T>],
    cfg: &AugmentationConfig<T>,
    count: usize,
) -> Result<Vec<LabeledSample<T>>> {
    sample_augmented_with(train, cfg, count, |k| stream(cfg.seed, cfg.strategy.tag(), k as u64))
}

/// The originals followed by `factor * n` weighted synthetic samples.
pub fn augment_dataset<T: Scalar>(
    train: &[LabeledSample<T>],
    cfg: &AugmentationConfig<T>,
) -> Result<Vec<LabeledSample<T>>> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let synthetic = sample_augmented(train, cfg, cfg.factor * train.len())?;
    let mut out = Vec::with_capacity(train.len() + synthetic.len());
    out.extend_from_slice(train);
    out.extend(synthetic);
    Ok(out)
}

/// Compensated sum of sample weights.
pub fn total_weight<'a, T: Scalar>(samples: impl IntoIterator<Item = &'a LabeledSample<T>>) -> T {
    compensated_sum(samples.into_iter().map(|s| s.weight))
}
