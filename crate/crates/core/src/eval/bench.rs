//! Synthetic augmentation benchmark.
//!
//! Two-class logistic-normal data: class means `±(δ/2)·u` in clr space for a
//! fixed random unit direction `u`, unit-variance isotropic noise, mapped to
//! the simplex with `clr_inv`. Each replicate draws a fresh training and test
//! set, fits the weighted logistic regression with and without each
//! augmentation, and records test AUC and ECE. Replicate `r` depends only on
//! `(seed, r)`.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logreg::{fit, Design, LogRegConfig, LogisticModel};
use super::metrics::{ece, roc_auc};
use crate::augment::{augment_dataset, AugmentationConfig, ClassId, LabeledSample, Strategy};
use crate::composition::clr_inv;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::{zero_replace, LibrarySize};
use crate::rng::stream;

/// Separation giving a mean baseline test AUC of 0.75 with the default
/// configuration, pinned from [`calibrate_separation`].
pub const DEFAULT_SEPARATION: f64 = 1.82;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub p: usize,
    /// Distance `δ` between the class means in clr space.
    pub separation: f64,
    pub strategies: Vec<Strategy>,
    pub factor: usize,
    /// Defaults to `1 / factor`.
    pub synthetic_weight: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub library_size: LibrarySize,
    pub logreg: LogRegConfig,
    /// Extra training-set sizes for AUC-gain-versus-n rows.
    pub scatter_sizes: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_train: 60,
            n_test: 1000,
            p: 100,
            separation: DEFAULT_SEPARATION,
            strategies: Strategy::GEOMETRIC.to_vec(),
            factor: 10,
            synthetic_weight: None,
            replicates: 20,
            seed: 0,
            library_size: LibrarySize::default(),
            logreg: LogRegConfig::default(),
            scatter_sizes: Vec::new(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.separation >= 0.0) || !self.separation.is_finite() {
            return bad("separation must be a finite nonnegative number");
        }
        if self.p < 2 {
            return bad("p must be at least 2");
        }
        if self.n_train < 4 || self.n_test < 2 {
            return bad("n_train must be at least 4 and n_test at least 2");
        }
        if self.scatter_sizes.iter().any(|&n| n < 4) {
            return bad("scatter sizes must be at least 4");
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1");
        }
        if self.factor == 0 {
            return bad("factor must be at least 1");
        }
        if matches!(self.synthetic_weight, Some(w) if !(w > 0.0)) {
            return bad("synthetic weight must be positive");
        }
        if self.logreg.step <= 0.0 || self.logreg.l2 < 0.0 {
            return bad("logistic regression step must be positive and l2 nonnegative");
        }
        Ok(())
    }

    fn augmentation(&self, strategy: Strategy, seed: u64) -> AugmentationConfig<f64> {
        let cfg = AugmentationConfig::new(strategy, seed).with_factor(self.factor);
        let cfg = match self.synthetic_weight {
            Some(w) => cfg.with_synthetic_weight(w),
            None => cfg,
        };
        AugmentationConfig { default_library_size: self.library_size, ..cfg }
    }
}

/// Logistic-normal two-class generator.
#[derive(Debug, Clone)]
pub struct Generator {
    direction: Vec<f64>,
    separation: f64,
}

impl Generator {
    /// Draws the unit direction `u` (centred, so it lies in clr space).
    pub fn new(p: usize, separation: f64, seed: u64) -> Self {
        let mut rng = stream(seed, "bench-direction", 0);
        let mut u: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let mean = u.iter().sum::<f64>() / p as f64;
        u.iter_mut().for_each(|v| *v -= mean);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
        Self { direction: u, separation }
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// `n` samples with alternating labels 0, 1, 0, ...
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<LabeledSample<f64>> {
        (0..n)
            .map(|i| {
                let y = i % 2;
                let sign = if y == 1 { 0.5 } else { -0.5 };
                let z: Vec<f64> = self
                    .direction
                    .iter()
                    .map(|&u| sign * self.separation * u + rng.sample::<f64, _>(StandardNormal))
                    .collect();
                LabeledSample::original(clr_inv(&z).expect("finite draws"), ClassId(y))
            })
            .collect()
    }

    /// [`Generator::sample`] wrapped as a dataset with features `f0..f{p-1}`
    /// and classes `"0"`, `"1"`.
    pub fn dataset<R: Rng>(&self, n: usize, rng: &mut R) -> Dataset<f64> {
        let features = (0..self.direction.len()).map(|j| format!("f{j}")).collect();
        Dataset::new(self.sample(n, rng), features, vec!["0".into(), "1".into()])
            .expect("generated samples match the feature set")
    }
}

/// Which fit a row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Baseline,
    Augmented,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Augmented => "augmented",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub arm: Arm,
    pub n_train: usize,
    pub replicates: usize,
    pub mean_auc: f64,
    /// `None` with a single replicate.
    pub se_auc: Option<f64>,
    pub mean_ece: f64,
    /// Paired augmented-minus-baseline AUC (augmented rows only).
    pub mean_gain: Option<f64>,
    pub se_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl BenchReport {
    pub const HEADER: &'static str =
        "task\tstrategy\tarm\tn_train\treplicates\tmean_auc\tse_auc\tmean_ece\tmean_auc_gain\tse_auc_gain";

    /// Tab-separated table, one row per strategy, arm and training size.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "synthetic\t{}\t{}\t{}\t{}\t{:.6}\t{}\t{:.6}\t{}\t{}",
                r.strategy,
                r.arm.as_str(),
                r.n_train,
                r.replicates,
                r.mean_auc,
                fmt_opt(r.se_auc),
                r.mean_ece,
                fmt_opt(r.mean_gain),
                fmt_opt(r.se_gain),
            );
        }
        out
    }

    pub fn row(&self, strategy: Strategy, arm: Arm, n_train: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.arm == arm && r.n_train == n_train)
    }
}

/// Test AUC and ECE of one fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub auc: f64,
    pub ece: f64,
}

fn positive(samples: &[LabeledSample<f64>], depth: LibrarySize) -> Vec<LabeledSample<f64>> {
    samples
        .iter()
        .map(|s| LabeledSample { x: zero_replace(&s.x, s.library_size.unwrap_or(depth)), ..s.clone() })
        .collect()
}

fn score(model: &LogisticModel, test: &Design) -> Result<Score> {
    let probs: Vec<f64> = (0..test.len())
        .map(|i| {
            let row = &test.features[i * test.dim..(i + 1) * test.dim];
            crate::contrastive::train::sigmoid(model.logit(row))
        })
        .collect();
    Ok(Score { auc: roc_auc(&probs, &test.targets)?, ece: ece(&probs, &test.targets)?.ece })
}

/// Baseline score and one score per strategy for replicate `r`.
pub fn run_replicate(
    cfg: &BenchConfig,
    generator: &Generator,
    n_train: usize,
    r: usize,
) -> Result<(Score, Vec<Score>)> {
    let mut rng = stream(cfg.seed, &format!("bench-data-{n_train}"), r as u64);
    let train = generator.sample(n_train, &mut rng);
    let test = generator.sample(cfg.n_test, &mut rng);
    let test_design = Design::from_samples(&positive(&test, cfg.library_size))?;
    let baseline = fit(&Design::from_samples(&positive(&train, cfg.library_size))?, &cfg.logreg)?;
    let base_score = score(&baseline, &test_design)?;
    let mut arms = Vec::with_capacity(cfg.strategies.len());
    for &strategy in &cfg.strategies {
        let aug_seed: u64 = stream(cfg.seed, &format!("bench-augment-{n_train}-{strategy}"), r as u64).random();
        let augmented = augment_dataset(&train, &cfg.augmentation(strategy, aug_seed))?;
        let model = fit(&Design::from_samples(&positive(&augmented, cfg.library_size))?, &cfg.logreg)?;
        arms.push(score(&model, &test_design)?);
    }
    Ok((base_score, arms))
}

fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Runs every replicate for every training size and summarises.
pub fn synth_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let generator = Generator::new(cfg.p, cfg.separation, cfg.seed);
    let mut sizes = vec![cfg.n_train];
    sizes.extend(cfg.scatter_sizes.iter().copied().filter(|&n| n != cfg.n_train));
    let mut rows = Vec::new();
    for &n_train in &sizes {
        let results: Vec<(Score, Vec<Score>)> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, &generator, n_train, r))
            .collect::<Result<_>>()?;
        let base_auc: Vec<f64> = results.iter().map(|(b, _)| b.auc).collect();
        let base_ece: Vec<f64> = results.iter().map(|(b, _)| b.ece).collect();
        let (mean_base, se_base) = mean_se(&base_auc);
        let mean_base_ece = mean_se(&base_ece).0;
        for (k, &strategy) in cfg.strategies.iter().enumerate() {
            let auc: Vec<f64> = results.iter().map(|(_, a)| a[k].auc).collect();
            let ece: Vec<f64> = results.iter().map(|(_, a)| a[k].ece).collect();
            let gain: Vec<f64> = auc.iter().zip(&base_auc).map(|(a, b)| a - b).collect();
            let (mean_auc, se_auc) = mean_se(&auc);
            let (mean_gain, se_gain) = mean_se(&gain);
            rows.push(BenchRow {
                strategy,
                arm: Arm::Baseline,
                n_train,
                replicates: cfg.replicates,
                mean_auc: mean_base,
                se_auc: se_base,
                mean_ece: mean_base_ece,
                mean_gain: None,
                se_gain: None,
            });
            rows.push(BenchRow {
                strategy,
                arm: Arm::Augmented,
                n_train,
                replicates: cfg.replicates,
                mean_auc,
                se_auc,
                mean_ece: mean_se(&ece).0,
                mean_gain: Some(mean_gain),
                se_gain,
            });
        }
    }
    Ok(BenchReport { rows })
}

/// Mean baseline test AUC at separation `δ`, for calibrating
/// [`DEFAULT_SEPARATION`].
pub fn baseline_auc(cfg: &BenchConfig, separation: f64) -> Result<f64> {
    let cfg = BenchConfig { separation, strategies: Vec::new(), scatter_sizes: Vec::new(), ..cfg.clone() };
    let generator = Generator::new(cfg.p, separation, cfg.seed);
    let aucs: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(&cfg, &generator, cfg.n_train, r).map(|(b, _)| b.auc))
        .collect::<Result<_>>()?;
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Bisects `δ ∈ [lo, hi]` until the mean baseline AUC crosses `target`.
pub fn calibrate_separation(cfg: &BenchConfig, target: f64, mut lo: f64, mut hi: f64, iters: usize) -> Result<f64> {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if baseline_auc(cfg, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
