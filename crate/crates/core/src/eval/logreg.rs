//! Weighted logistic regression on clr features.
//!
//! Objective: `Σ_i w_i ℓ_i / Σ_i w_i + (l2 / 2) ‖β‖²`, with `ℓ_i` the logistic
//! loss of sample `i`, minimised by full-batch gradient descent with a fixed
//! step. Normalising by the total weight makes the optimum invariant to a
//! common rescaling of the weights. The intercept is not penalised.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::LabeledSample;
use crate::composition::{clr, Composition};
use crate::contrastive::train::sigmoid;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub l2: f64,
    pub epochs: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self { l2: 1e-2, epochs: 300, step: 0.5, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

/// Features, binary targets and weights of a training set.
#[derive(Debug, Clone)]
pub struct Design {
    pub dim: usize,
    /// Row-major `n x dim`.
    pub features: Vec<f64>,
    pub targets: Vec<bool>,
    pub weights: Vec<f64>,
}

impl Design {
    /// clr features of strictly positive compositions; class 1 is positive.
    pub fn from_samples(samples: &[LabeledSample<f64>]) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.x.dim());
        let mut features = Vec::with_capacity(samples.len() * dim);
        let mut targets = Vec::with_capacity(samples.len());
        for s in samples {
            features.extend_from_slice(clr(&s.x)?.coords());
            targets.push(match s.y.0 {
                0 => false,
                1 => true,
                c => return Err(Error::InvalidConfig(format!("binary labels expected, found class {c}"))),
            });
        }
        let weights = samples.iter().map(|s| s.weight).collect();
        Ok(Self { dim, features, targets, weights })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }
}

impl LogisticModel {
    pub fn logit(&self, features: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(features).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Probability of class 1 for a strictly positive composition.
    pub fn predict_proba(&self, x: &Composition<f64>) -> Result<f64> {
        Ok(sigmoid(self.logit(clr(x)?.coords())))
    }
}

/// Value of the training objective.
pub fn objective(model: &LogisticModel, design: &Design, l2: f64) -> f64 {
    let total: f64 = design.weights.iter().sum();
    let mut loss = 0.0;
    for i in 0..design.len() {
        let s = model.logit(design.row(i));
        let y = if design.targets[i] { 1.0 } else { 0.0 };
        loss += design.weights[i] * (s.max(0.0) + (-s.abs()).exp().ln_1p() - y * s);
    }
    let penalty: f64 = model.coefficients.iter().map(|b| b * b).sum();
    loss / total + 0.5 * l2 * penalty
}

/// Gradient of [`objective`] as `(coefficients, intercept)`.
pub fn gradient(model: &LogisticModel, design: &Design, l2: f64) -> (Vec<f64>, f64) {
    let total: f64 = design.weights.iter().sum();
    let mut g = vec![0.0; design.dim];
    let mut g0 = 0.0;
    for i in 0..design.len() {
        let row = design.row(i);
        let y = if design.targets[i] { 1.0 } else { 0.0 };
        let r = design.weights[i] * (sigmoid(model.logit(row)) - y) / total;
        g0 += r;
        for (gj, &xj) in g.iter_mut().zip(row) {
            *gj += r * xj;
        }
    }
    for (gj, &b) in g.iter_mut().zip(&model.coefficients) {
        *gj += l2 * b;
    }
    (g, g0)
}

/// Fits from a small seeded starting point.
pub fn fit(design: &Design, cfg: &LogRegConfig) -> Result<LogisticModel> {
    if design.targets.iter().all(|&t| t) || design.targets.iter().all(|&t| !t) {
        return Err(Error::SingleClassTrain);
    }
    let mut rng = stream(cfg.seed, "logreg-init", 0);
    let mut model = LogisticModel {
        coefficients: (0..design.dim).map(|_| rng.random_range(-0.01..0.01)).collect(),
        intercept: 0.0,
    };
    for epoch in 0..cfg.epochs {
        let (g, g0) = gradient(&model, design, cfg.l2);
        for (b, gj) in model.coefficients.iter_mut().zip(&g) {
            *b -= cfg.step * gj;
        }
        model.intercept -= cfg.step * g0;
        if !model.intercept.is_finite() || model.coefficients.iter().any(|b| !b.is_finite()) {
            return Err(Error::TrainingDiverged { epoch });
        }
    }
    Ok(model)
}

/// [`fit`] on the clr features of `train`.
pub fn train_weighted_logreg(train: &[LabeledSample<f64>], cfg: &LogRegConfig) -> Result<LogisticModel> {
    fit(&Design::from_samples(train)?, cfg)
}
