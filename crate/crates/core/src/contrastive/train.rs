//! Contrastive pretraining and the supervised evaluation protocols (linear
//! evaluation on frozen representations, and finetuning).

use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::loss::nt_xent;
use super::network::{Architecture, Dense, EncoderState, InputEncoding, Matrix, Mlp};
use super::views::{sample_views_paired, sample_views_subcomposition};
use crate::augment::{ClassId, Strategy};
use crate::composition::Composition;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::metrics::roc_auc;
use crate::preprocess::{zero_replace, LibrarySize};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveConfig {
    pub temperature: f64,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Subcompositions (two views per example) or Mixup/CutMix (two
    /// combinations per partition pair).
    pub view_strategy: Strategy,
    pub encoding: InputEncoding,
    /// Depth for zero replacement when a sample has none of its own.
    pub library_size: LibrarySize,
    pub encoder_widths: Vec<usize>,
    pub head_widths: Vec<usize>,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            temperature: 0.5,
            epochs: 2000,
            adam: AdamConfig::default(),
            seed: 0,
            view_strategy: Strategy::RandomSubcompositions,
            encoding: InputEncoding::Clr,
            library_size: LibrarySize::default(),
            encoder_widths: vec![256, 128, 64],
            head_widths: vec![32, 16],
        }
    }
}

impl ContrastiveConfig {
    pub fn architecture(&self, input_dim: usize) -> Architecture {
        Architecture {
            input_dim,
            encoder: self.encoder_widths.clone(),
            head: self.head_widths.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidConfig(format!("temperature must be positive, got {}", self.temperature)));
        }
        if self.view_strategy == Strategy::MultinomialResampling {
            return Err(Error::InvalidConfig("multinomial resampling is not a view strategy".into()));
        }
        if !(self.adam.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }

    /// Freshly initialised encoder and head for `input_dim` parts.
    pub fn initial_state(&self, input_dim: usize) -> Result<EncoderState> {
        EncoderState::init(
            self.architecture(input_dim),
            self.encoding,
            self.library_size,
            &mut stream(self.seed, "contrastive-init", 0),
        )
    }
}

#[derive(Debug, Clone)]
pub struct PretrainOutput {
    pub state: EncoderState,
    /// Loss at every epoch, before that epoch's update.
    pub loss_trace: Vec<f64>,
}

/// Full-batch contrastive pretraining: one Adam step per epoch over views of
/// the entire training set.
pub fn pretrain(train: &Dataset<f64>, cfg: &ContrastiveConfig) -> Result<PretrainOutput> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if train.len() < 2 {
        return Err(Error::InvalidConfig("contrastive pretraining needs at least 2 samples".into()));
    }
    let mut state = cfg.initial_state(train.dim())?;
    let xs: Vec<Composition<f64>> = match cfg.view_strategy {
        Strategy::AitchisonMixup | Strategy::CompositionalCutMix => train
            .samples
            .iter()
            .map(|s| zero_replace(&s.x, s.library_size.unwrap_or(cfg.library_size)))
            .collect(),
        _ => train.samples.iter().map(|s| s.x.clone()).collect(),
    };
    let mut adam = Adam::new(cfg.adam);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut draws = stream(cfg.seed, "contrastive-views", epoch as u64);
        let batch = match cfg.view_strategy {
            Strategy::RandomSubcompositions => sample_views_subcomposition(&xs, &mut draws)?,
            other => sample_views_paired(&xs, other, &mut draws)?,
        };
        let inputs = state.encode_inputs(&batch.views);
        let fwd = state.forward(&inputs).map_err(|_| Error::TrainingDiverged { epoch })?;
        let (loss, grad) = nt_xent(&fwd.projections, &batch.partner, cfg.temperature)?;
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        loss_trace.push(loss);
        let grads = state.backward(&fwd, &grad);
        adam.step(state.tensors_mut(), &grads.tensors());
        if !state.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
    }
    Ok(PretrainOutput { state, loss_trace })
}

/// Schedule for the supervised classification head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self { epochs: 2000, adam: AdamConfig::default(), seed: 0 }
    }
}

/// Class 1 is the positive class; more than two classes is an error.
pub(crate) fn binary_targets(ds: &Dataset<f64>) -> Result<Vec<bool>> {
    ds.samples
        .iter()
        .map(|s| match s.y {
            ClassId(0) => Ok(false),
            ClassId(1) => Ok(true),
            ClassId(c) => Err(Error::InvalidConfig(format!("binary labels expected, found class {c}"))),
        })
        .collect()
}

fn require_both_classes(targets: &[bool]) -> Result<()> {
    if targets.iter().all(|&t| t) || targets.iter().all(|&t| !t) {
        return Err(Error::SingleClassTrain);
    }
    Ok(())
}

/// Weighted mean logistic loss of `logits` and its gradient per logit.
fn logistic_grad(logits: &Matrix, targets: &[bool], weights: &[f64]) -> (f64, Matrix) {
    let total: f64 = weights.iter().sum();
    let mut grad = Matrix::zeros(logits.rows, 1);
    let mut loss = 0.0;
    for i in 0..logits.rows {
        let s = logits.data[i];
        let y = if targets[i] { 1.0 } else { 0.0 };
        // softplus(s) - y s, written to avoid overflow
        loss += weights[i] * (s.max(0.0) + (-s.abs()).exp().ln_1p() - y * s);
        grad.data[i] = weights[i] * (sigmoid(s) - y) / total;
    }
    (loss / total, grad)
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

fn new_head(input_dim: usize, cfg: &HeadConfig) -> Mlp {
    Mlp { layers: vec![Dense::init(input_dim, 1, &mut stream(cfg.seed, "head-init", 0))] }
}

/// Trains a linear head on frozen representations and returns the test ROC
/// AUC. `state` is not modified.
pub fn linear_eval(state: &EncoderState, train: &Dataset<f64>, test: &Dataset<f64>, cfg: &HeadConfig) -> Result<f64> {
    let targets = binary_targets(train)?;
    require_both_classes(&targets)?;
    let test_targets = binary_targets(test)?;
    let weights: Vec<f64> = train.samples.iter().map(|s| s.weight).collect();
    let reps = state.represent(&state.encode_inputs(train.samples.iter().map(|s| &s.x)))?;
    let mut head = new_head(reps.cols, cfg);
    let mut adam = Adam::new(cfg.adam);
    for epoch in 0..cfg.epochs {
        let (logits, cache) = head.forward_cached(&reps);
        let (loss, g) = logistic_grad(&logits, &targets, &weights);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        let mut grads = head.zeros_like();
        head.backward(&cache, &g, &mut grads);
        adam.step(head.tensors_mut(), &grads.tensors());
    }
    let test_reps = state.represent(&state.encode_inputs(test.samples.iter().map(|s| &s.x)))?;
    roc_auc(&head.forward(&test_reps).data, &test_targets)
}

#[derive(Debug, Clone)]
pub struct FinetuneOutput {
    pub auc: f64,
    /// Encoder after finetuning; the projection head is carried over unchanged.
    pub state: EncoderState,
}

/// Trains encoder and a linear head jointly on the supervised objective and
/// returns the test ROC AUC. Starting from a fresh
/// [`ContrastiveConfig::initial_state`] gives the no-pretraining control.
pub fn finetune(
    state: &EncoderState,
    train: &Dataset<f64>,
    test: &Dataset<f64>,
    cfg: &HeadConfig,
) -> Result<FinetuneOutput> {
    let targets = binary_targets(train)?;
    require_both_classes(&targets)?;
    let test_targets = binary_targets(test)?;
    let weights: Vec<f64> = train.samples.iter().map(|s| s.weight).collect();
    let mut state = state.clone();
    let inputs = state.encode_inputs(train.samples.iter().map(|s| &s.x));
    state.represent(&inputs)?;
    let mut head = new_head(state.architecture.representation_dim(), cfg);
    let mut adam = Adam::new(cfg.adam);
    for epoch in 0..cfg.epochs {
        let (reps, enc_cache) = state.encoder.forward_cached(&inputs);
        let (logits, head_cache) = head.forward_cached(&reps);
        let (loss, g) = logistic_grad(&logits, &targets, &weights);
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        let mut head_grads = head.zeros_like();
        let grad_reps = head.backward(&head_cache, &g, &mut head_grads);
        let mut enc_grads = state.encoder.zeros_like();
        state.encoder.backward(&enc_cache, &grad_reps, &mut enc_grads);
        let mut params = state.encoder.tensors_mut();
        params.extend(head.tensors_mut());
        let mut grads = enc_grads.tensors();
        grads.extend(head_grads.tensors());
        adam.step(params, &grads);
    }
    let test_reps = state.represent(&state.encode_inputs(test.samples.iter().map(|s| &s.x)))?;
    let auc = roc_auc(&head.forward(&test_reps).data, &test_targets)?;
    Ok(FinetuneOutput { auc, state })
}
