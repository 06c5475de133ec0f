//! Data augmentation and representation learning for compositional
//! (simplex-valued) data.
//!
//! The crate is organised bottom-up:
//!
//! - [`composition`]: Aitchison geometry (closure, perturbation, powering,
//!   inner product, distance, clr and its inverse).
//! - [`preprocess`]: row closure, library sizes and zero replacement.
//! - [`augment`]: Aitchison Mixup, Random Subcompositions, Compositional
//!   CutMix and Multinomial Resampling, plus weighted dataset augmentation.
//! - [`dataset`]: CSV input/output and replicated train/test splits.
//! - [`contrastive`]: an MLP encoder pretrained with a temperature-scaled
//!   contrastive loss on augmented views, and its evaluation protocols.
//! - [`eval`]: ROC AUC, expected calibration error, a weighted logistic
//!   regression baseline and a synthetic benchmark.
//!
//! Geometry, augmentation, datasets and metrics are generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix the precision. The
//! neural and benchmark code runs in `f64`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod composition;
pub mod contrastive;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod scalar;

pub use augment::{
    aitchison_mixup_core, augment_dataset, compositional_cutmix_core, multinomial_resample_core,
    random_subcomposition_core, sample_augmented, AugmentationConfig, ClassId, LabeledSample,
    MaskVector, Provenance, Strategy,
};
pub use composition::{
    clr, clr_inv, close, difference, distance, inner_product, norm, perturb, power, ClrVector,
    Composition,
};
pub use dataset::{class_prior, load_csv, split, write_csv, CsvOptions, Dataset, SplitSpec};
pub use error::{Error, Result};
pub use pipeline::{augment_table, AugmentRequest, AugmentSummary};
pub use preprocess::{infer_library_size, normalize_rows, zero_replace, LibrarySize};
pub use scalar::Scalar;

/// Crate version, shared by the CLI and any foreign-language wrapper.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Composition64 = Composition<f64>;
pub type Composition32 = Composition<f32>;
pub type ClrVector64 = ClrVector<f64>;
pub type ClrVector32 = ClrVector<f32>;
pub type LabeledSample64 = LabeledSample<f64>;
pub type LabeledSample32 = LabeledSample<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type AugmentationConfig64 = AugmentationConfig<f64>;
pub type AugmentationConfig32 = AugmentationConfig<f32>;
