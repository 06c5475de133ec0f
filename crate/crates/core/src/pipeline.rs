//! Whole-table entry points shared by the command line and any foreign
//! binding layer. Everything numeric is delegated to [`crate::augment`] and
//! [`crate::preprocess`]; two front ends calling these functions with the
//! same inputs produce bit-identical tables.

use std::fmt;

use crate::augment::{augment_dataset, AugmentationConfig, LabeledSample, Provenance, Strategy};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::{zero_replace, LibrarySize};

/// Parameters of a whole-table augmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentRequest {
    pub strategy: Strategy,
    /// Synthetic rows per original row.
    pub factor: usize,
    /// Weight of each synthetic row; `None` means `1 / factor`.
    pub synthetic_weight: Option<f64>,
    pub seed: u64,
    /// Library size for rows whose own cannot be inferred.
    pub default_library_size: LibrarySize,
}

impl AugmentRequest {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            factor: 10,
            synthetic_weight: None,
            seed,
            default_library_size: LibrarySize::default(),
        }
    }

    pub fn config(&self) -> Result<AugmentationConfig<f64>> {
        if self.factor == 0 {
            return Err(Error::InvalidConfig("factor must be at least 1".into()));
        }
        let mut cfg = AugmentationConfig::new(self.strategy, self.seed).with_factor(self.factor);
        if let Some(w) = self.synthetic_weight {
            cfg = cfg.with_synthetic_weight(w);
        }
        cfg.default_library_size = self.default_library_size;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Originals unchanged, followed by `factor * n` synthetic rows. Strategies
/// that take logarithms draw from zero-replaced copies of the originals.
pub fn augment_table(ds: &Dataset<f64>, req: &AugmentRequest) -> Result<Dataset<f64>> {
    let cfg = req.config()?;
    if ds.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let out = if req.strategy.needs_strictly_positive() {
        let sources: Vec<LabeledSample<f64>> = ds
            .samples
            .iter()
            .map(|s| LabeledSample {
                x: zero_replace(&s.x, s.library_size.unwrap_or(req.default_library_size)),
                ..s.clone()
            })
            .collect();
        let mut out = ds.samples.clone();
        out.extend(augment_dataset(&sources, &cfg)?.into_iter().skip(sources.len()));
        out
    } else {
        augment_dataset(&ds.samples, &cfg)?
    };
    Ok(ds.with_samples(out))
}

/// Row and class counts of an augmented table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentSummary {
    pub n: usize,
    pub p: usize,
    pub class_counts: Vec<(String, usize)>,
    pub synthetic: usize,
}

impl AugmentSummary {
    pub fn of(ds: &Dataset<f64>) -> Self {
        let synthetic = ds.samples.iter().filter(|s| s.provenance != Provenance::Original).count();
        Self {
            n: ds.len(),
            p: ds.dim(),
            class_counts: ds.class_names.iter().cloned().zip(ds.class_counts()).collect(),
            synthetic,
        }
    }
}

impl fmt::Display for AugmentSummary {
    /// `key=value` lines: `n`, `p`, one `class[<name>]` per class, `synthetic`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "p={}", self.p)?;
        for (name, count) in &self.class_counts {
            writeln!(f, "class[{name}]={count}")?;
        }
        write!(f, "synthetic={}", self.synthetic)
    }
}
