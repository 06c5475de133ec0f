//! ROC AUC and expected calibration error.

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// Scores for a binary problem; higher scores favour class 1 (`true`).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryScores<T> {
    pub scores: Vec<T>,
    pub labels: Vec<bool>,
    pub weights: Option<Vec<T>>,
}

impl<T: Scalar> BinaryScores<T> {
    pub fn new(scores: Vec<T>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::DimensionMismatch { left: scores.len(), right: labels.len() });
        }
        Ok(Self { scores, labels, weights: None })
    }

    pub fn with_weights(mut self, weights: Vec<T>) -> Result<Self> {
        if weights.len() != self.scores.len() {
            return Err(Error::DimensionMismatch { left: self.scores.len(), right: weights.len() });
        }
        self.weights = Some(weights);
        Ok(self)
    }

    /// Area under the ROC curve in Mann–Whitney form: the (weighted)
    /// probability that a positive outscores a negative, ties counting half.
    pub fn roc_auc(&self) -> Result<T> {
        if let Some(i) = self.scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let weight = |i: usize| self.weights.as_ref().map_or(T::one(), |w| w[i]);
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[a].partial_cmp(&self.scores[b]).expect("finite scores"));

        // Twice the numerator keeps tie halves exact for unit weights.
        let two = T::lit(2.0);
        let mut neg_below = T::zero();
        let mut twice_hits = T::zero();
        let mut pos_total = T::zero();
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            let (mut gp, mut gn) = (T::zero(), T::zero());
            while j < order.len() && self.scores[order[j]] == self.scores[order[i]] {
                let w = weight(order[j]);
                if self.labels[order[j]] {
                    gp = gp + w;
                } else {
                    gn = gn + w;
                }
                j += 1;
            }
            twice_hits = twice_hits + two * gp * neg_below + gp * gn;
            neg_below = neg_below + gn;
            pos_total = pos_total + gp;
            i = j;
        }
        if pos_total == T::zero() || neg_below == T::zero() {
            return Err(Error::SingleClass);
        }
        Ok(twice_hits / (two * pos_total * neg_below))
    }
}

/// Unweighted ROC AUC.
pub fn roc_auc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<T> {
    BinaryScores::new(scores.to_vec(), labels.to_vec())?.roc_auc()
}

/// Number of equal-width confidence bins over `[0.5, 1]`.
pub const DEFAULT_ECE_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBin<T> {
    pub lower: T,
    pub upper: T,
    pub mean_confidence: T,
    pub accuracy: T,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport<T> {
    pub ece: T,
    pub bins: Vec<CalibrationBin<T>>,
}

/// Expected calibration error of binary probabilities with
/// [`DEFAULT_ECE_BINS`] bins.
pub fn ece<T: Scalar>(prob_class1: &[T], labels: &[bool]) -> Result<CalibrationReport<T>> {
    ece_with_bins(prob_class1, labels, DEFAULT_ECE_BINS)
}

/// Confidence is `max(p, 1 - p)`, the prediction is class 1 when `p >= 0.5`.
/// `ece = Σ_b (n_b / n) |accuracy_b - confidence_b|`; empty bins add nothing.
pub fn ece_with_bins<T: Scalar>(
    prob_class1: &[T],
    labels: &[bool],
    bins: usize,
) -> Result<CalibrationReport<T>> {
    if prob_class1.is_empty() {
        return Err(Error::EmptyInput);
    }
    if prob_class1.len() != labels.len() {
        return Err(Error::DimensionMismatch { left: prob_class1.len(), right: labels.len() });
    }
    if bins == 0 {
        return Err(Error::InvalidConfig("ECE needs at least one bin".into()));
    }
    let half = T::lit(0.5);
    let width = half / T::lit(bins as f64);
    let mut conf_by_bin: Vec<Vec<T>> = vec![Vec::new(); bins];
    let mut hits_by_bin = vec![0usize; bins];
    for (i, (&p, &y)) in prob_class1.iter().zip(labels).enumerate() {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidConfig(format!("probability {p} at {i} outside [0, 1]")));
        }
        let predicted = p >= half;
        let conf = if predicted { p } else { T::one() - p };
        let b = ((conf - half) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        conf_by_bin[b].push(conf);
        if predicted == y {
            hits_by_bin[b] += 1;
        }
    }
    let n = T::lit(prob_class1.len() as f64);
    let mut ece = T::zero();
    let mut report = Vec::with_capacity(bins);
    for (b, confs) in conf_by_bin.iter().enumerate() {
        let count = confs.len();
        let (mean_confidence, accuracy) = if count == 0 {
            (T::zero(), T::zero())
        } else {
            let c = T::lit(count as f64);
            (compensated_sum(confs.iter().copied()) / c, T::lit(hits_by_bin[b] as f64) / c)
        };
        if count > 0 {
            ece = ece + T::lit(count as f64) / n * (accuracy - mean_confidence).abs();
        }
        report.push(CalibrationBin {
            lower: half + width * T::lit(b as f64),
            upper: half + width * T::lit((b + 1) as f64),
            mean_confidence,
            accuracy,
            count,
        });
    }
    Ok(CalibrationReport { ece, bins: report })
}
