//! Metrics and the desk-scale benchmark.

pub mod bench;
pub mod logreg;
pub mod metrics;

pub use bench::{calibrate_separation, synth_benchmark, Arm, BenchConfig, BenchReport, BenchRow, Generator};
pub use logreg::{train_weighted_logreg, LogRegConfig, LogisticModel};
pub use metrics::{ece, ece_with_bins, roc_auc, BinaryScores, CalibrationBin, CalibrationReport};
