//! Normalized temperature-scaled cross-entropy (NT-Xent).
//!
//! For anchor `a` with positive partner `b`,
//! `l(a) = -log( exp(s_ab / τ) / Σ_{k≠a} exp(s_ak / τ) )` with `s` the dot
//! product of unit-norm projections (their cosine similarity). The batch loss
//! is the mean over all anchors.

use super::network::Matrix;
use crate::error::{Error, Result};

/// Projections of `2N` views with their positive-pair structure.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    /// One L2-normalised projection per row.
    pub projections: Matrix,
    /// `partner[a]` is the positive of view `a`.
    pub partner: Vec<usize>,
    /// Which training example (or partition pair) each view came from.
    pub origin: Vec<usize>,
}

/// Checks that `partner` is a perfect matching without fixed points.
pub fn check_pairing(partner: &[usize]) -> Result<()> {
    for (a, &b) in partner.iter().enumerate() {
        if b >= partner.len() || b == a || partner[b] != a {
            return Err(Error::InvalidConfig(format!("view {a} has invalid partner {b}")));
        }
    }
    Ok(())
}

/// Loss and its gradient with respect to every projection.
pub fn nt_xent_loss(batch: &EmbeddingBatch, tau: f64) -> Result<(f64, Matrix)> {
    nt_xent(&batch.projections, &batch.partner, tau)
}

pub fn nt_xent(z: &Matrix, partner: &[usize], tau: f64) -> Result<(f64, Matrix)> {
    let m = z.rows;
    if m == 0 {
        return Err(Error::DegenerateBatch);
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidConfig(format!("temperature must be positive, got {tau}")));
    }
    if partner.len() != m {
        return Err(Error::DimensionMismatch { left: m, right: partner.len() });
    }
    check_pairing(partner)?;

    let mut sims = vec![0.0; m * m];
    for a in 0..m {
        for k in a..m {
            let s: f64 = z.row(a).iter().zip(z.row(k)).map(|(x, y)| x * y).sum();
            sims[a * m + k] = s;
            sims[k * m + a] = s;
        }
    }

    let mut loss = 0.0;
    let mut grad = Matrix::zeros(m, z.cols);
    let scale = 1.0 / (tau * m as f64);
    let mut coef = vec![0.0; m];
    for a in 0..m {
        let row = &sims[a * m..(a + 1) * m];
        let max = (0..m).filter(|&k| k != a).map(|k| row[k] / tau).fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = (0..m).filter(|&k| k != a).map(|k| (row[k] / tau - max).exp()).sum();
        let lse = max + denom.ln();
        loss += lse - row[partner[a]] / tau;
        for k in 0..m {
            coef[k] = if k == a {
                0.0
            } else {
                let prob = (row[k] / tau - lse).exp();
                (prob - if k == partner[a] { 1.0 } else { 0.0 }) * scale
            };
        }
        // d s_ak / d z_a = z_k and d s_ak / d z_k = z_a.
        for (k, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for d in 0..z.cols {
                grad.data[a * z.cols + d] += c * z.data[k * z.cols + d];
                grad.data[k * z.cols + d] += c * z.data[a * z.cols + d];
            }
        }
    }
    Ok((loss / m as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(n: usize) -> Vec<usize> {
        (0..2 * n).map(|a| a ^ 1).collect()
    }

    #[test]
    fn single_pair_has_zero_loss() {
        let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (l, g) = nt_xent(&z, &pairs(1), 0.5).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orthogonal_pairs() {
        let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let (l, _) = nt_xent(&z, &pairs(2), 1.0).unwrap();
        let expected = (1.0 + 2.0 / std::f64::consts::E).ln();
        assert!((l - expected).abs() < 1e-15);
        assert!((l - 0.5514).abs() < 5e-5);
    }

    #[test]
    fn identical_views_give_log_of_candidates() {
        for n in 1..6 {
            let z = Matrix::from_rows(&vec![vec![0.6, 0.8]; 2 * n]);
            let (l, _) = nt_xent(&z, &pairs(n), 0.3).unwrap();
            assert!((l - ((2 * n - 1) as f64).ln()).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn rejects_bad_batches() {
        assert!(matches!(nt_xent(&Matrix::zeros(0, 2), &[], 1.0), Err(Error::DegenerateBatch)));
        let z = Matrix::from_rows(&[vec![1.0], vec![1.0]]);
        assert!(nt_xent(&z, &[0, 1], 1.0).is_err());
        assert!(nt_xent(&z, &[1, 0], 0.0).is_err());
    }
}
