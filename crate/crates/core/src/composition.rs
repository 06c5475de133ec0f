//! Aitchison geometry of the simplex.
//!
//! A [`Composition`] is a point on the simplex: `p >= 2` nonnegative parts that
//! sum to one. The log-ratio operations (perturbation, powering, the inner
//! product and everything derived from them) are only defined for strictly
//! positive compositions and return [`Error::ZeroPart`] otherwise; zeros are
//! dealt with in [`crate::preprocess`], never here.
//!
//! Perturbation and powering are evaluated in log space followed by a
//! max-shifted softmax, which is the same closure as the product formulas but
//! cannot underflow for large exponents.

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

/// A point on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition<T> {
    parts: Vec<T>,
}

/// Centered log-ratio coordinates of a strictly positive composition.
#[derive(Debug, Clone, PartialEq)]
pub struct ClrVector<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Composition<T> {
    /// Builds a composition from parts that already lie on the simplex
    /// (within [`Scalar::SIMPLEX_TOL`]); the parts are re-closed.
    pub fn new(parts: Vec<T>) -> Result<Self> {
        validate_raw(&parts)?;
        let sum = compensated_sum(parts.iter().copied());
        if (sum - T::one()).abs().to_f64_lossy() > T::SIMPLEX_TOL {
            return Err(Error::NotOnSimplex { sum: sum.to_f64_lossy() });
        }
        Ok(Self::closed_from_sum(parts, sum))
    }

    /// The uniform composition `[1/p, ..., 1/p]`, the identity of perturbation.
    pub fn uniform(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::DimensionTooSmall(p));
        }
        let v = T::one() / T::lit(p as f64);
        Ok(Self { parts: vec![v; p] })
    }

    /// The vertex `e_index` of the simplex.
    pub fn vertex(p: usize, index: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::DimensionTooSmall(p));
        }
        let mut parts = vec![T::zero(); p];
        parts[index] = T::one();
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[T] {
        &self.parts
    }

    /// Number of parts `p`.
    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn into_parts(self) -> Vec<T> {
        self.parts
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.parts.iter().all(|&v| v > T::zero())
    }

    /// Returns `ZeroPart` naming the first zero part, if any.
    pub fn require_strictly_positive(&self) -> Result<()> {
        match self.parts.iter().position(|&v| v <= T::zero()) {
            Some(index) => Err(Error::ZeroPart { index }),
            None => Ok(()),
        }
    }

    /// Wraps parts known to be closed (e.g. a softmax output).
    pub(crate) fn from_closed_unchecked(parts: Vec<T>) -> Self {
        debug_assert!(parts.len() >= 2);
        Self { parts }
    }

    fn closed_from_sum(mut parts: Vec<T>, sum: T) -> Self {
        // Vectors already closed up to rounding are left untouched, which makes
        // closure exactly idempotent and text round trips bit-exact.
        let slack = T::epsilon() * T::lit(2.0 * parts.len() as f64);
        if (sum - T::one()).abs() > slack {
            for v in &mut parts {
                *v = *v / sum;
            }
        }
        Self { parts }
    }

    fn log_parts(&self) -> Vec<T> {
        self.parts.iter().map(|v| v.ln()).collect()
    }
}

impl<T: Scalar> ClrVector<T> {
    /// Wraps coordinates that sum to zero within [`Scalar::SIMPLEX_TOL`].
    pub fn new(coords: Vec<T>) -> Result<Self> {
        validate_finite(&coords)?;
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let sum = compensated_sum(coords.iter().copied());
        if sum.abs().to_f64_lossy() > T::SIMPLEX_TOL {
            return Err(Error::InvalidConfig(format!(
                "clr coordinates sum to {sum}, not 0"
            )));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }
}

fn validate_finite<T: Scalar>(values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn validate_raw<T: Scalar>(raw: &[T]) -> Result<()> {
    if raw.len() < 2 {
        return Err(Error::DimensionTooSmall(raw.len()));
    }
    validate_finite(raw)?;
    if let Some(index) = raw.iter().position(|&v| v < T::zero()) {
        return Err(Error::NegativeEntry { index, value: raw[index].to_f64_lossy() });
    }
    Ok(())
}

fn same_dim<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    compensated_sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// `close(exp(logits))` with the maximum subtracted first.
pub(crate) fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum = compensated_sum(out.iter().copied());
    for v in &mut out {
        *v = *v / sum;
    }
    out
}

/// Rescales a nonnegative vector to unit sum.
pub fn close<T: Scalar>(raw: &[T]) -> Result<Composition<T>> {
    validate_raw(raw)?;
    let sum = compensated_sum(raw.iter().copied());
    if sum <= T::zero() {
        return Err(Error::AllZero);
    }
    Ok(Composition::closed_from_sum(raw.to_vec(), sum))
}

/// Perturbation `v ⊕ x = close(v ∘ x)`, the vector addition of the simplex.
pub fn perturb<T: Scalar>(v: &Composition<T>, x: &Composition<T>) -> Result<Composition<T>> {
    same_dim(&v.parts, &x.parts)?;
    v.require_strictly_positive()?;
    x.require_strictly_positive()?;
    let logits: Vec<T> = v
        .parts
        .iter()
        .zip(&x.parts)
        .map(|(&a, &b)| a.ln() + b.ln())
        .collect();
    Ok(Composition::from_closed_unchecked(softmax(&logits)))
}

/// Powering `λ ⊙ x = close(x^λ)`, the scalar multiplication of the simplex.
pub fn power<T: Scalar>(lambda: T, x: &Composition<T>) -> Result<Composition<T>> {
    x.require_strictly_positive()?;
    if !lambda.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    let logits: Vec<T> = x.parts.iter().map(|&v| lambda * v.ln()).collect();
    Ok(Composition::from_closed_unchecked(softmax(&logits)))
}

/// `v ⊖ x = v ⊕ ((-1) ⊙ x)`.
pub fn difference<T: Scalar>(v: &Composition<T>, x: &Composition<T>) -> Result<Composition<T>> {
    perturb(v, &power(-T::one(), x)?)
}

/// Centered log-ratio transform.
pub fn clr<T: Scalar>(x: &Composition<T>) -> Result<ClrVector<T>> {
    x.require_strictly_positive()?;
    let logs = x.log_parts();
    let mean = compensated_sum(logs.iter().copied()) / T::lit(logs.len() as f64);
    Ok(ClrVector { coords: logs.into_iter().map(|l| l - mean).collect() })
}

/// Inverse of [`clr`]: the softmax of any finite real vector. Adding a
/// constant to every coordinate does not change the result.
pub fn clr_inv<T: Scalar>(z: &[T]) -> Result<Composition<T>> {
    if z.len() < 2 {
        return Err(Error::DimensionTooSmall(z.len()));
    }
    validate_finite(z)?;
    Ok(Composition::from_closed_unchecked(softmax(z)))
}

/// Aitchison inner product, evaluated as the dot product of clr coordinates.
pub fn inner_product<T: Scalar>(v: &Composition<T>, x: &Composition<T>) -> Result<T> {
    same_dim(&v.parts, &x.parts)?;
    Ok(clr(v)?.dot(&clr(x)?))
}

/// Aitchison norm `sqrt(<x, x>)`.
pub fn norm<T: Scalar>(x: &Composition<T>) -> Result<T> {
    Ok(inner_product(x, x)?.sqrt())
}

/// Aitchison distance, the Euclidean distance between clr coordinates.
pub fn distance<T: Scalar>(v: &Composition<T>, x: &Composition<T>) -> Result<T> {
    same_dim(&v.parts, &x.parts)?;
    let a = clr(v)?;
    let b = clr(x)?;
    let sq = compensated_sum(a.coords.iter().zip(&b.coords).map(|(&p, &q)| (p - q) * (p - q)));
    Ok(sq.sqrt())
}
