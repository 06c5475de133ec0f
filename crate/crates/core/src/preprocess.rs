//! Bringing raw abundance rows onto the strictly positive simplex.

use serde::{Deserialize, Serialize};

use crate::composition::{close, Composition};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Library size used when a row carries proportions rather than counts.
pub const DEFAULT_LIBRARY_SIZE: u64 = 10_000;

const INTEGRAL_TOL: f64 = 1e-9;

/// Sequencing depth (total read count) of one sample; always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct LibrarySize(u64);

impl TryFrom<u64> for LibrarySize {
    type Error = Error;

    fn try_from(value: u64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<LibrarySize> for u64 {
    fn from(l: LibrarySize) -> u64 {
        l.0
    }
}

impl LibrarySize {
    pub fn new(value: u64) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidLibrarySize);
        }
        Ok(Self(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl Default for LibrarySize {
    fn default() -> Self {
        Self(DEFAULT_LIBRARY_SIZE)
    }
}

impl std::fmt::Display for LibrarySize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Read total of a count row, or `default` when the row holds proportions.
///
/// A row counts as count data when every entry is within 1e-9 of an integer.
pub fn infer_library_size<T: Scalar>(raw_row: &[T], default: LibrarySize) -> Result<LibrarySize> {
    let mut total = 0.0f64;
    let mut integral = true;
    for &v in raw_row {
        let v = v.to_f64_lossy();
        total += v;
        if (v - v.round()).abs() > INTEGRAL_TOL {
            integral = false;
        }
    }
    if !(total > 0.0) {
        return Err(Error::AllZero);
    }
    if integral {
        LibrarySize::new(total.round() as u64)
    } else {
        Ok(default)
    }
}

/// Adds the pseudo-count `1/L` to every part and re-closes:
/// `out_j = (x_j + 1/L) / (1 + p/L)`.
pub fn zero_replace<T: Scalar>(x: &Composition<T>, library_size: LibrarySize) -> Composition<T> {
    let pseudo = T::one() / T::lit(library_size.get() as f64);
    let shifted: Vec<T> = x.parts().iter().map(|&v| v + pseudo).collect();
    close(&shifted).expect("shifted parts are positive")
}

/// Closes every row and infers its library size. Output order equals input
/// order; an all-zero row is reported with its index.
pub fn normalize_rows<T: Scalar>(
    raw: &[Vec<T>],
    default: LibrarySize,
) -> Result<(Vec<Composition<T>>, Vec<LibrarySize>)> {
    let mut comps = Vec::with_capacity(raw.len());
    let mut sizes = Vec::with_capacity(raw.len());
    for (row, values) in raw.iter().enumerate() {
        let c = close(values).map_err(|e| match e {
            Error::AllZero => Error::AllZeroRow { row },
            other => other,
        })?;
        comps.push(c);
        sizes.push(infer_library_size(values, default)?);
    }
    Ok((comps, sizes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn library_size_examples() {
        let d = LibrarySize::default();
        assert_eq!(infer_library_size(&[120.0, 30.0, 50.0], d).unwrap().get(), 200);
        assert_eq!(infer_library_size(&[0.5, 0.3, 0.2], d).unwrap().get(), 10_000);
        assert!(matches!(infer_library_size(&[0.0f64, 0.0], d), Err(Error::AllZero)));
        assert!(LibrarySize::new(0).is_err());
    }

    #[test]
    fn zero_replace_examples() {
        let x = Composition::new(vec![0.5, 0.5, 0.0]).unwrap();
        let z = zero_replace(&x, LibrarySize::new(2).unwrap());
        for (a, b) in z.parts().iter().zip([0.4, 0.4, 0.2]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let u = Composition::<f64>::uniform(5).unwrap();
        let zu = zero_replace(&u, LibrarySize::new(3).unwrap());
        for v in zu.parts() {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-15);
        }
        let y = Composition::new(vec![0.5, 0.3, 0.2]).unwrap();
        let zy = zero_replace(&y, LibrarySize::new(1_000_000_000_000).unwrap());
        for (a, b) in zy.parts().iter().zip(y.parts()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-11);
        }
    }

    #[test]
    fn normalize_rows_examples() {
        let d = LibrarySize::default();
        let (c, l) = normalize_rows(&[vec![2.0, 2.0], vec![1.0, 3.0]], d).unwrap();
        assert_eq!(c[0].parts(), &[0.5, 0.5]);
        assert_eq!(c[1].parts(), &[0.25, 0.75]);
        assert_eq!(l, vec![LibrarySize::new(4).unwrap(); 2]);

        let err = normalize_rows(&[vec![0.0f64, 0.0]], d).unwrap_err();
        assert!(matches!(err, Error::AllZeroRow { row: 0 }));
        assert_eq!(err.name(), "AllZero");

        let rows = vec![vec![0.6, 0.4], vec![0.1, 0.9]];
        let (c, l) = normalize_rows(&rows, d).unwrap();
        assert_eq!(c[0].parts(), &rows[0][..]);
        assert_eq!(c[1].parts(), &rows[1][..]);
        assert_eq!(l, vec![d, d]);
    }
}
