//! Floating-point scalar abstraction shared by the geometry, augmentation
//! and metric code.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar the compositional toolkit can compute with.
///
/// Implemented for `f32` and `f64`. Tolerances that depend on precision
/// (simplex membership on construction, digits needed for a lossless text
/// rendering) are carried as associated constants.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance on `|sum(parts) - 1|` accepted when constructing a
    /// composition from parts that are claimed to be closed.
    const SIMPLEX_TOL: f64;

    /// Significant decimal digits that render every value losslessly.
    const SIG_DIGITS: usize;

    /// Converts an `f64` literal or intermediate into this scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        // Both implementors accept every f64 (f32 by rounding).
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    /// Renders the value with [`Scalar::SIG_DIGITS`] significant digits so
    /// that parsing the text gives back the same bits.
    fn render(self) -> String {
        format!("{:.*e}", Self::SIG_DIGITS - 1, self)
    }
}

impl Scalar for f64 {
    const SIMPLEX_TOL: f64 = 1e-9;
    const SIG_DIGITS: usize = 17;
}

impl Scalar for f32 {
    const SIMPLEX_TOL: f64 = 1e-5;
    const SIG_DIGITS: usize = 9;
}

/// Sum with Neumaier compensation. Used wherever a total must not depend on
/// how many small terms were accumulated (sample weights, closure sums).
pub fn compensated_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips_f64() {
        for v in [0.1f64, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 0.0, 123456.789] {
            let back: f64 = v.render().parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn render_round_trips_f32() {
        for v in [0.1f32, 1.0 / 3.0, 7.25e-20] {
            let back: f32 = v.render().parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn compensated_sum_of_tenths() {
        for n in 1..2000usize {
            let s = compensated_sum(std::iter::repeat_n(0.1f64, 10 * n));
            assert_eq!(s, n as f64, "n = {n}");
        }
    }
}
