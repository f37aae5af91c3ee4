//! Numeric abstraction shared by every module.
//!
//! Most of the model only needs field arithmetic and a total-enough order, so
//! it is written against [`Scalar`], which `f64` satisfies as well as the
//! rational types. Anything that relies on exact equality (tightness tests,
//! hashing of states, the lattice used by the grid falsifier) asks for
//! [`Exact`] instead.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Field-like scalar used for utilities and transfers.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + Num + Signed + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Embeds a machine integer.
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("every scalar type embeds i64")
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + PartialOrd
        + Num
        + Signed
        + FromPrimitive
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Scalars with exact equality and a total order.
pub trait Exact: Scalar + Eq + Ord + Hash {
    fn to_big(&self) -> BigRational;

    /// Converts back from an arbitrary-precision rational, or `None` when the
    /// value does not fit.
    fn from_big(v: &BigRational) -> Option<Self>;
}

impl Exact for BigRational {
    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        Some(v.clone())
    }
}

impl Exact for Ratio<i64> {
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn from_big(v: &BigRational) -> Option<Self> {
        Some(Ratio::new(v.numer().to_i64()?, v.denom().to_i64()?))
    }
}

/// Smallest of a non-empty iterator of scalars.
pub(crate) fn min_of<S: Scalar>(it: impl IntoIterator<Item = S>) -> Option<S> {
    it.into_iter().fold(None, |acc: Option<S>, v| match acc {
        Some(a) if a <= v => Some(a),
        _ => Some(v),
    })
}

/// Largest of a non-empty iterator of scalars.
pub(crate) fn max_of<S: Scalar>(it: impl IntoIterator<Item = S>) -> Option<S> {
    it.into_iter().fold(None, |acc: Option<S>, v| match acc {
        Some(a) if a >= v => Some(a),
        _ => Some(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio64_round_trips_through_big() {
        let r = Ratio::new(-6i64, 4);
        assert_eq!(r, Ratio::new(-3, 2));
        assert_eq!(Ratio::<i64>::from_big(&r.to_big()), Some(r));
    }

    #[test]
    fn big_values_do_not_fit_i64() {
        let huge = BigRational::from_integer(BigInt::from(i64::MAX) * 4);
        assert_eq!(Ratio::<i64>::from_big(&huge), None);
    }

    #[test]
    fn extrema_and_half() {
        let xs = vec![3.0f64, -1.0, 2.0];
        assert_eq!(min_of(xs.clone()), Some(-1.0));
        assert_eq!(max_of(xs), Some(3.0));
        assert_eq!(min_of(Vec::<f64>::new()), None);
        assert_eq!(BigRational::from_int(3).half(), BigRational::new(3.into(), 2.into()));
    }
}
