//! Exact ordered-field scalars.
//!
//! Every coordinate, breakpoint and function value in the crate is a
//! [`Scalar`]. Canonical forms rely on exact equality, so only exact
//! rational types implement the trait.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact ordered field element.
pub trait Scalar:
    Clone
    + Eq
    + Ord
    + Hash
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + Zero
    + One
    + Signed
    + num_traits::Num
    + 'static
{
    fn from_i64(n: i64) -> Self;

    /// `num / den`; panics on a zero denominator.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn to_big(&self) -> BigRational;

    /// `None` when the value does not fit the underlying integer type.
    fn from_big(value: &BigRational) -> Option<Self>;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.to_big()).unwrap_or(f64::NAN)
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_i64(2)
    }

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / Self::from_i64(2)
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Parses `"p/q"`, `"p"` or a JSON integer rendered as text.
    fn parse_exact(text: &str) -> Option<Self> {
        Self::from_str(text.trim()).ok()
    }
}

macro_rules! impl_machine_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_i64(n: i64) -> Self {
                Ratio::from_integer(n as $int)
            }

            fn to_big(&self) -> BigRational {
                BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
            }

            fn from_big(value: &BigRational) -> Option<Self> {
                let numer = value.numer().to_string().parse::<$int>().ok()?;
                let denom = value.denom().to_string().parse::<$int>().ok()?;
                Some(Ratio::new(numer, denom))
            }
        }
    };
}

impl_machine_ratio!(i64);
impl_machine_ratio!(i128);

impl Scalar for BigRational {
    fn from_i64(n: i64) -> Self {
        Ratio::from_integer(BigInt::from(n))
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn from_big(value: &BigRational) -> Option<Self> {
        Some(value.clone())
    }
}

/// Formats a scalar the way every wire format in the crate does: `"p/q"`,
/// or `"p"` for integers.
pub fn format_exact<S: Scalar>(value: &S) -> String {
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_agree() {
        let q = <BigRational as Scalar>::parse_exact("6/20").unwrap();
        assert_eq!(format_exact(&q), "3/10");
        let r = <Ratio<i64> as Scalar>::parse_exact("4").unwrap();
        assert_eq!(format_exact(&r), "4");
        assert!(<Ratio<i64> as Scalar>::parse_exact("x/2").is_none());
    }

    #[test]
    fn big_round_trip_respects_range() {
        let big = BigRational::new(BigInt::from(1) << 80, BigInt::from(3));
        assert!(<Ratio<i64> as Scalar>::from_big(&big).is_none());
        assert!(<Ratio<i128> as Scalar>::from_big(&big).is_some());
        let small = Ratio::<i64>::new(-7, 12);
        assert_eq!(Ratio::<i64>::from_big(&small.to_big()), Some(small));
    }
}
