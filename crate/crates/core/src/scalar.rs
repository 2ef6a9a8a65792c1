//! The exact scalar abstraction every game quantity is built on.
//!
//! Weights, phases, eigenvalues and utilities are all values of one
//! [`Scalar`] type. The trait is satisfied by `num_rational::Ratio<T>` for
//! any signed integer backing type, so the same code runs over
//! `Ratio<i64>`, `Ratio<i128>` and the arbitrary-precision `BigRational`
//! the crate root aliases as [`crate::Rational`]. Floating-point types are
//! deliberately not scalars: every check in this crate is an exact equality.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact ordered field element.
pub trait Scalar:
    Num + Signed + Ord + Clone + Hash + Debug + Display + FromStr + ToPrimitive + Send + Sync + 'static
{
    /// `numer / denom`. Panics if `denom == 0`.
    fn ratio(numer: i64, denom: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::ratio(v, 1)
    }

    fn floor(&self) -> Self;

    fn is_integer(&self) -> bool;

    /// Denominator in lowest terms, when it fits in a `u64`.
    fn denom_u64(&self) -> Option<u64>;

    /// Fractional part in `[0, 1)`.
    fn fract_turn(&self) -> Self {
        self.clone() - self.floor()
    }
}

impl<T> Scalar for Ratio<T>
where
    T: Integer + Signed + Clone + Hash + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync + 'static,
    Ratio<T>: ToPrimitive,
{
    fn ratio(numer: i64, denom: i64) -> Self {
        let n = T::from_i64(numer).expect("numerator fits backing integer");
        let d = T::from_i64(denom).expect("denominator fits backing integer");
        Ratio::new(n, d)
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn is_integer(&self) -> bool {
        Ratio::is_integer(self)
    }

    fn denom_u64(&self) -> Option<u64> {
        self.denom().to_u64()
    }
}

/// Parse `"p/q"` or `"p"` into a scalar.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    // Ratio's parser panics on a zero denominator in some versions; reject it up front.
    if let Some((_, d)) = t.split_once('/') {
        if d.trim().trim_start_matches(['+', '-']).chars().all(|c| c == '0') {
            return None;
        }
    }
    S::from_str(t).ok()
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<S: Scalar>(values: &[S]) -> Option<u64> {
    values.iter().try_fold(1u64, |acc, v| {
        let d = v.denom_u64()?;
        let g = gcd(acc, d);
        (acc / g).checked_mul(d)
    })
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
