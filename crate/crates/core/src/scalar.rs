//! Scalar abstraction: exact rationals and tolerance-aware floats.
//!
//! Every geometric routine in this crate is generic over [`Scalar`] so the
//! same algorithm can run in exact mode (arbitrary-precision rationals,
//! comparisons against literal zero) and in approx mode (f64 with an explicit
//! tolerance attached to every comparison).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar.
pub type Rat = BigRational;

/// Build an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "rational denominator must be nonzero");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Arithmetic interface shared by `Rat` and `f64`.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and `default_tol` is literal zero.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// num/den as a scalar; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Tolerance accompanying comparisons; 0 in exact mode, 1e-9 in approx mode.
    fn default_tol() -> Self;

    fn abs(&self) -> Self;

    /// Sign classification against a tolerance: -1, 0 or +1.
    fn sign_tol(&self, tol: &Self) -> i8 {
        if self.abs() <= *tol {
            0
        } else if *self > Self::zero() {
            1
        } else {
            -1
        }
    }

    fn is_zero_tol(&self, tol: &Self) -> bool {
        self.sign_tol(tol) == 0
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }

    /// Square root; only meaningful in approx mode (ray normalization).
    fn sqrt(&self) -> Self {
        unimplemented!("square root is not available for exact scalars")
    }

    /// Render for the line-oriented cone text format.
    fn render(&self) -> String;

    /// Parse an entry of the cone text format ("p/q", integer, or float).
    fn parse_entry(s: &str) -> Option<Self>;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        rat(num, den)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }

    fn default_tol() -> Self {
        Self::zero()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse_entry(s: &str) -> Option<Self> {
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.parse().ok()?;
                let d: BigInt = d.parse().ok()?;
                if d.is_zero() {
                    return None;
                }
                Some(BigRational::new(n, d))
            }
            None => {
                let n: BigInt = s.parse().ok()?;
                Some(BigRational::from_integer(n))
            }
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn default_tol() -> Self {
        1e-9
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn parse_entry(s: &str) -> Option<Self> {
        match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n.parse().ok()?;
                let d: f64 = d.parse().ok()?;
                if d == 0.0 {
                    return None;
                }
                Some(n / d)
            }
            None => s.parse().ok(),
        }
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
