//! Exact rational arithmetic used by every invariant formula.
//!
//! All quantities in this crate are exact: integers are arbitrary precision
//! and rationals are always kept in lowest terms. There is no floating point
//! anywhere in the workspace.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// An exact rational number, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// `n/d` reduced to lowest terms. Panics when `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl fmt::Display for Rat {
    /// Renders `p/q`, omitting `/q` when the denominator is 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl serde::Serialize for Rat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Rat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let s = String::deserialize(d)?;
        let parse_int = |t: &str| -> Result<BigInt, D::Error> {
            t.parse::<BigInt>()
                .map_err(|_| D::Error::custom(format!("invalid rational: {s}")))
        };
        match s.split_once('/') {
            None => Ok(Rat(BigRational::from_integer(parse_int(&s)?))),
            Some((p, q)) => {
                let den = parse_int(q)?;
                if den.is_zero() {
                    return Err(D::Error::custom("zero denominator"));
                }
                Ok(Rat(BigRational::new(parse_int(p)?, den)))
            }
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<i64> for Rat {
            type Output = Rat;
            fn $method(self, rhs: i64) -> Rat {
                (self).$method(Rat::int(rhs))
            }
        }
        impl $trait<Rat> for i64 {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat::int(self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(self.0 / rhs.0)
    }
}

impl Div<i64> for Rat {
    type Output = Rat;
    fn div(self, rhs: i64) -> Rat {
        self / Rat::int(rhs)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        self.0 -= rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms() {
        let r = Rat::new(24, 36);
        assert_eq!(r.to_string(), "2/3");
        assert_eq!(Rat::new(-4, -8), Rat::new(1, 2));
        assert_eq!(Rat::new(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn display_omits_unit_denominator() {
        assert_eq!(Rat::new(10, 2).to_string(), "5");
        assert_eq!(Rat::int(-7).to_string(), "-7");
        assert_eq!(Rat::new(129, 17).to_string(), "129/17");
    }

    #[test]
    fn arithmetic_is_exact() {
        // 12n(2n-1)(r-1)-sized denominators must not lose precision.
        let chi = Rat::new(1, 12 * 10 * 19 * 199);
        let sum: Rat = (0..12 * 10 * 19 * 199).map(|_| chi.clone()).sum();
        assert_eq!(sum, Rat::one());
    }

    #[test]
    fn serde_round_trip() {
        for r in [Rat::new(5, 3), Rat::int(-4), Rat::zero()] {
            let s = serde_json::to_string(&r).unwrap();
            let back: Rat = serde_json::from_str(&s).unwrap();
            assert_eq!(back, r);
        }
    }
}
