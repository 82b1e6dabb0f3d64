//! Exact rationals with an inline fast path for word-sized values.
//!
//! Almost every coefficient met in practice is a small integer or a small
//! fraction. Those stay in machine words; anything larger falls back to
//! [`BigRational`]. The representation is canonical, so equality and hashing
//! are structural.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Reduced, denominator positive.
    Small(i64, i64),
    /// Only for values that do not fit `Small`.
    Big(Box<BigRational>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(n: i64, d: i64) -> Rational {
        assert!(d != 0, "zero denominator");
        Rational::from_i128(n as i128, d as i128)
    }

    pub fn from_integer(n: i64) -> Rational {
        Rational(Repr::Small(n, 1))
    }

    fn from_i128(n: i128, d: i128) -> Rational {
        if n == 0 {
            return Rational::zero();
        }
        let (mut n, mut d) = if d < 0 { (-n, -d) } else { (n, d) };
        if d != 1 {
            let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
            if g != 1 {
                n /= g;
                d /= g;
            }
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new(n.into(), d.into())))),
        }
    }

    pub fn from_big(r: BigRational) -> Rational {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(r))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rational::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(b) => Rational::from_big(b.recip()),
        }
    }

    fn big_op(a: &Rational, b: &Rational, f: impl Fn(BigRational, BigRational) -> BigRational) -> Rational {
        Rational::from_big(f(a.to_big(), b.to_big()))
    }

    fn add_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, 1), Repr::Small(b, 1)) => match a.checked_add(*b) {
                Some(s) => Rational(Repr::Small(s, 1)),
                None => Rational::from_i128(*a as i128 + *b as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                Rational::from_i128(a * d + c * b, b * d)
            }
            _ => Rational::big_op(self, o, |x, y| x + y),
        }
    }

    fn mul_ref(&self, o: &Rational) -> Rational {
        match (&self.0, &o.0) {
            (Repr::Small(a, 1), Repr::Small(b, 1)) => match a.checked_mul(*b) {
                Some(p) => Rational(Repr::Small(p, 1)),
                None => Rational::from_i128(*a as i128 * *b as i128, 1),
            },
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rational::big_op(self, o, |x, y| x * y),
        }
    }

    fn neg_ref(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => Rational(Repr::Small(m, *d)),
                None => Rational::from_i128(-(*n as i128), *d as i128),
            },
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }

    fn div_ref(&self, o: &Rational) -> Rational {
        self.mul_ref(&o.recip())
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }
    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }
    fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(n))
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError;

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("not a rational number")
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| ParseRationalError);
        match s.split_once('/') {
            Some((n, d)) => {
                let d = int(d)?;
                if d.is_zero() {
                    return Err(ParseRationalError);
                }
                Ok(Rational::from_big(BigRational::new(int(n)?, d)))
            }
            None => Ok(Rational::from(int(s)?)),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $imp:ident, $atr:ident, $am:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                self.$imp(o)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                self.$imp(&o)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: &Rational) -> Rational {
                self.$imp(o)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, o: Rational) -> Rational {
                self.$imp(&o)
            }
        }
        impl $atr<&Rational> for Rational {
            fn $am(&mut self, o: &Rational) {
                *self = (&*self).$imp(o);
            }
        }
        impl $atr<Rational> for Rational {
            fn $am(&mut self, o: Rational) {
                *self = (&*self).$imp(&o);
            }
        }
    };
}

impl Rational {
    fn sub_ref(&self, o: &Rational) -> Rational {
        self.add_ref(&o.neg_ref())
    }
}

binop!(Add, add, add_ref, AddAssign, add_assign);
binop!(Sub, sub, sub_ref, SubAssign, sub_assign);
binop!(Mul, mul, mul_ref, MulAssign, mul_assign);
binop!(Div, div, div_ref, DivAssign, div_assign);

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_arithmetic_is_reduced() {
        let a = Rational::new(2, -4);
        assert_eq!(a, Rational::new(-1, 2));
        assert_eq!(a.to_string(), "-1/2");
        assert_eq!(&a + &Rational::new(1, 2), Rational::zero());
        assert_eq!(&a * &Rational::from(-2), Rational::one());
        assert_eq!(Rational::one() / Rational::new(3, 7), Rational::new(7, 3));
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::from(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(..)));
        let min = Rational::from(i64::MIN);
        assert_eq!(-(-&min), min);
        assert_eq!((&min - &min), Rational::zero());
    }

    #[test]
    fn agrees_with_big_rationals() {
        let vals = [(-7i64, 3i64), (5, 11), (i64::MAX, 2), (1, i64::MAX), (i64::MIN, 3), (0, 1)];
        for &(a, b) in &vals {
            for &(c, d) in &vals {
                let x = Rational::new(a, b);
                let y = Rational::new(c, d);
                let (bx, by) = (x.to_big(), y.to_big());
                assert_eq!((&x + &y).to_big(), &bx + &by);
                assert_eq!((&x - &y).to_big(), &bx - &by);
                assert_eq!((&x * &y).to_big(), &bx * &by);
                if !y.is_zero() {
                    assert_eq!((&x / &y).to_big(), &bx / &by);
                }
                assert_eq!(x.cmp(&y), bx.cmp(&by));
            }
        }
    }

    #[test]
    fn parses_fractions() {
        assert_eq!("-6/4".parse::<Rational>().unwrap(), Rational::new(-3, 2));
        assert_eq!(" 5 ".parse::<Rational>().unwrap(), Rational::from(5));
        assert!("1/0".parse::<Rational>().is_err());
        let huge: Rational = "123456789012345678901234567891/7".parse().unwrap();
        assert_eq!(huge.to_string(), "123456789012345678901234567891/7");
    }
}
