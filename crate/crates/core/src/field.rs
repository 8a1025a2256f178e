//! Exact coefficient fields: the rationals and prime fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Descriptor of the coefficient field of a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    /// Residues modulo a prime `p`.
    Prime(u64),
}

impl Field {
    /// Builds a prime field, rejecting composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Field> {
        if p < 2 || p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not a supported prime modulus")));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(Rat::Small(v, 1)),
            Field::Prime(p) => Scalar::Prime { value: v.rem_euclid(p as i64) as u64, modulus: p },
        }
    }

    /// Maps `num/den` into the field; fails when `den` vanishes in the field.
    pub fn from_ratio(self, num: &BigInt, den: &BigInt) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        match self {
            Field::Rational => Ok(Scalar::Rational(Rat::from_big(BigRational::new(
                num.clone(),
                den.clone(),
            )))),
            Field::Prime(p) => {
                let pb = BigInt::from(p);
                let n = num.mod_floor(&pb).to_u64().unwrap();
                let d = den.mod_floor(&pb).to_u64().unwrap();
                let d = Scalar::Prime { value: d, modulus: p };
                let inv = d
                    .inv()
                    .ok_or_else(|| Error::Domain(format!("denominator vanishes modulo {p}")))?;
                Ok(&Scalar::Prime { value: n, modulus: p } * &inv)
            }
        }
    }

    pub fn characteristic(self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => p,
        }
    }

    /// All field elements, for finite fields only.
    pub fn elements(self) -> Option<Vec<Scalar>> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some((0..p).map(|v| Scalar::Prime { value: v, modulus: p }).collect()),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "Fp {p}"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A rational number in lowest terms with positive denominator. Values that
/// fit in machine words stay unboxed.
#[derive(Clone, Debug)]
pub enum Rat {
    Small(i64, i64),
    Big(BigRational),
}

impl Rat {
    fn from_big(r: BigRational) -> Rat {
        if let (Some(n), Some(d)) = (r.numer().to_i64(), r.denom().to_i64()) {
            if n != i64::MIN && d != i64::MIN {
                return Rat::Small(n, d);
            }
        }
        Rat::Big(r)
    }

    fn from_i128(n: i128, d: i128) -> Rat {
        let g = n.gcd(&d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) if a != i64::MIN => Rat::Small(a, b),
            _ => Rat::Big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(r) => r.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n == 0,
            Rat::Big(r) => r.is_zero(),
        }
    }

    fn add(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, o) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if let (Some(x), Some(y)) = (a.checked_mul(d), c.checked_mul(b)) {
                if let Some(n) = x.checked_add(y) {
                    return Rat::from_i128(n, b * d);
                }
            }
        }
        Rat::from_big(self.to_big() + o.to_big())
    }

    fn mul(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, o) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            return Rat::from_i128(a * c, b * d);
        }
        Rat::from_big(self.to_big() * o.to_big())
    }

    fn neg(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::Small(-n, *d),
            Rat::Big(r) => Rat::from_big(-r),
        }
    }

    fn inv(&self) -> Option<Rat> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(r) => Rat::from_big(r.recip()),
        })
    }
}

impl PartialEq for Rat {
    fn eq(&self, o: &Rat) -> bool {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            // normalization keeps small values unboxed, so mixed forms differ
            (Rat::Big(a), Rat::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl std::hash::Hash for Rat {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Rat::Small(n, d) => {
                n.hash(state);
                d.hash(state);
            }
            Rat::Big(r) => r.hash(state),
        }
    }
}

/// An exact field element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rat),
    Prime { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Prime { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(Rat::Small(1, 1)) => true,
            Scalar::Rational(_) => false,
            Scalar::Prime { value, .. } => *value == 1,
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(r) => r.inv().map(Scalar::Rational),
            Scalar::Prime { value, modulus } => {
                if *value == 0 {
                    return None;
                }
                // Fermat inversion
                Some(Scalar::Prime { value: pow_mod(*value, modulus - 2, *modulus), modulus: *modulus })
            }
        }
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// The rational value, when this is a rational scalar.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rational(r) => Some(r.to_big()),
            Scalar::Prime { .. } => None,
        }
    }

    /// True when the printed form needs a leading minus sign.
    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Rational(Rat::Small(n, _)) => *n < 0,
            Scalar::Rational(Rat::Big(r)) => r.is_negative(),
            Scalar::Prime { .. } => false,
        }
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn field_mismatch(a: &Scalar, b: &Scalar) -> ! {
    panic!("scalar field mismatch: {} vs {}", a.field(), b.field())
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a.add(b)),
            (Scalar::Prime { value: a, modulus: p }, Scalar::Prime { value: b, modulus: q }) if p == q => {
                Scalar::Prime { value: (a + b) % p, modulus: *p }
            }
            _ => field_mismatch(self, o),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a.mul(b)),
            (Scalar::Prime { value: a, modulus: p }, Scalar::Prime { value: b, modulus: q }) if p == q => {
                Scalar::Prime { value: ((*a as u128 * *b as u128) % *p as u128) as u64, modulus: *p }
            }
            _ => field_mismatch(self, o),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(a.neg()),
            Scalar::Prime { value, modulus } => Scalar::Prime { value: (modulus - value) % modulus, modulus: *modulus },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(Rat::Small(n, 1)) => write!(f, "{n}"),
            Scalar::Rational(Rat::Small(n, d)) => write!(f, "{n}/{d}"),
            Scalar::Rational(Rat::Big(r)) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_reduced() {
        let q = Field::Rational;
        let a = q.from_ratio(&BigInt::from(6), &BigInt::from(-4)).unwrap();
        assert_eq!(a.to_string(), "-3/2");
        let b = &a + &q.from_ratio(&BigInt::from(3), &BigInt::from(2)).unwrap();
        assert!(b.is_zero());
        assert_eq!(b, q.zero());
    }

    #[test]
    fn small_overflow_promotes_and_demotes() {
        let q = Field::Rational;
        let big = q.from_i64(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq, Scalar::Rational(Rat::Big(_))));
        let back = &sq * &big.inv().unwrap();
        assert_eq!(back, big);
    }

    #[test]
    fn prime_field_inverse() {
        let f = Field::prime(7).unwrap();
        for v in 1..7 {
            let a = f.from_i64(v);
            assert!((&a * &a.inv().unwrap()).is_one());
        }
        assert!(f.zero().inv().is_none());
        assert!(Field::prime(9).is_err());
    }

    #[test]
    fn ratio_into_prime_field() {
        let f = Field::prime(5).unwrap();
        let half = f.from_ratio(&BigInt::from(1), &BigInt::from(2)).unwrap();
        assert_eq!(half, f.from_i64(3));
        assert!(f.from_ratio(&BigInt::from(1), &BigInt::from(10)).is_err());
    }
}
