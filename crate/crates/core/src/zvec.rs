//! Integer vectors in `Z^d` and exact rationals, with the JSON encodings used
//! by every file format in the crate.
//!
//! Integers are serialized as JSON numbers when they fit in an `i64` and as
//! decimal strings otherwise. Rationals are always strings of the form `"p/q"`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A vector of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZVec(pub Vec<BigInt>);

impl ZVec {
    pub fn zero(dim: usize) -> Self {
        ZVec(vec![BigInt::zero(); dim])
    }

    /// The standard basis vector `e_axis` (0-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zero(dim);
        v.0[axis] = BigInt::one();
        v
    }

    pub fn from_i64s(xs: &[i64]) -> Self {
        ZVec(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigInt> {
        self.0.iter()
    }

    pub fn scale(&self, k: &BigInt) -> ZVec {
        ZVec(self.0.iter().map(|x| x * k).collect())
    }

    /// Sum of absolute values of the coordinates.
    pub fn l1(&self) -> BigInt {
        self.0.iter().map(|x| x.abs()).sum()
    }

    /// True when the first nonzero coordinate is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|x| !x.is_zero()).map(|x| x.is_positive()).unwrap_or(false)
    }

    /// Gcd of the coordinates (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        use num_integer::Integer;
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|x| x.to_i64()).collect()
    }
}

impl Index<usize> for ZVec {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl IndexMut<usize> for ZVec {
    fn index_mut(&mut self, i: usize) -> &mut BigInt {
        &mut self.0[i]
    }
}

impl<'a> Add<&'a ZVec> for &'a ZVec {
    type Output = ZVec;
    fn add(self, rhs: &ZVec) -> ZVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        ZVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a ZVec> for &'a ZVec {
    type Output = ZVec;
    fn sub(self, rhs: &ZVec) -> ZVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        ZVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for ZVec {
    type Output = ZVec;
    fn add(self, rhs: ZVec) -> ZVec {
        &self + &rhs
    }
}

impl Sub for ZVec {
    type Output = ZVec;
    fn sub(self, rhs: ZVec) -> ZVec {
        &self - &rhs
    }
}

impl Neg for &ZVec {
    type Output = ZVec;
    fn neg(self) -> ZVec {
        ZVec(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for ZVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<BigInt>> for ZVec {
    fn from(v: Vec<BigInt>) -> Self {
        ZVec(v)
    }
}

impl FromIterator<BigInt> for ZVec {
    fn from_iter<I: IntoIterator<Item = BigInt>>(iter: I) -> Self {
        ZVec(iter.into_iter().collect())
    }
}

impl Serialize for ZVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for x in &self.0 {
            seq.serialize_element(&IntRepr(x))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ZVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<IntIn> = Vec::deserialize(d)?;
        Ok(ZVec(raw.into_iter().map(|x| x.0).collect()))
    }
}

struct IntRepr<'a>(&'a BigInt);

impl Serialize for IntRepr<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(x) => s.serialize_i64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

/// Deserialization shim accepting a JSON integer or a decimal string.
struct IntIn(BigInt);

impl<'de> Deserialize<'de> for IntIn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            I(i64),
            U(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::I(x) => Ok(IntIn(BigInt::from(x))),
            Raw::U(x) => Ok(IntIn(BigInt::from(x))),
            Raw::S(s) => {
                s.trim().parse::<BigInt>().map(IntIn).map_err(|_| de::Error::custom(format!("not an integer: {s:?}")))
            }
        }
    }
}

/// `#[serde(with = "bigint_json")]` for single `BigInt` fields.
pub mod bigint_json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        IntRepr(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        IntIn::deserialize(d).map(|x| x.0)
    }
}

/// `#[serde(with = "ratio_json")]` for `BigRational` fields, encoded as `"p/q"`.
pub mod ratio_json {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_ratio(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_ratio(&raw).ok_or_else(|| de::Error::custom(format!("not a rational: {raw:?}")))
    }
}

/// Renders a rational as `"p/q"`, always with an explicit denominator.
pub fn fmt_ratio(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"p/q"` or `"p"`; rejects zero denominators.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
