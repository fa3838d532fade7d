use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::zvec::ZVec;

/// A tower shape: a box `prod_l [0, extent_l)` or an explicit point set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShapeSpec {
    Rect(Vec<BigInt>),
    /// Sorted, deduplicated, contains the origin.
    Points(Vec<ZVec>),
}

impl ShapeSpec {
    pub fn rect(extents: Vec<BigInt>) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::InvalidSpec("rectangle needs at least one extent".into()));
        }
        if let Some(e) = extents.iter().find(|e| !e.is_positive()) {
            return Err(Error::InvalidSpec(format!("rectangle extent {e} is not positive")));
        }
        Ok(ShapeSpec::Rect(extents))
    }

    /// Panics on non-positive extents; intended for literals.
    pub fn rect_i64(extents: &[i64]) -> Self {
        Self::rect(extents.iter().map(|&e| BigInt::from(e)).collect()).expect("positive extents")
    }

    pub fn points(points: Vec<ZVec>) -> Result<Self> {
        let dim = points.first().map(|p| p.dim()).ok_or_else(|| Error::InvalidSpec("shape must be nonempty".into()))?;
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        let set: BTreeSet<ZVec> = points.into_iter().collect();
        if !set.contains(&ZVec::zero(dim)) {
            return Err(Error::InvalidSpec("shape must contain the origin".into()));
        }
        Ok(ShapeSpec::Points(set.into_iter().collect()))
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeSpec::Rect(e) => e.len(),
            ShapeSpec::Points(p) => p[0].dim(),
        }
    }

    pub fn cardinality(&self) -> BigUint {
        match self {
            ShapeSpec::Rect(e) => e.iter().map(|x| x.magnitude().clone()).product(),
            ShapeSpec::Points(p) => BigUint::from(p.len()),
        }
    }

    pub fn contains(&self, v: &ZVec) -> bool {
        match self {
            ShapeSpec::Rect(e) => v.iter().zip(e).all(|(x, e)| !x.is_negative() && x < e),
            ShapeSpec::Points(p) => p.binary_search(v).is_ok(),
        }
    }

    /// Coordinatewise minimum and maximum (both inclusive).
    pub fn bounds(&self) -> (ZVec, ZVec) {
        match self {
            ShapeSpec::Rect(e) => (ZVec::zero(e.len()), e.iter().map(|x| x - 1).collect()),
            ShapeSpec::Points(p) => {
                let d = p[0].dim();
                let lo = (0..d).map(|l| p.iter().map(|v| v[l].clone()).min().unwrap()).collect();
                let hi = (0..d).map(|l| p.iter().map(|v| v[l].clone()).max().unwrap()).collect();
                (lo, hi)
            }
        }
    }

    /// The points of the shape, in lexicographic order.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<ZVec>> {
        match self {
            ShapeSpec::Points(p) => Ok(p.clone()),
            ShapeSpec::Rect(e) => {
                let size = self.cardinality();
                if size > BigUint::from(cap) {
                    return Err(Error::CapExceeded { size: size.to_string(), cap });
                }
                let ext: Vec<i64> = e.iter().map(|x| x.to_i64().expect("below cap")).collect();
                let mut out = Vec::with_capacity(size.to_usize().unwrap_or(0));
                let mut cur = vec![0i64; ext.len()];
                loop {
                    out.push(ZVec::from_i64s(&cur));
                    let mut l = ext.len();
                    loop {
                        if l == 0 {
                            return Ok(out);
                        }
                        l -= 1;
                        cur[l] += 1;
                        if cur[l] < ext[l] {
                            break;
                        }
                        cur[l] = 0;
                    }
                }
            }
        }
    }

    pub fn is_rect(&self) -> bool {
        matches!(self, ShapeSpec::Rect(_))
    }

    /// `#(F ∩ (F + v))`.
    pub fn overlap_with_shift(&self, v: &ZVec) -> BigUint {
        match self {
            ShapeSpec::Rect(e) => {
                let mut prod = BigUint::one();
                for (x, e) in v.iter().zip(e) {
                    let w = e - x.abs();
                    if !w.is_positive() {
                        return BigUint::zero();
                    }
                    prod *= w.magnitude();
                }
                prod
            }
            ShapeSpec::Points(p) => BigUint::from(p.iter().filter(|x| self.contains(&(*x - v))).count()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum ShapeJson {
    Rect(ZVec),
    Points(Vec<ZVec>),
}

impl Serialize for ShapeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ShapeSpec::Rect(e) => ShapeJson::Rect(ZVec(e.clone())).serialize(s),
            ShapeSpec::Points(p) => ShapeJson::Points(p.clone()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ShapeSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ShapeJson::deserialize(d)? {
            ShapeJson::Rect(e) => ShapeSpec::rect(e.0),
            ShapeJson::Points(p) => ShapeSpec::points(p),
        }
        .map_err(serde::de::Error::custom)
    }
}
