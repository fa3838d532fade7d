use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, ResidueHistogram};
use crate::zvec::{bigint_json, ZVec};

/// `count` translates along `axis`, `stride` apart, starting at 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub axis: usize,
    #[serde(with = "bigint_json")]
    pub stride: BigInt,
    #[serde(with = "biguint_json")]
    pub count: BigUint,
}

/// The offsets `I_{n,n+1}` of copies of tower `n` inside tower `n + 1`.
///
/// Stored as a finite tile plus axis-aligned arithmetic progressions on
/// distinct axes:
/// `{ t + sum_i k_i stride_i e_{axis_i} : t in tile, 0 <= k_i < count_i }`.
/// With no steps this is just the explicit list `tile`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Placements {
    tile: Vec<ZVec>,
    steps: Vec<Step>,
}

/// One summand of a placement set viewed as a sumset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Tile(Vec<ZVec>),
    Progression { step: ZVec, count: BigUint },
}

impl Factor {
    pub fn len(&self) -> BigUint {
        match self {
            Factor::Tile(t) => BigUint::from(t.len()),
            Factor::Progression { count, .. } => count.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    /// Elements of the factor; only call when [`len`](Self::len) is small.
    pub fn elements(&self) -> Vec<ZVec> {
        match self {
            Factor::Tile(t) => t.clone(),
            Factor::Progression { step, count } => {
                let c = count.to_u64().expect("small factor");
                (0..c).map(|k| step.scale(&BigInt::from(k))).collect()
            }
        }
    }
}

impl Placements {
    pub fn new(mut tile: Vec<ZVec>, steps: Vec<Step>) -> Result<Self> {
        let dim =
            tile.first().map(|t| t.dim()).ok_or_else(|| Error::InvalidSpec("placement set must be nonempty".into()))?;
        if let Some(t) = tile.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
        }
        let mut axes = BTreeSet::new();
        for s in &steps {
            if s.axis >= dim {
                return Err(Error::InvalidSpec(format!("step axis {} out of range for dimension {dim}", s.axis)));
            }
            if !axes.insert(s.axis) {
                return Err(Error::InvalidSpec(format!("two steps share axis {}", s.axis)));
            }
            if s.count.is_zero() {
                return Err(Error::InvalidSpec("step count must be positive".into()));
            }
        }
        tile.sort();
        let mut steps = steps;
        steps.sort_by_key(|s| s.axis);
        Ok(Placements { tile, steps })
    }

    pub fn explicit(points: Vec<ZVec>) -> Result<Self> {
        Self::new(points, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.tile[0].dim()
    }

    pub fn tile(&self) -> &[ZVec] {
        &self.tile
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn step_on(&self, axis: usize) -> Option<&Step> {
        self.steps.iter().find(|s| s.axis == axis)
    }

    /// Number of placements, assuming they are distinct.
    pub fn len(&self) -> BigUint {
        self.steps.iter().fold(BigUint::from(self.tile.len()), |acc, s| acc * &s.count)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The set as a sumset: the tile first, then one progression per step.
    pub fn factors(&self) -> Vec<Factor> {
        let d = self.dim();
        let mut out = vec![Factor::Tile(self.tile.clone())];
        for s in &self.steps {
            if s.count.is_one() {
                continue;
            }
            let mut step = ZVec::zero(d);
            step[s.axis] = s.stride.clone();
            out.push(Factor::Progression { step, count: s.count.clone() });
        }
        out
    }

    /// Translation vectors of the steps, `stride * e_axis`.
    pub fn step_vectors(&self) -> Vec<ZVec> {
        self.factors()
            .into_iter()
            .filter_map(|f| match f {
                Factor::Progression { step, .. } => Some(step),
                Factor::Tile(_) => None,
            })
            .collect()
    }

    pub fn enumerate(&self, cap: usize) -> Result<Vec<ZVec>> {
        let size = self.len();
        if size > BigUint::from(cap) {
            return Err(Error::CapExceeded { size: size.to_string(), cap });
        }
        let mut acc = self.tile.clone();
        for f in self.factors().into_iter().skip(1) {
            let el = f.elements();
            acc = acc.iter().flat_map(|a| el.iter().map(move |e| a + e)).collect();
        }
        acc.sort();
        Ok(acc)
    }

    /// Per-coset counts of the placements modulo `lattice`, without enumerating.
    pub fn histogram(&self, lattice: &Lattice) -> Result<ResidueHistogram> {
        let mut h = ResidueHistogram::from_points(lattice, &self.tile)?;
        for f in self.factors().into_iter().skip(1) {
            if let Factor::Progression { step, count } = f {
                let p = ResidueHistogram::progression(lattice, &ZVec::zero(self.dim()), &step, &count)?;
                h = h.convolve(&p)?;
            }
        }
        Ok(h)
    }

    /// Coordinatewise minimum and maximum over all placements.
    pub fn bounds(&self) -> (ZVec, ZVec) {
        let d = self.dim();
        let mut lo: ZVec = (0..d).map(|l| self.tile.iter().map(|t| t[l].clone()).min().unwrap()).collect();
        let mut hi: ZVec = (0..d).map(|l| self.tile.iter().map(|t| t[l].clone()).max().unwrap()).collect();
        for s in &self.steps {
            let span = &s.stride * BigInt::from(&s.count - 1u8);
            if span.is_negative() {
                lo[s.axis] += span;
            } else {
                hi[s.axis] += span;
            }
        }
        (lo, hi)
    }

    /// The placement `tile[i] + sum_a k[a] stride_a e_a`, where `k` is indexed
    /// like [`steps`](Self::steps).
    pub fn placement(&self, i: usize, k: &[BigInt]) -> ZVec {
        let mut p = self.tile[i].clone();
        for (s, k) in self.steps.iter().zip(k) {
            p[s.axis] += &s.stride * k;
        }
        p
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Structured {
    tile: Vec<ZVec>,
    #[serde(default)]
    steps: Vec<Step>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PlacementsJson {
    List(Vec<ZVec>),
    Structured(Structured),
}

impl Serialize for Placements {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.steps.is_empty() {
            self.tile.serialize(s)
        } else {
            Structured { tile: self.tile.clone(), steps: self.steps.clone() }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Placements {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PlacementsJson::deserialize(d)? {
            PlacementsJson::List(p) => Placements::explicit(p),
            PlacementsJson::Structured(s) => Placements::new(s.tile, s.steps),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "biguint_json")]` for nonnegative counts.
pub mod biguint_json {
    use num_bigint::{BigInt, BigUint, Sign};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        crate::zvec::bigint_json::serialize(&BigInt::from(x.clone()), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let x = crate::zvec::bigint_json::deserialize(d)?;
        match x.sign() {
            Sign::Minus => Err(serde::de::Error::custom("count must be nonnegative")),
            _ => Ok(x.magnitude().clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(xs: &[i64]) -> ZVec {
        ZVec::from_i64s(xs)
    }

    fn staggered_like() -> Placements {
        Placements::new(
            vec![z(&[0, 0]), z(&[1, 2])],
            vec![Step { axis: 0, stride: BigInt::from(2), count: BigUint::from(7u8) }],
        )
        .unwrap()
    }

    #[test]
    fn symbolic_and_explicit_agree() {
        let p = staggered_like();
        assert_eq!(p.len(), BigUint::from(14u8));
        let pts = p.enumerate(100).unwrap();
        assert_eq!(pts.len(), 14);
        assert!(pts.contains(&z(&[13, 2])));
        assert_eq!(p.bounds(), (z(&[0, 0]), z(&[13, 2])));
        let l = Lattice::diagonal_i64(&[4, 2]);
        assert_eq!(p.histogram(&l).unwrap(), ResidueHistogram::from_points(&l, &pts).unwrap());
    }

    #[test]
    fn json_forms() {
        let p = staggered_like();
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"{"tile":[[0,0],[1,2]],"steps":[{"axis":0,"stride":2,"count":7}]}"#);
        let back: Placements = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
        let plain: Placements = serde_json::from_str("[[0],[4],[9]]").unwrap();
        assert_eq!(serde_json::to_string(&plain).unwrap(), "[[0],[4],[9]]");
        assert!(serde_json::from_str::<Placements>("[]").is_err());
    }

    #[test]
    fn duplicate_axes_rejected() {
        let s = Step { axis: 0, stride: BigInt::one(), count: BigUint::one() };
        assert!(Placements::new(vec![z(&[0])], vec![s.clone(), s]).is_err());
    }
}
