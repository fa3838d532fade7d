//! Descendant sets `I_{m,n}`, exactly or as residue histograms.
//!
//! `I_{m,m} = {0}` and `I_{m,n+1} = I_{m,n} + I_{n,n+1}` as a disjoint
//! sumset, so `I_{m,n}` is the sum of the placement sets of levels
//! `m, ..., n - 1`. Counting modulo a lattice turns each sum into a
//! convolution over the quotient.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::construction::{ConstructionSpec, Factor};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, ResidueHistogram};
use crate::zvec::{ratio_json, ZVec};

pub const DEFAULT_CAP: usize = 1_000_000;

/// `I_{m,n}`, materialized or counted modulo a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DescendantView {
    Exact { m: usize, n: usize, points: Vec<ZVec> },
    Hist { m: usize, n: usize, histogram: ResidueHistogram },
}

impl DescendantView {
    pub fn len(&self) -> BigUint {
        match self {
            DescendantView::Exact { points, .. } => BigUint::from(points.len()),
            DescendantView::Hist { histogram, .. } => histogram.total().clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }
}

fn check_range(spec: &ConstructionSpec, m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::InvalidSpec(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    if !spec.has_level(n) {
        return Err(Error::LevelUnavailable { level: n, depth: spec.depth() });
    }
    Ok(())
}

/// `#I_{m,n} = prod_{k=m}^{n-1} #I_{k,k+1}`.
pub fn cardinality(spec: &ConstructionSpec, m: usize, n: usize) -> Result<BigUint> {
    check_range(spec, m, n)?;
    (m..n).try_fold(BigUint::one(), |acc, k| Ok(acc * spec.placements(k)?.len()))
}

/// `I_{m,n}` as a sorted list; fails with `CapExceeded` past `cap` points.
pub fn compose_exact(spec: &ConstructionSpec, m: usize, n: usize, cap: usize) -> Result<Vec<ZVec>> {
    let size = cardinality(spec, m, n)?;
    if size > BigUint::from(cap) {
        return Err(Error::CapExceeded { size: size.to_string(), cap });
    }
    let mut acc = vec![ZVec::zero(spec.dim())];
    for k in m..n {
        let p = spec.placements(k)?.enumerate(cap)?;
        let mut next = HashSet::with_capacity(acc.len() * p.len());
        for a in &acc {
            for q in &p {
                if !next.insert(a + q) {
                    return Err(Error::InvalidSpec(format!("descendants of level {m} collide at level {}", k + 1)));
                }
            }
        }
        acc = next.into_iter().collect();
    }
    acc.sort();
    Ok(acc)
}

/// Counts of `I_{m,n}` per coset of `g`.
pub fn compose_hist(spec: &ConstructionSpec, m: usize, n: usize, g: &Lattice) -> Result<ResidueHistogram> {
    check_range(spec, m, n)?;
    let mut h = ResidueHistogram::unit(g)?;
    for k in m..n {
        h = h.convolve(&spec.placements(k)?.histogram(g)?)?;
    }
    Ok(h)
}

/// A sub-sumset `A` of `I_{m,n}` with `I_{m,n} = A ⊕ B` for some `B`.
///
/// Summands (tiles and step progressions of each level) are added while the
/// set stays within `cap`; `exact` says whether all of them fit, in which
/// case `A = I_{m,n}`.
#[derive(Clone, Debug)]
pub struct CoreSumset {
    pub points: HashSet<ZVec>,
    pub exact: bool,
}

pub fn core_sumset(spec: &ConstructionSpec, m: usize, n: usize, cap: usize, tiles_only: bool) -> Result<CoreSumset> {
    check_range(spec, m, n)?;
    let mut acc: Vec<ZVec> = vec![ZVec::zero(spec.dim())];
    let mut exact = true;
    for k in m..n {
        for f in spec.placements(k)?.factors() {
            let size = f.len();
            let fits = !(tiles_only && matches!(f, Factor::Progression { .. }))
                && (size.clone() * BigUint::from(acc.len())) <= BigUint::from(cap);
            if !fits {
                exact = false;
                continue;
            }
            let el = f.elements();
            acc = acc.iter().flat_map(|a| el.iter().map(move |e| a + e)).collect();
        }
    }
    let points: HashSet<ZVec> = acc.iter().cloned().collect();
    if points.len() != acc.len() {
        return Err(Error::InvalidSpec(format!("descendants I_{{{m},{n}}} are not a disjoint sumset")));
    }
    Ok(CoreSumset { points, exact })
}

/// Directed pair fraction `#{i in A : i + v in A} / #A`.
pub fn pair_fraction_of(set: &HashSet<ZVec>, v: &ZVec) -> BigRational {
    let hits = set.iter().filter(|i| set.contains(&(*i + v))).count();
    BigRational::new(BigInt::from(hits), BigInt::from(set.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairFraction {
    #[serde(with = "ratio_json")]
    pub value: BigRational,
    /// `false` when `value` is only a lower bound.
    pub exact: bool,
}

/// `#{i in I_{m,n} : i + v in I_{m,n}} / #I_{m,n}`, exactly.
pub fn pair_fraction(spec: &ConstructionSpec, m: usize, n: usize, v: &ZVec, cap: usize) -> Result<BigRational> {
    let size = cardinality(spec, m, n)?;
    if size > BigUint::from(cap) {
        return Err(Error::CapExceeded { size: size.to_string(), cap });
    }
    let core = core_sumset(spec, m, n, cap, false)?;
    debug_assert!(core.exact);
    Ok(pair_fraction_of(&core.points, v))
}

/// Exact pair fraction when `I_{m,n}` fits in `cap`, otherwise a lower bound.
///
/// If `I = A ⊕ B` then `I` is a disjoint union of translates `A + b`, and
/// pairs inside each translate are pairs of `I`, so the pair fraction of `A`
/// bounds that of `I` from below.
pub fn pair_fraction_bound(spec: &ConstructionSpec, m: usize, n: usize, v: &ZVec, cap: usize) -> Result<PairFraction> {
    let core = core_sumset(spec, m, n, cap, false)?;
    Ok(PairFraction { value: pair_fraction_of(&core.points, v), exact: core.exact })
}

/// `I_{m,n}` as one of the two views, picking exact mode when it fits.
pub fn view(spec: &ConstructionSpec, m: usize, n: usize, g: Option<&Lattice>, cap: usize) -> Result<DescendantView> {
    match g {
        Some(g) => Ok(DescendantView::Hist { m, n, histogram: compose_hist(spec, m, n, g)? }),
        None => Ok(DescendantView::Exact { m, n, points: compose_exact(spec, m, n, cap)? }),
    }
}

/// Cardinality as `u64` when it fits, for display.
pub fn small_cardinality(spec: &ConstructionSpec, m: usize, n: usize) -> Option<u64> {
    cardinality(spec, m, n).ok()?.to_u64()
}
