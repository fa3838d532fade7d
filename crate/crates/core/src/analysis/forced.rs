//! Vectors forced into every finite factor, and the closures they generate.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{SPAN, WINDOW};
use crate::construction::ConstructionSpec;
use crate::descendants::{core_sumset, pair_fraction_of};
use crate::error::Result;
use crate::lattice::{echelon, echelon_contains, Lattice};
use crate::verdict::Witness;
use crate::zvec::{ratio_json, ZVec};

/// Cap on the tile sumset whose differences become probes.
pub const PROBE_SET_CAP: usize = 400;
/// Cap on the sub-sumset used to bound pair fractions.
pub const PAIR_SET_CAP: usize = 60_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcedVector {
    pub vector: ZVec,
    pub m: usize,
    pub n: usize,
    #[serde(with = "ratio_json")]
    pub pair_fraction: BigRational,
    pub exact: bool,
}

impl ForcedVector {
    pub fn witness(&self) -> Witness {
        Witness::Forced {
            m: self.m,
            n: self.n,
            vector: self.vector.clone(),
            pair_fraction: self.pair_fraction.clone(),
            exact: self.exact,
        }
    }
}

fn probe_key(v: &ZVec) -> (BigInt, ZVec) {
    (v.l1(), v.clone())
}

/// Candidate vectors for `I_{m,n}`: positive differences inside the tile
/// sumset, step vectors of levels `m..n`, and `extra`, ordered by `(|v|_1, lex)`.
pub fn probes(spec: &ConstructionSpec, m: usize, n: usize, extra: &[ZVec]) -> Result<Vec<ZVec>> {
    let tiles = core_sumset(spec, m, n, PROBE_SET_CAP, true)?;
    let pts: Vec<&ZVec> = tiles.points.iter().collect();
    let mut out: HashSet<ZVec> = HashSet::new();
    for a in &pts {
        for b in &pts {
            let d = *a - *b;
            if d.is_positive() {
                out.insert(d);
            }
        }
    }
    for k in m..n {
        out.extend(spec.placements(k)?.step_vectors());
    }
    out.extend(extra.iter().filter(|v| !v.is_zero()).map(|v| if v.is_positive() { v.clone() } else { -v }));
    let mut v: Vec<ZVec> = out.into_iter().collect();
    v.sort_by_key(probe_key);
    Ok(v)
}

/// Probes with pair fraction at least `threshold` in `I_{m,n}` (exact when
/// the set is small, otherwise a lower bound from a sub-sumset).
pub fn forced_vectors(
    spec: &ConstructionSpec,
    m: usize,
    n: usize,
    threshold: &BigRational,
    extra: &[ZVec],
) -> Result<Vec<ForcedVector>> {
    let core = core_sumset(spec, m, n, PAIR_SET_CAP, false)?;
    let mut out = Vec::new();
    for v in probes(spec, m, n, extra)? {
        let pf = pair_fraction_of(&core.points, &v);
        if pf >= *threshold {
            out.push(ForcedVector { vector: v, m, n, pair_fraction: pf, exact: core.exact });
        }
    }
    Ok(out)
}

/// Union over `m < n <= m + SPAN` (as far as levels exist) of forced vectors,
/// keeping the first certificate found for each vector.
pub fn forced_at(
    spec: &ConstructionSpec,
    m: usize,
    threshold: &BigRational,
    extra: &[ZVec],
) -> Result<Vec<ForcedVector>> {
    let mut seen: BTreeMap<(BigInt, ZVec), ForcedVector> = BTreeMap::new();
    for n in m + 1..=m + SPAN {
        if !spec.has_level(n) {
            break;
        }
        for f in forced_vectors(spec, m, n, threshold, extra)? {
            seen.entry(probe_key(&f.vector)).or_insert(f);
        }
    }
    Ok(seen.into_values().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureWindow {
    /// Vectors forced at levels `m` and `m + 1`.
    pub m: usize,
    /// Echelon basis of the subgroup they generate.
    pub generators: Vec<ZVec>,
    pub lattice: Option<Lattice>,
}

impl ClosureWindow {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn contains(&self, v: &ZVec) -> bool {
        echelon_contains(&self.generators, v)
    }

    /// Least `k > 0` with `k u` in the window, if any.
    pub fn multiple_of(&self, u: &ZVec) -> Option<BigInt> {
        match &self.lattice {
            Some(l) => Some(l.order_of(u)),
            None => (1..=64i64).map(BigInt::from).find(|k| self.contains(&u.scale(k))),
        }
    }
}

/// Subgroups generated by forced vectors over sliding windows of levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcedClosure {
    pub windows: Vec<ClosureWindow>,
    /// The last two windows agree.
    pub stable: bool,
}

impl ForcedClosure {
    pub fn last(&self) -> Option<&ClosureWindow> {
        self.windows.last()
    }

    /// The last window's lattice when it is full rank and stable: every
    /// finite factor supported from level `N <= m` contains it.
    pub fn bounded(&self) -> Option<&Lattice> {
        self.last().filter(|_| self.stable).and_then(|w| w.lattice.as_ref())
    }

    pub fn witness(&self) -> Option<Witness> {
        let w = self.last()?;
        Some(Witness::Closure { m: w.m, lattice: w.lattice.clone()?, generators: w.generators.clone() })
    }
}

pub(crate) fn closure_from(
    dim: usize,
    forced: &BTreeMap<usize, Vec<ForcedVector>>,
    depth: usize,
) -> Result<ForcedClosure> {
    let mut windows = Vec::new();
    for m in 1..=depth.saturating_sub(WINDOW) {
        let gens: Vec<ZVec> =
            [m, m + 1].iter().flat_map(|k| forced.get(k).into_iter().flatten().map(|f| f.vector.clone())).collect();
        let basis = echelon(dim, &gens);
        let lattice = if basis.len() == dim { Some(Lattice::canonicalize(dim, &gens)?) } else { None };
        windows.push(ClosureWindow { m, generators: basis, lattice });
    }
    let stable = windows.len() >= 2 && windows[windows.len() - 1].generators == windows[windows.len() - 2].generators;
    Ok(ForcedClosure { windows, stable })
}

/// Closure windows `m = 1, ..., depth - 2` at threshold `2 eps`.
pub fn forced_closure(spec: &ConstructionSpec, depth: usize, eps: &BigRational) -> Result<ForcedClosure> {
    let threshold = eps * BigRational::from_integer(2.into());
    let mut forced = BTreeMap::new();
    for m in 1..depth {
        forced.insert(m, forced_at(spec, m, &threshold, &[])?);
    }
    closure_from(spec.dim(), &forced, depth)
}

/// A direction `u` with `k u` in each of the last two windows for one fixed
/// `k`: every factor supported early enough contains `k u`, so none is free.
pub fn free_obstruction(closure: &ForcedClosure, dim: usize) -> Option<Witness> {
    if closure.windows.len() < 2 {
        return None;
    }
    let tail = &closure.windows[closure.windows.len() - 2..];
    let mut dirs: Vec<ZVec> = (0..dim).map(|l| ZVec::unit(dim, l)).collect();
    for g in &tail[1].generators {
        let c = g.content();
        if !c.is_zero() {
            let p: ZVec = g.iter().map(|x| x / &c).collect();
            let p = if p.is_positive() { p } else { -&p };
            if !dirs.contains(&p) {
                dirs.push(p);
            }
        }
    }
    for u in dirs {
        let ks: Vec<Option<BigInt>> = tail.iter().map(|w| w.multiple_of(&u)).collect();
        if let [Some(a), Some(b)] = ks.as_slice() {
            if a == b && a.is_positive() {
                return Some(Witness::Direction {
                    direction: u,
                    multiple: a.clone(),
                    windows: tail.iter().map(|w| w.m).collect(),
                });
            }
        }
    }
    None
}
