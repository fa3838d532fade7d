use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{ConstructionSpec, Placements, ShapeSpec};
use crate::zvec::ZVec;

const MAX_PER_LEVEL: usize = 16;
const ENUM_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// Two placed copies of the previous tower share a point.
    Overlap,
    /// A placed copy leaves the shape of its level.
    Outside,
    /// The level is too large to check with the available methods.
    Unverifiable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// The level whose placements are at fault (`n + 1` for `I_{n,n+1}`).
    pub level: usize,
    pub kind: ViolationKind,
    pub placements: Vec<ZVec>,
    pub point: Option<ZVec>,
    pub message: String,
}

/// Lists every way the stored levels fail to be a stacking construction:
/// copies `F_n + p` must be pairwise disjoint and lie inside `F_{n+1}`.
pub fn validate(spec: &ConstructionSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for n in 1..spec.depth() {
        let inner = &spec.levels()[n - 1].shape;
        let outer = &spec.levels()[n].shape;
        let p = spec.levels()[n].placements.as_ref().expect("checked at construction");
        let level = n + 1;
        out.extend(containment(level, inner, outer, p));
        out.extend(overlaps(level, inner, p));
    }
    out
}

fn containment(level: usize, inner: &ShapeSpec, outer: &ShapeSpec, p: &Placements) -> Vec<Violation> {
    match outer {
        ShapeSpec::Rect(ext) => {
            let (flo, fhi) = inner.bounds();
            let mut out = Vec::new();
            for l in 0..ext.len() {
                // Extreme placements along axis l.
                let (ti_lo, ti_hi) = extreme_tiles(p, l);
                let low = extreme_placement(p, ti_lo, l, false);
                let high = extreme_placement(p, ti_hi, l, true);
                if (&low[l] + &flo[l]).is_negative() {
                    let mut point = low.clone();
                    point[l] = &low[l] + &flo[l];
                    out.push(outside(level, low.clone(), point, l));
                }
                if &high[l] + &fhi[l] >= ext[l] {
                    let mut point = high.clone();
                    point[l] = &high[l] + &fhi[l];
                    out.push(outside(level, high.clone(), point, l));
                }
                if out.len() >= MAX_PER_LEVEL {
                    break;
                }
            }
            out
        }
        ShapeSpec::Points(_) => {
            let (pts, fpts) = match (p.enumerate(ENUM_CAP), inner.enumerate(ENUM_CAP)) {
                (Ok(a), Ok(b)) if a.len().saturating_mul(b.len()) <= ENUM_CAP => (a, b),
                _ => {
                    return vec![Violation {
                        level,
                        kind: ViolationKind::Unverifiable,
                        placements: vec![],
                        point: None,
                        message: "point-set shape with too many placed points to check containment".into(),
                    }]
                }
            };
            let mut out = Vec::new();
            for q in &pts {
                if let Some(f) = fpts.iter().find(|f| !outer.contains(&(q + *f))) {
                    out.push(Violation {
                        level,
                        kind: ViolationKind::Outside,
                        placements: vec![q.clone()],
                        point: Some(q + f),
                        message: format!("copy at {q} contains {} outside the shape", q + f),
                    });
                    if out.len() >= MAX_PER_LEVEL {
                        break;
                    }
                }
            }
            out
        }
    }
}

fn outside(level: usize, placement: ZVec, point: ZVec, axis: usize) -> Violation {
    Violation {
        level,
        kind: ViolationKind::Outside,
        message: format!("copy at {placement} reaches {point}, outside the shape along axis {}", axis + 1),
        placements: vec![placement],
        point: Some(point),
    }
}

fn extreme_tiles(p: &Placements, l: usize) -> (usize, usize) {
    let t = p.tile();
    let lo = (0..t.len()).min_by(|&a, &b| t[a][l].cmp(&t[b][l])).unwrap();
    let hi = (0..t.len()).max_by(|&a, &b| t[a][l].cmp(&t[b][l])).unwrap();
    (lo, hi)
}

/// Placement from tile `i` pushed to the low or high end along axis `l`.
fn extreme_placement(p: &Placements, i: usize, l: usize, high: bool) -> ZVec {
    let k: Vec<BigInt> = p
        .steps()
        .iter()
        .map(|s| {
            let last = BigInt::from(&s.count - 1u8);
            let forward = s.stride.is_positive();
            if s.axis == l && (high == forward) {
                last
            } else {
                BigInt::zero()
            }
        })
        .collect();
    p.placement(i, &k)
}

/// Integer `delta` in `[-(c-1), c-1]` with `delta * s` in `(lo, hi)` (open),
/// returned as an inclusive range, or `None`.
fn feasible(s: &BigInt, count_minus_one: &BigInt, lo: &BigInt, hi: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut a, mut b) = if s.is_zero() {
        if lo.is_negative() && hi.is_positive() {
            (-count_minus_one.clone(), count_minus_one.clone())
        } else {
            return None;
        }
    } else {
        let (s, lo, hi) = if s.is_negative() { (-s, -hi, -lo) } else { (s.clone(), lo.clone(), hi.clone()) };
        (lo.div_floor(&s) + 1, (hi - 1u8).div_floor(&s))
    };
    a = a.max(-count_minus_one.clone());
    b = b.min(count_minus_one.clone());
    (a <= b).then_some((a, b))
}

fn pick(range: &(BigInt, BigInt), nonzero: bool) -> Option<BigInt> {
    let (a, b) = range;
    let zero = BigInt::zero();
    if !nonzero && *a <= zero && zero <= *b {
        return Some(zero);
    }
    if *b >= BigInt::one() {
        return Some(a.max(&BigInt::one()).clone());
    }
    if *a <= -BigInt::one() {
        return Some(b.min(&-BigInt::one()).clone());
    }
    None
}

/// Copies `F + p` and `F + q` meet iff `p - q` lies in the difference set
/// `F - F`; with placements `t + sum k_a s_a e_a` this splits per axis.
fn overlaps(level: usize, inner: &ShapeSpec, p: &Placements) -> Vec<Violation> {
    let d = p.dim();
    let tile = p.tile();
    let step_of: Vec<Option<(BigInt, BigInt)>> =
        (0..d).map(|l| p.step_on(l).map(|s| (s.stride.clone(), BigInt::from(&s.count - 1u8)))).collect();
    let mut out = Vec::new();

    // Difference set with one realizing pair, for point shapes.
    let diffs: Option<HashMap<ZVec, (ZVec, ZVec)>> = match inner {
        ShapeSpec::Rect(_) => None,
        ShapeSpec::Points(pts) => {
            let mut m = HashMap::new();
            for f in pts {
                for g in pts {
                    m.entry(f - g).or_insert_with(|| (f.clone(), g.clone()));
                }
            }
            Some(m)
        }
    };

    for i in 0..tile.len() {
        for j in i..tile.len() {
            let dt = &tile[i] - &tile[j];
            let found = match (inner, &diffs) {
                (ShapeSpec::Rect(ext), _) => rect_overlap(&dt, ext, &step_of, i == j),
                (ShapeSpec::Points(_), Some(diffs)) => point_overlap(&dt, diffs, &step_of, i == j),
                _ => unreachable!(),
            };
            if let Some((delta, point_offset)) = found {
                let kp: Vec<BigInt> = p.steps().iter().map(|s| delta[s.axis].clone().max(BigInt::zero())).collect();
                let kq: Vec<BigInt> = p.steps().iter().map(|s| (-&delta[s.axis]).max(BigInt::zero())).collect();
                let a = p.placement(i, &kp);
                let b = p.placement(j, &kq);
                let point = match point_offset {
                    Some(f) => &a + &f,
                    None => (0..d).map(|l| a[l].clone().max(b[l].clone())).collect(),
                };
                out.push(Violation {
                    level,
                    kind: ViolationKind::Overlap,
                    message: format!("copies at {a} and {b} overlap at {point}"),
                    placements: vec![a, b],
                    point: Some(point),
                });
                if out.len() >= MAX_PER_LEVEL {
                    return out;
                }
            }
        }
    }
    out
}

type StepInfo = [Option<(BigInt, BigInt)>];

fn rect_overlap(dt: &ZVec, ext: &[BigInt], steps: &StepInfo, same_tile: bool) -> Option<(Vec<BigInt>, Option<ZVec>)> {
    let d = dt.dim();
    let mut ranges = Vec::with_capacity(d);
    for l in 0..d {
        let lo = -&ext[l] - &dt[l];
        let hi = &ext[l] - &dt[l];
        let r = match &steps[l] {
            Some((s, c)) => feasible(s, c, &lo, &hi)?,
            None => {
                if lo.is_negative() && hi.is_positive() {
                    (BigInt::zero(), BigInt::zero())
                } else {
                    return None;
                }
            }
        };
        ranges.push(r);
    }
    let mut delta: Vec<BigInt> = ranges.iter().map(|r| pick(r, false).expect("nonempty")).collect();
    if same_tile {
        let l = (0..d).find(|&l| pick(&ranges[l], true).is_some())?;
        delta[l] = pick(&ranges[l], true).unwrap();
    }
    Some((delta, None))
}

fn point_overlap(
    dt: &ZVec,
    diffs: &HashMap<ZVec, (ZVec, ZVec)>,
    steps: &StepInfo,
    same_tile: bool,
) -> Option<(Vec<BigInt>, Option<ZVec>)> {
    let d = dt.dim();
    let mut keys: Vec<&ZVec> = diffs.keys().collect();
    keys.sort();
    'outer: for key in keys {
        let need = key - dt;
        let mut delta = vec![BigInt::zero(); d];
        for l in 0..d {
            match &steps[l] {
                Some((s, c)) if s.is_zero() => {
                    if !need[l].is_zero() {
                        continue 'outer;
                    }
                    if same_tile && !c.is_zero() && delta.iter().all(Zero::is_zero) {
                        delta[l] = BigInt::one();
                    }
                }
                Some((s, c)) => {
                    let (q, r) = need[l].div_rem(s);
                    if !r.is_zero() || q.abs() > *c {
                        continue 'outer;
                    }
                    delta[l] = q;
                }
                None => {
                    if !need[l].is_zero() {
                        continue 'outer;
                    }
                }
            }
        }
        if same_tile && delta.iter().all(Zero::is_zero) {
            continue;
        }
        // a - b = key = g - f, so a + f = b + g is shared.
        let (_, f) = &diffs[key];
        return Some((delta, Some(f.clone())));
    }
    None
}

/// Brute-force disjointness and containment check, for tests.
#[doc(hidden)]
pub fn validate_by_enumeration(spec: &ConstructionSpec, cap: usize) -> Option<bool> {
    for n in 1..spec.depth() {
        let inner = spec.levels()[n - 1].shape.enumerate(cap).ok()?;
        let outer = &spec.levels()[n].shape;
        let p = spec.levels()[n].placements.as_ref()?.enumerate(cap).ok()?;
        if inner.len().checked_mul(p.len())? > cap {
            return None;
        }
        let mut seen = HashSet::new();
        for q in &p {
            for f in &inner {
                let x = q + f;
                if !outer.contains(&x) || !seen.insert(x) {
                    return Some(false);
                }
            }
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::super::{ConstructionRule, Level};
    use super::*;

    fn z(xs: &[i64]) -> ZVec {
        ZVec::from_i64s(xs)
    }

    #[test]
    fn overlapping_copies_are_reported() {
        let spec = ConstructionSpec::new(
            1,
            vec![
                Level { shape: ShapeSpec::rect_i64(&[2]), placements: None },
                Level {
                    shape: ShapeSpec::rect_i64(&[3]),
                    placements: Some(Placements::explicit(vec![z(&[0]), z(&[1])]).unwrap()),
                },
            ],
            None,
        )
        .unwrap();
        let v = validate(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Overlap);
        assert_eq!(v[0].point, Some(z(&[1])));
        assert_eq!(v[0].level, 2);
    }

    #[test]
    fn gallery_rules_are_valid() {
        for rule in [
            ConstructionRule::Chacon { dim: 1 },
            ConstructionRule::Chacon { dim: 2 },
            ConstructionRule::Staggered,
            ConstructionRule::DiagonalOdometer { base: z(&[2, 1]) },
        ] {
            let spec = ConstructionSpec::from_rule(rule, 4).unwrap();
            assert!(validate(&spec).is_empty(), "{:?}", spec.rule());
        }
    }

    #[test]
    fn staggered_overflow_is_caught() {
        let good = ConstructionSpec::from_rule(ConstructionRule::Staggered, 2).unwrap();
        let mut levels = good.levels().to_vec();
        levels[1].shape = ShapeSpec::rect_i64(&[14, 4]);
        let bad = ConstructionSpec::new(2, levels, None).unwrap();
        let v = validate(&bad);
        assert!(v.iter().any(|v| v.kind == ViolationKind::Outside && v.point == Some(z(&[14, 2]))));
        assert_eq!(validate_by_enumeration(&bad, 10_000), Some(false));
    }

    #[test]
    fn zero_stride_duplicates() {
        let p = Placements::new(
            vec![z(&[0])],
            vec![super::super::Step { axis: 0, stride: BigInt::zero(), count: 2u8.into() }],
        )
        .unwrap();
        let spec = ConstructionSpec::new(
            1,
            vec![
                Level { shape: ShapeSpec::rect_i64(&[1]), placements: None },
                Level { shape: ShapeSpec::rect_i64(&[4]), placements: Some(p) },
            ],
            None,
        )
        .unwrap();
        assert!(validate(&spec).iter().any(|v| v.kind == ViolationKind::Overlap));
    }
}
