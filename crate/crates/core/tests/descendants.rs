mod common;

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use rand::Rng;

use common::*;
use rankone::construction::{validate, ConstructionRule, ConstructionSpec, Level, Placements, ShapeSpec};
use rankone::descendants::{
    cardinality, compose_exact, compose_hist, pair_fraction, pair_fraction_bound, view, DescendantView,
};
use rankone::lattice::Lattice;
use rankone::zvec::ZVec;
use rankone::Error;

/// Rectangles stacked on a grid: level `n + 1` holds a random nonempty
/// subset of the `p x r` grid of copies of level `n`, plus some slack.
fn grid_spec(seed: u64, depth: usize) -> ConstructionSpec {
    let mut r = rng(seed);
    let (mut w, mut h) = (r.gen_range(1..=2i64), r.gen_range(1..=2i64));
    let mut levels = vec![Level { shape: ShapeSpec::rect_i64(&[w, h]), placements: None }];
    for _ in 1..depth {
        let (p, q) = (r.gen_range(1..=3i64), r.gen_range(1..=2i64));
        let mut pts: Vec<ZVec> = (0..p)
            .flat_map(|i| (0..q).map(move |j| (i, j)))
            .filter(|_| r.gen_bool(0.7))
            .map(|(i, j)| z(&[i * w, j * h]))
            .collect();
        if pts.is_empty() {
            pts.push(z(&[0, 0]));
        }
        w = p * w + r.gen_range(0..=1);
        h *= q;
        levels
            .push(Level { shape: ShapeSpec::rect_i64(&[w, h]), placements: Some(Placements::explicit(pts).unwrap()) });
    }
    ConstructionSpec::new(2, levels, None).unwrap()
}

fn sorted(mut v: Vec<ZVec>) -> Vec<ZVec> {
    v.sort();
    v
}

proptest! {
    #[test]
    fn exact_matches_recursion(seed in any::<u64>()) {
        let spec = grid_spec(seed, 4);
        prop_assert!(validate(&spec).is_empty());
        for m in 1..=4 {
            for n in m..=4 {
                let got = compose_exact(&spec, m, n, 1 << 16).unwrap();
                let want = sorted(descendants(&spec, m, n));
                prop_assert_eq!(&got, &want);
                prop_assert_eq!(cardinality(&spec, m, n).unwrap(), BigUint::from(want.len()));
                let shape: HashSet<ZVec> = shape_points(&spec, n).into_iter().collect();
                prop_assert!(got.iter().all(|i| shape.contains(i)));
            }
        }
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let spec = grid_spec(seed, 4);
        for m in 1..=4 {
            for k in m..=4 {
                for n in k..=4 {
                    let a = compose_exact(&spec, m, k, 1 << 16).unwrap();
                    let b = compose_exact(&spec, k, n, 1 << 16).unwrap();
                    let sum: Vec<ZVec> = a.iter().flat_map(|x| b.iter().map(move |y| x.clone() + y.clone())).collect();
                    prop_assert_eq!(sorted(sum), compose_exact(&spec, m, n, 1 << 16).unwrap());
                }
            }
        }
    }

    #[test]
    fn histograms_match_classes(seed in any::<u64>(), lseed in any::<u64>()) {
        let spec = grid_spec(seed, 4);
        let mut r = rng(lseed);
        let (g, _, _) = random_lattice(&mut r, 2, 12);
        let key = CosetKey::of(&g);
        for m in 1..=3 {
            let pts = descendants(&spec, m, 4);
            let hist = compose_hist(&spec, m, 4, &g).unwrap();
            let classes = class_counts(&key, &pts);
            prop_assert_eq!(hist.total(), &BigUint::from(pts.len()));
            for p in &pts {
                prop_assert_eq!(hist.count(p), &BigUint::from(classes[&key.key(p)]));
            }
            prop_assert_eq!(hist.iter().filter(|(_, c)| **c > BigUint::from(0u8)).count(), classes.len());
            prop_assert_eq!(BigInt::from(hist.len()), g.index());
        }
    }

    #[test]
    fn pair_fractions_match_hashing(seed in any::<u64>(), v in (-4i64..=4, -3i64..=3)) {
        let spec = grid_spec(seed, 4);
        let v = z(&[v.0, v.1]);
        for m in 1..=3 {
            let pts = descendants(&spec, m, 4);
            let exact = pair_fraction(&spec, m, 4, &v, 1 << 16).unwrap();
            prop_assert_eq!(&exact, &common::pair_fraction(&pts, &v));
            let bound = pair_fraction_bound(&spec, m, 4, &v, 4).unwrap();
            prop_assert!(bound.value <= exact);
            if bound.exact {
                prop_assert_eq!(bound.value, exact);
            }
        }
    }
}

#[test]
fn chacon_counts_and_residues() {
    let spec = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 1 }, 6).unwrap();
    let g = Lattice::diagonal_i64(&[2]);
    let h = compose_hist(&spec, 1, 6, &g).unwrap();
    assert_eq!(h.total(), &BigUint::from(243u32));
    let pts = descendants(&spec, 1, 6);
    let even = pts.iter().filter(|p| p[0].clone() % 2 == BigInt::from(0)).count();
    assert_eq!(h.count(&z(&[0])), &BigUint::from(even));
    assert_eq!(h.count(&z(&[1])), &BigUint::from(243 - even));
    let product = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 2 }, 9).unwrap();
    assert_eq!(cardinality(&product, 1, 9).unwrap(), BigUint::from(9u32).pow(8));
    let big = compose_hist(&product, 1, 9, &Lattice::diagonal_i64(&[3, 3])).unwrap();
    assert_eq!(big.total(), &BigUint::from(9u32).pow(8));
}

#[test]
fn staggered_counts_without_enumeration() {
    let spec = ConstructionSpec::from_rule(ConstructionRule::Staggered, 4).unwrap();
    let g = Lattice::diagonal_i64(&[2, 4]);
    let h = compose_hist(&spec, 2, 4, &g).unwrap();
    assert_eq!(h.total(), &cardinality(&spec, 2, 4).unwrap());
    assert!(matches!(compose_exact(&spec, 2, 4, 1000), Err(Error::CapExceeded { .. })));
    let p2 = spec.placements(2).unwrap().enumerate(1 << 14).unwrap();
    let classes = class_counts(&CosetKey::of(&g), &p2);
    let h23 = compose_hist(&spec, 2, 3, &g).unwrap();
    for p in &p2 {
        assert_eq!(h23.count(p), &BigUint::from(classes[&CosetKey::of(&g).key(p)]));
    }
}

#[test]
fn views_and_range_errors() {
    let spec = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 1 }, 4).unwrap();
    match view(&spec, 1, 3, None, 100).unwrap() {
        DescendantView::Exact { points, .. } => assert_eq!(points.len(), 9),
        v => panic!("{v:?}"),
    }
    let hv = view(&spec, 1, 3, Some(&Lattice::diagonal_i64(&[3])), 100).unwrap();
    assert_eq!(hv.len(), BigUint::from(9u8));
    assert!(cardinality(&spec, 0, 2).is_err());
    assert!(cardinality(&spec, 3, 2).is_err());
    assert!(matches!(cardinality(&grid_spec(1, 3), 1, 4), Err(Error::LevelUnavailable { .. })));
    assert_eq!(compose_exact(&spec, 3, 3, 1).unwrap(), vec![z(&[0])]);
}
