mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use common::*;
use rankone::analysis::{
    best_residue_set, deviation, deviation_table, finite_factor_check, forced_at, some_infinite_odometer_check,
    subaction_congruence_check, Analyzer,
};
use rankone::construction::{ConstructionRule, ConstructionSpec};
use rankone::descendants::compose_exact;
use rankone::gallery;
use rankone::lattice::{enumerate_sublattices, Lattice};
use rankone::verdict::{StatusKind, Witness};
use rankone::zvec::ZVec;

fn chacon_product(depth: usize) -> ConstructionSpec {
    ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 2 }, depth).unwrap()
}

fn coarsen(r: &mut rand::rngs::StdRng, g: &Lattice) -> Lattice {
    let (extra, _) = random_lattice_mod(r, g.dim(), 6);
    g.join(&extra).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deviation_matches_points(seed in any::<u64>(), m in 1usize..=3, span in 1usize..=2) {
        let spec = chacon_product(5);
        let n = m + span;
        let mut r = rng(seed);
        let (g, _, _) = random_lattice(&mut r, 2, 12);
        let pts = compose_exact(&spec, m, n, 1 << 16).unwrap();
        let (dev, g_star) = deviation(&spec, m, n, &g).unwrap();
        let key = CosetKey::of(&g);
        prop_assert_eq!(&dev, &common::deviation(&key, &pts));
        let top = pts.iter().filter(|p| key.key(p) == key.key(&g_star)).count();
        prop_assert_eq!(BigRational::new(BigInt::from(pts.len() - top), BigInt::from(pts.len())), dev.clone());
        prop_assert!(deviation(&spec, m, n, &Lattice::identity(2)).unwrap().0.is_zero());
        let coarse = coarsen(&mut r, &g);
        prop_assert!(deviation(&spec, m, n, &coarse).unwrap().0 <= dev);
    }

    /// Pairs `(i, i + v)` with `v` outside `G` straddle cosets, so a pair
    /// fraction `p` leaves every coset missing at least `p / 2`.
    #[test]
    fn forcing_lemma(seed in any::<u64>(), v in (-5i64..=5, -5i64..=5), m in 1usize..=3) {
        let spec = chacon_product(5);
        let v = z(&[v.0, v.1]);
        let mut r = rng(seed);
        let (g, _, _) = random_lattice(&mut r, 2, 12);
        prop_assume!(!g.contains(&v));
        let pts = compose_exact(&spec, m, m + 2, 1 << 16).unwrap();
        let p = pair_fraction(&pts, &v);
        let dev = common::deviation(&CosetKey::of(&g), &pts);
        prop_assert!(dev * BigRational::from_integer(2.into()) >= p);
    }

    #[test]
    fn refutations_carry_sound_certificates(seed in any::<u64>()) {
        let spec = chacon_product(5);
        let eps = q(1, 6);
        let mut r = rng(seed);
        let (g, _, _) = random_lattice(&mut r, 2, 16);
        let v = finite_factor_check(&spec, &g, &eps, 5).unwrap();
        if !v.status.is_refuted() {
            return Ok(());
        }
        let certs = match v.status.witness().unwrap() {
            Witness::ForcedTail { certificates, .. } => certificates.clone(),
            Witness::Closure { lattice, .. } => {
                prop_assert!(!lattice.is_sublattice_of(&g));
                vec![]
            }
            w => vec![w.clone()],
        };
        for c in certs {
            let Witness::Forced { m, n, vector, pair_fraction: pf, .. } = c else {
                return Err(TestCaseError::fail(format!("unexpected certificate {c:?}")));
            };
            prop_assert!(!g.contains(&vector));
            let pts = compose_exact(&spec, m, n, 1 << 16).unwrap();
            let real = pair_fraction(&pts, &vector);
            prop_assert!(real >= pf && pf >= &eps * BigRational::from_integer(2.into()));
            prop_assert!(common::deviation(&CosetKey::of(&g), &pts) >= eps);
        }
    }
}

#[test]
fn forced_vectors_are_forced() {
    let spec = chacon_product(5);
    let threshold = q(1, 3);
    for m in 1..=3 {
        let forced = forced_at(&spec, m, &threshold, &[]).unwrap();
        assert!(!forced.is_empty(), "level {m}");
        for f in forced {
            let pts = compose_exact(&spec, f.m, f.n, 1 << 16).unwrap();
            let real = pair_fraction(&pts, &f.vector);
            assert!(real >= f.pair_fraction && f.pair_fraction >= threshold);
            if f.exact {
                assert_eq!(real, f.pair_fraction);
            }
        }
    }
}

#[test]
fn supported_factors_are_closed() {
    let spec = gallery::build("odometer-as-construction(dyadic-z2)", 6).unwrap().construction().unwrap().clone();
    let eps = q(1, 6);
    let (v, set) = some_infinite_odometer_check(&spec, 16, &eps, 6).unwrap();
    assert_eq!(v.status.kind(), StatusKind::Supported);
    let pool = enumerate_sublattices(2, 16);
    let supported = set.lattices();
    assert!(supported.len() >= 5);
    for a in &supported {
        for b in &supported {
            let j = a.join(b).unwrap();
            assert!(set.contains(&j), "{a} v {b}");
            let i = a.intersect(b).unwrap();
            if pool.contains(&i) {
                assert!(set.contains(&i), "{a} ^ {b}");
            }
        }
    }
    // The dyadic factors are the lattices containing some 2^k Z^2.
    let dyadic: Vec<&Lattice> = pool.iter().filter(|g| g.contains(&z(&[64, 0])) && g.contains(&z(&[0, 64]))).collect();
    assert_eq!(supported, dyadic);
}

#[test]
fn verdicts_do_not_flip_with_depth() {
    for name in ["chacon-product", "staggered-z2", "odometer-as-construction(dyadic-z2)"] {
        let spec = gallery::build(name, 6).unwrap().construction().unwrap().clone();
        let eps = if name == "staggered-z2" { q(1, 8) } else { q(1, 6) };
        let a5 = Analyzer::new(&spec, &eps, 5).unwrap();
        let a6 = Analyzer::new(&spec, &eps, 6).unwrap();
        for g in enumerate_sublattices(2, 8) {
            let k5 = a5.finite_factor(&g).unwrap().status.kind();
            let k6 = a6.finite_factor(&g).unwrap().status.kind();
            assert!(
                !matches!(
                    (k5, k6),
                    (StatusKind::Supported, StatusKind::Refuted) | (StatusKind::Refuted, StatusKind::Supported)
                ),
                "{name} {g}: {k5} then {k6}"
            );
        }
    }
}

#[test]
fn least_n_is_tight() {
    let spec = chacon_product(6);
    let eps = q(1, 6);
    for g in enumerate_sublattices(2, 6) {
        let t = deviation_table(&spec, &g, 6).unwrap();
        let n = t.least_n(&eps);
        assert!(t.rows.iter().filter(|r| r.m >= n).all(|r| r.dev < eps));
        if n > 1 {
            assert!(t.rows.iter().any(|r| r.m == n - 1 && r.dev >= eps));
        }
        for r in &t.rows {
            assert_eq!(deviation(&spec, r.m, r.n, &g).unwrap().0, r.dev);
        }
    }
}

#[test]
fn residue_set_is_optimal() {
    // Against every subset of cosets, for small indices.
    let spec = gallery::build("odometer-as-construction(dyadic-z2)", 4).unwrap().construction().unwrap().clone();
    let chacon = chacon_product(4);
    for spec in [&spec, &chacon] {
        for g in enumerate_sublattices(2, 4) {
            let b = best_residue_set(spec, 1, 3, &g).unwrap();
            let inside: Vec<ZVec> = compose_exact(spec, 1, 3, 1 << 16).unwrap();
            let shape = shape_points(spec, 3);
            let key = CosetKey::of(&g);
            let reps: Vec<ZVec> = {
                let mut seen = std::collections::HashSet::new();
                shape.iter().filter(|p| seen.insert(key.key(p))).cloned().collect()
            };
            let best = (0u32..1 << reps.len())
                .map(|mask| {
                    let chosen: Vec<Vec<BigInt>> =
                        reps.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, r)| key.key(r)).collect();
                    let inset = |p: &ZVec| chosen.contains(&key.key(p));
                    let miss = inside.iter().filter(|p| !inset(p)).count()
                        + shape.iter().filter(|p| inset(p) && !inside.contains(p)).count();
                    BigRational::new(BigInt::from(miss), BigInt::from(inside.len()))
                })
                .min()
                .unwrap();
            assert_eq!(b.ratio, best, "{g}");
        }
    }
}

#[test]
fn subaction_reads_placements() {
    let spec = gallery::build("odometer-as-construction(dyadic-z2)", 6).unwrap().construction().unwrap().clone();
    for k in 0..4u32 {
        let v = subaction_congruence_check(&spec, 0, &BigInt::from(2u64.pow(k)), 6).unwrap();
        assert!(v.status.is_supported(), "2^{k}");
    }
    let chacon = chacon_product(6);
    assert!(subaction_congruence_check(&chacon, 1, &BigInt::from(1), 6).unwrap().status.is_supported());
    assert!(subaction_congruence_check(&chacon, 1, &BigInt::from(2), 6).unwrap().status.is_inconclusive());
    assert!(subaction_congruence_check(&chacon, 2, &BigInt::from(2), 6).is_err());
}
