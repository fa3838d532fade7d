//! Brute-force oracles shared by the integration tests. None of these go
//! through the library's Hermite reduction or histogram code.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rankone::construction::ConstructionSpec;
use rankone::lattice::Lattice;
use rankone::zvec::ZVec;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn z(xs: &[i64]) -> ZVec {
    ZVec::from_i64s(xs)
}

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

/// The subgroup of `(Z/M)^d` generated by `gens`, as points of `[0, M)^d`.
#[derive(Clone, Debug)]
pub struct ModGroup {
    pub d: usize,
    pub m: i64,
    pub gens: Vec<Vec<i64>>,
    pub set: HashSet<Vec<i64>>,
}

impl ModGroup {
    pub fn generated(d: usize, m: i64, gens: &[Vec<i64>]) -> Self {
        let red = |v: &[i64]| -> Vec<i64> { v.iter().map(|x| x.rem_euclid(m)).collect() };
        let gens: Vec<Vec<i64>> = gens.iter().map(|g| red(g)).collect();
        let mut set = HashSet::from([vec![0; d]]);
        let mut frontier = vec![vec![0; d]];
        while let Some(p) = frontier.pop() {
            for g in &gens {
                let s: Vec<i64> = p.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(m)).collect();
                if set.insert(s.clone()) {
                    frontier.push(s);
                }
            }
        }
        ModGroup { d, m, gens, set }
    }

    /// A lattice containing `M Z^d`, seen modulo `M`.
    pub fn of_lattice(l: &Lattice, m: i64) -> Self {
        let gens: Vec<Vec<i64>> = l.basis().iter().map(|c| c.to_i64s().unwrap()).collect();
        Self::generated(l.dim(), m, &gens)
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.set.contains(&v.iter().map(|x| x.rem_euclid(self.m)).collect::<Vec<_>>())
    }

    pub fn index(&self) -> u64 {
        (self.m as u64).pow(self.d as u32) / self.set.len() as u64
    }

    pub fn intersect(&self, other: &ModGroup) -> ModGroup {
        assert_eq!(self.m, other.m);
        let set: HashSet<Vec<i64>> = self.set.intersection(&other.set).cloned().collect();
        ModGroup { d: self.d, m: self.m, gens: set.iter().cloned().collect(), set }
    }

    pub fn join(&self, other: &ModGroup) -> ModGroup {
        let gens: Vec<Vec<i64>> = self.gens.iter().chain(&other.gens).cloned().collect();
        ModGroup::generated(self.d, self.m, &gens)
    }
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let t = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

/// Coset invariant for the lattice spanned by square basis columns: by
/// Cramer's rule `p - q` is in the lattice iff `adj(B)(p - q) = 0 mod det B`.
#[derive(Clone, Debug)]
pub struct CosetKey {
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl CosetKey {
    pub fn new(cols: &[ZVec]) -> Self {
        let d = cols.len();
        let b: Vec<Vec<BigInt>> = (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect();
        let dt = det(&b).abs();
        assert!(!dt.is_zero(), "basis must be full rank");
        let adj = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if d == 1 {
                            return BigInt::from(1);
                        }
                        let minor: Vec<Vec<BigInt>> = (0..d)
                            .filter(|r| *r != j)
                            .map(|r| (0..d).filter(|c| *c != i).map(|c| b[r][c].clone()).collect())
                            .collect();
                        let s = det(&minor);
                        if (i + j) % 2 == 0 {
                            s
                        } else {
                            -s
                        }
                    })
                    .collect()
            })
            .collect();
        CosetKey { adj, det: dt }
    }

    pub fn of(l: &Lattice) -> Self {
        Self::new(l.basis())
    }

    pub fn index(&self) -> &BigInt {
        &self.det
    }

    pub fn key(&self, p: &ZVec) -> Vec<BigInt> {
        self.adj
            .iter()
            .map(|row| row.iter().zip(p.iter()).map(|(a, x)| a * x).sum::<BigInt>().mod_floor(&self.det))
            .collect()
    }

    pub fn contains(&self, p: &ZVec) -> bool {
        self.key(p).iter().all(|x| x.is_zero())
    }
}

/// A random lattice containing `m Z^d`, with the generators used.
pub fn random_lattice_mod(r: &mut StdRng, d: usize, m: i64) -> (Lattice, Vec<Vec<i64>>) {
    let mut gens: Vec<Vec<i64>> =
        (0..r.gen_range(1..=3)).map(|_| (0..d).map(|_| r.gen_range(-2 * m..=2 * m)).collect()).collect();
    for l in 0..d {
        let mut e = vec![0; d];
        e[l] = m;
        gens.push(e);
    }
    let zs: Vec<ZVec> = gens.iter().map(|g| z(g)).collect();
    (Lattice::canonicalize(d, &zs).unwrap(), gens)
}

/// A random lattice of index at most `max_index`, with its generators and a
/// modulus `m` such that it contains `m Z^d`.
pub fn random_lattice(r: &mut StdRng, d: usize, max_index: u64) -> (Lattice, Vec<Vec<i64>>, i64) {
    loop {
        let m = r.gen_range(1..=max_index as i64);
        let (l, gens) = random_lattice_mod(r, d, m);
        if l.index() <= BigInt::from(max_index) {
            return (l, gens, m);
        }
    }
}

pub fn sigma(n: u64) -> u64 {
    (1..=n).filter(|k| n.is_multiple_of(*k)).sum()
}

/// `I_{m,n}` by direct recursion over enumerated placements.
pub fn descendants(spec: &ConstructionSpec, m: usize, n: usize) -> Vec<ZVec> {
    let mut acc = vec![ZVec::zero(spec.dim())];
    for k in m..n {
        let p = spec.placements(k).unwrap().enumerate(1 << 20).unwrap();
        acc = acc.iter().flat_map(|a| p.iter().map(move |x| a.clone() + x.clone())).collect();
    }
    acc
}

/// Points of a shape, for shapes small enough to list.
pub fn shape_points(spec: &ConstructionSpec, n: usize) -> Vec<ZVec> {
    spec.shape(n).unwrap().enumerate(1 << 20).unwrap()
}

/// Class sizes of `pts` under a coset key.
pub fn class_counts(key: &CosetKey, pts: &[ZVec]) -> HashMap<Vec<BigInt>, u64> {
    let mut out = HashMap::new();
    for p in pts {
        *out.entry(key.key(p)).or_insert(0) += 1;
    }
    out
}

/// `#{i in A : i + v in A} / #A` by hashing.
pub fn pair_fraction(pts: &[ZVec], v: &ZVec) -> BigRational {
    let set: HashSet<&ZVec> = pts.iter().collect();
    let hits = pts.iter().filter(|p| set.contains(&((*p).clone() + v.clone()))).count();
    BigRational::new(BigInt::from(hits), BigInt::from(pts.len()))
}

/// `1 - max class share`, straight from the points.
pub fn deviation(key: &CosetKey, pts: &[ZVec]) -> BigRational {
    let top = class_counts(key, pts).into_values().max().unwrap();
    BigRational::new(BigInt::from(pts.len() as u64 - top), BigInt::from(pts.len()))
}
