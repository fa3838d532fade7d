//! Finite-index subgroups of `Z^d` in canonical upper-triangular form.
//!
//! A [`Lattice`] stores `d` basis columns. Column `l` has its last nonzero
//! entry on the diagonal (`a_{l,l} > 0`), every entry above a diagonal is
//! reduced into `[0, a_{k,k})`, and entries below the diagonal are zero. Two
//! lattices are equal as subgroups iff their matrices are identical.
//!
//! The diagonal is the column-by-column minimal-generator sequence:
//! `a_{l,l}` is the least `n > 0` such that `n e_l` is congruent modulo the
//! lattice to a vector supported on the first `l - 1` coordinates. The box
//! `prod_l [0, a_{l,l})` is therefore a fundamental domain, which is what
//! [`Lattice::reduce`] maps into.

mod enumerate;
mod hermite;
mod residue;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::zvec::ZVec;

pub use enumerate::enumerate_sublattices;
pub use hermite::{echelon, echelon_contains};
pub use residue::{shape_coset_histogram, Residue, ResidueHistogram, DENSE_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    dim: usize,
    cols: Vec<ZVec>,
}

impl Lattice {
    /// The canonical lattice spanned by `generators`.
    pub fn canonicalize(dim: usize, generators: &[ZVec]) -> Result<Lattice> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        for g in generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
        }
        let pivots = hermite::echelon_pivots(dim, generators);
        if pivots.len() < dim {
            return Err(Error::RankDeficient { dim, rank: pivots.len() });
        }
        let cols = pivots.into_iter().map(|(_, c)| c).collect();
        Ok(Lattice { dim, cols })
    }

    pub fn identity(dim: usize) -> Lattice {
        Lattice { dim, cols: (0..dim).map(|l| ZVec::unit(dim, l)).collect() }
    }

    /// `diag(d_1, ..., d_k) Z^d`; panics on non-positive entries.
    pub fn diagonal(entries: &[BigInt]) -> Lattice {
        let dim = entries.len();
        let cols = entries
            .iter()
            .enumerate()
            .map(|(l, a)| {
                assert!(a.is_positive(), "diagonal entries must be positive");
                let mut c = ZVec::zero(dim);
                c[l] = a.clone();
                c
            })
            .collect();
        Lattice { dim, cols }
    }

    pub fn diagonal_i64(entries: &[i64]) -> Lattice {
        Self::diagonal(&entries.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    /// `k Z^d`.
    pub fn scaled_identity(dim: usize, k: &BigInt) -> Lattice {
        Self::diagonal(&vec![k.clone(); dim])
    }

    /// Builds from an upper-triangular matrix given as columns, validating the
    /// canonical-form invariants instead of re-deriving them.
    pub fn from_canonical_columns(cols: Vec<ZVec>) -> Result<Lattice> {
        let dim = cols.len();
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        for (l, c) in cols.iter().enumerate() {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
            }
            if !c[l].is_positive() {
                return Err(Error::InvalidSpec(format!("diagonal entry {l} is not positive")));
            }
            if (l + 1..dim).any(|k| !c[k].is_zero()) {
                return Err(Error::InvalidSpec(format!("column {l} has entries below the diagonal")));
            }
            for k in 0..l {
                if c[k].is_negative() || c[k] >= cols[k][k] {
                    return Err(Error::InvalidSpec(format!("entry ({k},{l}) is not reduced modulo the diagonal")));
                }
            }
        }
        Ok(Lattice { dim, cols })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis columns; column `l` is the `l`-th generator.
    pub fn basis(&self) -> &[ZVec] {
        &self.cols
    }

    /// Matrix entry in row `k`, column `l`.
    pub fn entry(&self, k: usize, l: usize) -> &BigInt {
        &self.cols[l][k]
    }

    pub fn diag(&self, l: usize) -> &BigInt {
        &self.cols[l][l]
    }

    pub fn diagonal_entries(&self) -> Vec<BigInt> {
        (0..self.dim).map(|l| self.diag(l).clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|l| (0..l).all(|k| self.entry(k, l).is_zero()))
    }

    /// `[Z^d : L]`, the product of the diagonal.
    pub fn index(&self) -> BigInt {
        self.cols.iter().enumerate().map(|(l, c)| c[l].clone()).product()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|l| self.diag(l).is_one())
    }

    fn check_dim(&self, v: &ZVec) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        Ok(())
    }

    /// Membership by exact back-substitution.
    pub fn contains(&self, v: &ZVec) -> bool {
        assert_eq!(v.dim(), self.dim, "dimension mismatch");
        let mut w = v.clone();
        for l in (0..self.dim).rev() {
            let a = self.diag(l);
            let (q, r) = w[l].div_rem(a);
            if !r.is_zero() {
                return false;
            }
            if !q.is_zero() {
                for k in 0..=l {
                    let t = &self.cols[l][k] * &q;
                    w[k] -= t;
                }
            }
        }
        true
    }

    /// The representative of `v + L` inside the fundamental box.
    pub fn reduce_vec(&self, v: &ZVec) -> ZVec {
        assert_eq!(v.dim(), self.dim, "dimension mismatch");
        let mut w = v.clone();
        for l in (0..self.dim).rev() {
            let q = w[l].div_floor(self.diag(l));
            if !q.is_zero() {
                for k in 0..=l {
                    let t = &self.cols[l][k] * &q;
                    w[k] -= t;
                }
            }
        }
        w
    }

    pub fn reduce(&self, v: &ZVec) -> Residue {
        Residue::new_unchecked(self.clone(), self.reduce_vec(v))
    }

    pub fn try_reduce(&self, v: &ZVec) -> Result<Residue> {
        self.check_dim(v)?;
        Ok(self.reduce(v))
    }

    /// Subgroup generated by both lattices.
    pub fn join(&self, other: &Lattice) -> Result<Lattice> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let gens: Vec<ZVec> = self.cols.iter().chain(&other.cols).cloned().collect();
        Lattice::canonicalize(self.dim, &gens)
    }

    /// Adds extra generators to the lattice.
    pub fn join_vectors(&self, vs: &[ZVec]) -> Result<Lattice> {
        let gens: Vec<ZVec> = self.cols.iter().chain(vs).cloned().collect();
        Lattice::canonicalize(self.dim, &gens)
    }

    /// Set intersection, computed from the echelon form of the doubled
    /// lattice spanned by `(b, b)` for `b` in `self` and `(0, c)` for `c` in
    /// `other`: the vectors whose second half vanishes are exactly
    /// `(x, 0)` with `x` in both lattices.
    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let d = self.dim;
        let mut gens = Vec::with_capacity(2 * d);
        for b in &self.cols {
            gens.push(ZVec(b.0.iter().chain(b.0.iter()).cloned().collect()));
        }
        for c in &other.cols {
            gens.push(ZVec(std::iter::repeat_n(BigInt::zero(), d).chain(c.0.iter().cloned()).collect()));
        }
        let pivots = hermite::echelon_pivots(2 * d, &gens);
        debug_assert_eq!(pivots.len(), 2 * d);
        let cols = pivots
            .into_iter()
            .take(d)
            .map(|(p, c)| {
                debug_assert!(p < d);
                ZVec(c.0[..d].to_vec())
            })
            .collect();
        Ok(Lattice { dim: d, cols })
    }

    /// `self ⊆ other`.
    pub fn is_sublattice_of(&self, other: &Lattice) -> bool {
        self.dim == other.dim && self.cols.iter().all(|c| other.contains(c))
    }

    /// The lattice `M L`, for `M` a square integer matrix given as columns.
    /// Fails if `M` is singular.
    pub fn image_under(&self, m_cols: &[ZVec]) -> Result<Lattice> {
        let imgs: Vec<ZVec> = self.cols.iter().map(|c| mat_vec(m_cols, c)).collect();
        Lattice::canonicalize(self.dim, &imgs)
    }

    /// Least `k > 0` with `k v` in the lattice: the order of `v + L` in `Z^d/L`.
    pub fn order_of(&self, v: &ZVec) -> BigInt {
        // Back-substitution over Q: the denominators accumulated while
        // clearing coordinates from the bottom give the order.
        let mut k = BigInt::one();
        let mut w = v.clone();
        for l in (0..self.dim).rev() {
            let a = self.diag(l);
            let g = w[l].gcd(a);
            let need = if w[l].is_zero() { BigInt::one() } else { a / &g };
            if !need.is_one() {
                w = w.scale(&need);
                k *= &need;
            }
            let q = &w[l] / a;
            if !q.is_zero() {
                for kk in 0..=l {
                    let t = &self.cols[l][kk] * &q;
                    w[kk] -= t;
                }
            }
        }
        k
    }

    fn sort_key(&self) -> (BigInt, &[ZVec]) {
        (self.index(), &self.cols)
    }
}

/// Multiplies a matrix given by columns with a vector.
pub fn mat_vec(cols: &[ZVec], v: &ZVec) -> ZVec {
    let d = v.dim();
    let mut out = ZVec::zero(cols.first().map(|c| c.dim()).unwrap_or(d));
    for (c, x) in cols.iter().zip(v.iter()) {
        if x.is_zero() {
            continue;
        }
        for k in 0..out.dim() {
            out[k] += &c[k] * x;
        }
    }
    out
}

impl PartialOrd for Lattice {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by index, then lexicographically by columns.
impl Ord for Lattice {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim.cmp(&other.dim).then_with(|| self.sort_key().cmp(&other.sort_key()))
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (i, c) in self.cols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    dim: usize,
    basis: Vec<ZVec>,
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson { dim: self.dim, basis: self.cols.clone() }.serialize(s)
    }
}

/// Any generating set is accepted and canonicalized on load.
impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = LatticeJson::deserialize(d)?;
        Lattice::canonicalize(raw.dim, &raw.basis).map_err(serde::de::Error::custom)
    }
}
