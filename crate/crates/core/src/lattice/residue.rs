use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Lattice;
use crate::construction::ShapeSpec;
use crate::error::{Error, Result};
use crate::zvec::{bigint_json, ZVec};

/// Largest index for which residue tables are materialized densely.
pub const DENSE_LIMIT: usize = 1 << 18;

/// A coset `v + L`, stored by its representative in the fundamental box.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Residue {
    lattice: Lattice,
    rep: ZVec,
}

impl Residue {
    pub(crate) fn new_unchecked(lattice: Lattice, rep: ZVec) -> Self {
        Residue { lattice, rep }
    }

    pub fn zero(lattice: &Lattice) -> Self {
        Residue { lattice: lattice.clone(), rep: ZVec::zero(lattice.dim()) }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn rep(&self) -> &ZVec {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Group law of `Z^d / L`.
    pub fn add(&self, other: &Residue) -> Result<Residue> {
        if self.lattice != other.lattice {
            return Err(Error::NotComparable);
        }
        Ok(self.lattice.reduce(&(&self.rep + &other.rep)))
    }

    pub fn neg(&self) -> Residue {
        self.lattice.reduce(&-&self.rep)
    }

    /// Translation `g + L -> g + v + L`.
    pub fn translate(&self, v: &ZVec) -> Residue {
        self.lattice.reduce(&(&self.rep + v))
    }

    /// Image under the quotient map `Z^d/L -> Z^d/M` for `L ⊆ M`.
    pub fn project(&self, coarser: &Lattice) -> Result<Residue> {
        if !self.lattice.is_sublattice_of(coarser) {
            return Err(Error::NotComparable);
        }
        Ok(coarser.reduce(&self.rep))
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rep)
    }
}

/// Small-integer view of `Z^d / L` used for dense tables.
#[derive(Clone, Debug)]
pub(crate) struct Quotient {
    cols: Vec<Vec<i64>>,
    diag: Vec<i64>,
    size: usize,
}

impl Quotient {
    pub(crate) fn new(lattice: &Lattice) -> Result<Self> {
        let index = lattice.index();
        let size = index
            .to_usize()
            .filter(|&n| n <= DENSE_LIMIT)
            .ok_or_else(|| Error::IndexTooLarge { index: index.to_string(), limit: DENSE_LIMIT })?;
        // Entries are bounded by the diagonal, hence by the index.
        let cols: Vec<Vec<i64>> =
            lattice.basis().iter().map(|c| c.iter().map(|x| x.to_i64().expect("bounded by index")).collect()).collect();
        let diag = (0..lattice.dim()).map(|l| cols[l][l]).collect();
        Ok(Quotient { cols, diag, size })
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    fn reduce_small(&self, v: &mut [i64]) {
        for l in (0..v.len()).rev() {
            let q = v[l].div_euclid(self.diag[l]);
            if q != 0 {
                for (x, c) in v[..=l].iter_mut().zip(&self.cols[l]) {
                    *x -= q * c;
                }
            }
        }
    }

    fn rank_reduced(&self, v: &[i64]) -> usize {
        let mut r = 0usize;
        for l in (0..v.len()).rev() {
            r = r * self.diag[l] as usize + v[l] as usize;
        }
        r
    }

    pub(crate) fn unrank(&self, mut r: usize) -> Vec<i64> {
        let mut v = vec![0i64; self.diag.len()];
        for (l, &a) in self.diag.iter().enumerate() {
            v[l] = (r % a as usize) as i64;
            r /= a as usize;
        }
        v
    }

    pub(crate) fn rank_big(&self, lattice: &Lattice, v: &ZVec) -> usize {
        let red = lattice.reduce_vec(v);
        let small: Vec<i64> = red.iter().map(|x| x.to_i64().expect("reduced")).collect();
        self.rank_reduced(&small)
    }

    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        let mut v = self.unrank(a);
        for (x, y) in v.iter_mut().zip(self.unrank(b)) {
            *x += y;
        }
        self.reduce_small(&mut v);
        self.rank_reduced(&v)
    }

    pub(crate) fn rep(&self, r: usize) -> ZVec {
        ZVec(self.unrank(r).into_iter().map(BigInt::from).collect())
    }
}

/// Per-coset counts over `Z^d / L`, stored densely.
#[derive(Clone, Debug)]
pub struct ResidueHistogram {
    lattice: Lattice,
    quotient: Quotient,
    counts: Vec<BigUint>,
    total: BigUint,
}

impl PartialEq for ResidueHistogram {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.counts == other.counts
    }
}

impl Eq for ResidueHistogram {}

impl ResidueHistogram {
    pub fn empty(lattice: &Lattice) -> Result<Self> {
        let quotient = Quotient::new(lattice)?;
        Ok(ResidueHistogram {
            lattice: lattice.clone(),
            counts: vec![BigUint::zero(); quotient.size()],
            quotient,
            total: BigUint::zero(),
        })
    }

    /// The histogram of the single point `0`.
    pub fn unit(lattice: &Lattice) -> Result<Self> {
        let mut h = Self::empty(lattice)?;
        h.counts[0] = BigUint::from(1u8);
        h.total = BigUint::from(1u8);
        Ok(h)
    }

    pub fn from_points<'a, I>(lattice: &Lattice, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a ZVec>,
    {
        let mut h = Self::empty(lattice)?;
        for p in points {
            h.insert(p, &BigUint::from(1u8));
        }
        Ok(h)
    }

    /// Counts of `{start + k step : 0 <= k < count}`.
    ///
    /// The sequence `k step mod L` is periodic with period the order of
    /// `step` in the quotient, so only one period is walked.
    pub fn progression(lattice: &Lattice, start: &ZVec, step: &ZVec, count: &BigUint) -> Result<Self> {
        let mut h = Self::empty(lattice)?;
        if count.is_zero() {
            return Ok(h);
        }
        let q = &h.quotient;
        let r0 = q.rank_big(lattice, start);
        let s = q.rank_big(lattice, step);
        let mut cycle = vec![r0];
        let mut r = q.add(r0, s);
        while r != r0 {
            cycle.push(r);
            r = q.add(r, s);
        }
        let period = BigUint::from(cycle.len());
        let full = count / &period;
        let rem = (count % &period).to_usize().expect("remainder below period");
        for (i, &c) in cycle.iter().enumerate() {
            let n = if i < rem { &full + 1u8 } else { full.clone() };
            h.counts[c] += n;
        }
        h.total = count.clone();
        Ok(h)
    }

    pub fn insert(&mut self, v: &ZVec, count: &BigUint) {
        let r = self.quotient.rank_big(&self.lattice, v);
        self.counts[r] += count;
        self.total += count;
    }

    /// Counts of the sumset `A + B`, assuming the sum is disjoint.
    pub fn convolve(&self, other: &ResidueHistogram) -> Result<ResidueHistogram> {
        if self.lattice != other.lattice {
            return Err(Error::NotComparable);
        }
        let mut out = Self::empty(&self.lattice)?;
        let q = &self.quotient;
        let a_nz: Vec<usize> = (0..q.size()).filter(|&i| !self.counts[i].is_zero()).collect();
        let b_nz: Vec<usize> = (0..q.size()).filter(|&j| !other.counts[j].is_zero()).collect();
        for &i in &a_nz {
            for &j in &b_nz {
                let k = q.add(i, j);
                out.counts[k] += &self.counts[i] * &other.counts[j];
            }
        }
        out.total = &self.total * &other.total;
        Ok(out)
    }

    /// Pushes counts forward along `Z^d/L -> Z^d/M`.
    pub fn project(&self, coarser: &Lattice) -> Result<ResidueHistogram> {
        if !self.lattice.is_sublattice_of(coarser) {
            return Err(Error::NotComparable);
        }
        let mut out = Self::empty(coarser)?;
        for (r, c) in self.counts.iter().enumerate() {
            if !c.is_zero() {
                out.insert(&self.quotient.rep(r), c);
            }
        }
        Ok(out)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn total(&self) -> &BigUint {
        &self.total
    }

    pub fn count(&self, v: &ZVec) -> &BigUint {
        &self.counts[self.quotient.rank_big(&self.lattice, v)]
    }

    pub fn count_of(&self, r: &Residue) -> &BigUint {
        self.count(r.rep())
    }

    /// Number of cosets, i.e. the index of the lattice.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_zero()
    }

    /// All cosets in a fixed order (mixed radix on the fundamental box, first
    /// coordinate fastest), with their counts, including zeros.
    pub fn iter(&self) -> impl Iterator<Item = (Residue, &BigUint)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(r, c)| (Residue::new_unchecked(self.lattice.clone(), self.quotient.rep(r)), c))
    }

    /// The most populated coset (earliest in [`iter`](Self::iter) order on ties).
    pub fn max_entry(&self) -> (Residue, BigUint) {
        let mut best = 0usize;
        for (r, c) in self.counts.iter().enumerate() {
            if *c > self.counts[best] {
                best = r;
            }
        }
        (Residue::new_unchecked(self.lattice.clone(), self.quotient.rep(best)), self.counts[best].clone())
    }

    /// Tab-separated dump: representative, count, share of total as `p/q`.
    pub fn to_tsv(&self) -> String {
        use num_rational::BigRational;
        let mut out = String::from("residue\tcount\tshare\n");
        let total = BigInt::from(self.total.clone());
        for (r, c) in self.iter() {
            let share = if total.is_zero() {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::from(c.clone()), total.clone())
            };
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                serde_json::to_string(r.rep()).expect("vector json"),
                c,
                crate::zvec::fmt_ratio(&share)
            ));
        }
        out
    }
}

#[derive(Serialize)]
struct HistEntry {
    rep: ZVec,
    #[serde(with = "bigint_json")]
    count: BigInt,
}

#[derive(Serialize)]
struct HistJson<'a> {
    lattice: &'a Lattice,
    counts: Vec<HistEntry>,
    #[serde(with = "bigint_json")]
    total: BigInt,
}

impl Serialize for ResidueHistogram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HistJson {
            lattice: &self.lattice,
            counts: self
                .counts
                .iter()
                .enumerate()
                .map(|(r, c)| HistEntry { rep: self.quotient.rep(r), count: BigInt::from(c.clone()) })
                .collect(),
            total: BigInt::from(self.total.clone()),
        }
        .serialize(s)
    }
}

/// Exact per-coset counts `#(F ∩ (v + L))` of a finite shape.
///
/// Rectangles are the sumset of one segment per axis, so their histogram is
/// a convolution of progression histograms; no point is enumerated.
pub fn shape_coset_histogram(shape: &ShapeSpec, lattice: &Lattice) -> Result<ResidueHistogram> {
    if shape.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch { expected: lattice.dim(), got: shape.dim() });
    }
    match shape {
        ShapeSpec::Rect(extents) => {
            let d = extents.len();
            let mut h = ResidueHistogram::unit(lattice)?;
            for (l, e) in extents.iter().enumerate() {
                let n = e.to_biguint().expect("positive extent");
                let seg = ResidueHistogram::progression(lattice, &ZVec::zero(d), &ZVec::unit(d, l), &n)?;
                h = h.convolve(&seg)?;
            }
            Ok(h)
        }
        ShapeSpec::Points(points) => ResidueHistogram::from_points(lattice, points),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(xs: &[i64]) -> ZVec {
        ZVec::from_i64s(xs)
    }

    fn rect(xs: &[i64]) -> ShapeSpec {
        ShapeSpec::rect_i64(xs)
    }

    #[test]
    fn residue_group_laws() {
        let two = Lattice::diagonal_i64(&[2, 2]);
        let a = two.reduce(&z(&[1, 1]));
        assert!(a.add(&a).unwrap().is_zero());
        let coarse = Lattice::diagonal_i64(&[2, 1]);
        assert_eq!(a.project(&coarse).unwrap().rep(), &z(&[1, 0]));
        assert_eq!(a.add(&two.reduce(&z(&[0, 1]))).unwrap().rep(), &z(&[1, 0]));
        assert_eq!(coarse.reduce(&z(&[1, 0])).project(&two), Err(Error::NotComparable));
    }

    #[test]
    fn rectangle_counts() {
        let two = Lattice::diagonal_i64(&[2, 2]);
        let h = shape_coset_histogram(&rect(&[2, 2]), &two).unwrap();
        assert!(h.iter().all(|(_, c)| *c == BigUint::from(1u8)));
        let h = shape_coset_histogram(&rect(&[3, 3]), &two).unwrap();
        assert_eq!(h.count(&z(&[0, 0])), &BigUint::from(4u8));
        assert_eq!(h.count(&z(&[1, 0])), &BigUint::from(2u8));
        assert_eq!(h.count(&z(&[0, 1])), &BigUint::from(2u8));
        assert_eq!(h.count(&z(&[1, 1])), &BigUint::from(1u8));
        assert_eq!(h.total(), &BigUint::from(9u8));
        let l = Lattice::canonicalize(2, &[z(&[2, 0]), z(&[1, 3])]).unwrap();
        let h = shape_coset_histogram(&rect(&[6, 6]), &l).unwrap();
        assert_eq!(h.len(), 6);
        assert!(h.iter().all(|(_, c)| *c == BigUint::from(6u8)));
    }

    #[test]
    fn huge_progression_counts() {
        let l = Lattice::diagonal_i64(&[3]);
        let n = BigUint::from(1u8) << 64;
        let h = ResidueHistogram::progression(&l, &z(&[1]), &z(&[1]), &n).unwrap();
        // 2^64 = 1 mod 3, so the first residue of the cycle gets the extra point.
        let base = (&n - 1u8) / 3u8;
        assert_eq!(h.count(&z(&[1])), &(&base + 1u8));
        assert_eq!(h.count(&z(&[2])), &base);
        assert_eq!(h.count(&z(&[0])), &base);
        assert_eq!(h.total(), &n);
    }

    #[test]
    fn projection_merges_buckets() {
        let fine = Lattice::diagonal_i64(&[2, 2]);
        let coarse = Lattice::diagonal_i64(&[2, 1]);
        let h = shape_coset_histogram(&rect(&[3, 3]), &fine).unwrap().project(&coarse).unwrap();
        assert_eq!(h.count(&z(&[0, 0])), &BigUint::from(6u8));
        assert_eq!(h.count(&z(&[1, 0])), &BigUint::from(3u8));
    }

    #[test]
    fn oversized_index_is_rejected() {
        let big = Lattice::diagonal_i64(&[1 << 20, 1]);
        assert!(matches!(ResidueHistogram::empty(&big), Err(Error::IndexTooLarge { .. })));
    }
}
