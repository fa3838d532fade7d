//! `dev_{m,n}(G) = 1 - max_g #(I_{m,n} ∩ (g + G)) / #I_{m,n}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{rows_tsv, DevRow};
use crate::construction::ConstructionSpec;
use crate::descendants::compose_hist;
use crate::error::Result;
use crate::lattice::{Lattice, ResidueHistogram};
use crate::zvec::ZVec;

pub(crate) fn dev_of(h: &ResidueHistogram) -> (BigRational, ZVec) {
    let (g, top) = h.max_entry();
    let total = BigInt::from(h.total().clone());
    (BigRational::new(&total - BigInt::from(top), total), g.rep().clone())
}

/// Deviation and the majority coset `g*` (lowest rank on ties).
pub fn deviation(spec: &ConstructionSpec, m: usize, n: usize, g: &Lattice) -> Result<(BigRational, ZVec)> {
    Ok(dev_of(&compose_hist(spec, m, n, g)?))
}

/// `dev_{m,n}(G)` for all `1 <= m < n <= depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationTable {
    pub lattice: Lattice,
    pub depth: usize,
    pub rows: Vec<DevRow>,
}

impl DeviationTable {
    pub fn to_tsv(&self) -> String {
        rows_tsv(&self.rows)
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&DevRow> {
        self.rows.iter().find(|r| r.m == m && r.n == n)
    }

    /// Least `N` with `dev_{m,n} < eps` whenever `N <= m < n <= depth`.
    pub fn least_n(&self, eps: &BigRational) -> usize {
        self.rows.iter().filter(|r| r.dev >= *eps).map(|r| r.m + 1).max().unwrap_or(1)
    }

    /// First row, by `(m, n)`, violating `dev < eps` with `m >= from`.
    pub fn first_violation(&self, eps: &BigRational, from: usize) -> Option<&DevRow> {
        self.rows.iter().filter(|r| r.m >= from && r.dev >= *eps).max_by_key(|r| (r.m, std::cmp::Reverse(r.n)))
    }
}

/// Builds every `I_{m,n}` histogram incrementally: one convolution per cell.
pub fn deviation_table(spec: &ConstructionSpec, g: &Lattice, depth: usize) -> Result<DeviationTable> {
    let steps: Vec<ResidueHistogram> = (1..depth).map(|k| spec.placements(k)?.histogram(g)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for m in 1..depth {
        let mut h = ResidueHistogram::unit(g)?;
        for n in m + 1..=depth {
            h = h.convolve(&steps[n - 2])?;
            let (dev, g_star) = dev_of(&h);
            rows.push(DevRow { m, n, lattice: g.clone(), dev, g_star });
        }
    }
    Ok(DeviationTable { lattice: g.clone(), depth, rows })
}
