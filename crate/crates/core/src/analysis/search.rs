//! Searches over all sublattices up to an index bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::factor::Analyzer;
use super::forced::{free_obstruction, ForcedClosure};
use super::{fmt, CriterionVerdict, WINDOW};
use crate::construction::ConstructionSpec;
use crate::error::Result;
use crate::lattice::{enumerate_sublattices, Lattice, DENSE_LIMIT};
use crate::odometer::{generate_from_family, OdometerSpec};
use crate::verdict::{Status, StatusKind};
use crate::zvec::{ratio_json, ZVec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateSummary {
    pub lattice: Lattice,
    pub n: usize,
    /// Largest deviation over the rows with `m >= n`.
    #[serde(with = "ratio_json")]
    pub max_dev: BigRational,
}

/// Finite factors found among all sublattices of index at most `max_index`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FFCandidateSet {
    pub max_index: u64,
    pub pool_size: usize,
    pub supported: Vec<CandidateSummary>,
    pub refuted: usize,
    pub inconclusive: usize,
    /// Intersection of the supported lattices and its own verdict.
    pub intersection: Option<Lattice>,
    pub intersection_status: Option<StatusKind>,
    pub closure: ForcedClosure,
    /// Generated by the supported lattices in pool order.
    pub odometer: Option<OdometerSpec>,
}

impl FFCandidateSet {
    pub fn lattices(&self) -> Vec<&Lattice> {
        self.supported.iter().map(|c| &c.lattice).collect()
    }

    pub fn contains(&self, g: &Lattice) -> bool {
        self.supported.iter().any(|c| c.lattice == *g)
    }
}

pub(crate) fn scan(an: &Analyzer, max_index: u64) -> Result<FFCandidateSet> {
    let pool = enumerate_sublattices(an.spec().dim(), max_index);
    let mut set = FFCandidateSet {
        max_index,
        pool_size: pool.len(),
        supported: Vec::new(),
        refuted: 0,
        inconclusive: 0,
        intersection: None,
        intersection_status: None,
        closure: an.closure()?,
        odometer: None,
    };
    for g in pool {
        let v = an.finite_factor(&g)?;
        match v.status {
            Status::Supported { n, .. } => {
                let n = n.unwrap_or(1);
                let max_dev = v
                    .tables
                    .iter()
                    .filter(|r| r.m >= n)
                    .map(|r| r.dev.clone())
                    .max()
                    .unwrap_or_else(|| BigRational::from_integer(0.into()));
                set.supported.push(CandidateSummary { lattice: g, n, max_dev });
            }
            Status::Refuted { .. } => set.refuted += 1,
            Status::Inconclusive { .. } => set.inconclusive += 1,
        }
    }
    if let Some(first) = set.supported.first() {
        let mut j = first.lattice.clone();
        for c in &set.supported[1..] {
            j = j.intersect(&c.lattice)?;
        }
        if j.index() <= BigInt::from(DENSE_LIMIT) {
            set.intersection_status = Some(an.finite_factor(&j)?.status.kind());
        }
        set.intersection = Some(j);
        set.odometer = Some(generate_from_family(&set.lattices().into_iter().cloned().collect::<Vec<_>>())?);
    }
    Ok(set)
}

fn verdict_for(an: &Analyzer, set: &FFCandidateSet) -> CriterionVerdict {
    let max_index = BigInt::from(set.max_index);
    let status = if let (Some(_), Some(cert)) = (set.closure.bounded(), set.closure.witness()) {
        Status::Refuted { witness: cert }
    } else {
        match (&set.intersection, set.intersection_status) {
            (Some(j), Some(StatusKind::Supported)) if j.index() >= max_index => {
                let n = set.supported.iter().map(|c| c.n).max().unwrap_or(1);
                Status::supported(an.depth(), Some(n))
            }
            _ => Status::inconclusive(format!(
                "no supported finite factor of index >= {} closed under intersection, and forced vectors do not bound the index",
                set.max_index
            )),
        }
    };
    let mut v = CriterionVerdict::new("some-infinite-odometer-factor", status)
        .param("max_index", set.max_index)
        .param("epsilon", fmt(an.epsilon()))
        .param("depth", an.depth())
        .param("window", WINDOW);
    v.notes.push(format!(
        "pool {}: {} supported, {} refuted, {} inconclusive",
        set.pool_size,
        set.supported.len(),
        set.refuted,
        set.inconclusive
    ));
    if let Some(j) = &set.intersection {
        v.notes.push(format!("intersection of supported lattices has index {}", j.index()));
    }
    v
}

/// Whether some infinite odometer is a factor, judged by the finite factors
/// of index at most `max_index`.
///
/// Supported when the supported candidates meet in a supported lattice of
/// index at least `max_index`; refuted when the forced closure is a stable
/// full-rank lattice, which every finite factor must contain.
pub fn some_infinite_odometer_check(
    spec: &ConstructionSpec,
    max_index: u64,
    eps: &BigRational,
    depth: usize,
) -> Result<(CriterionVerdict, FFCandidateSet)> {
    let an = Analyzer::new(spec, eps, depth)?;
    let set = scan(&an, max_index)?;
    let v = verdict_for(&an, &set);
    Ok((an.gate(v), set))
}

/// Whether some free odometer is a factor. A direction forced with a fixed
/// multiple in the last windows lies in every finite factor, which refutes it.
pub fn free_odometer_factor_check(
    spec: &ConstructionSpec,
    max_index: u64,
    eps: &BigRational,
    depth: usize,
) -> Result<CriterionVerdict> {
    let an = Analyzer::new(spec, eps, depth)?;
    let closure = an.closure()?;
    let d = spec.dim();
    let mut v = if let Some(w) = free_obstruction(&closure, d) {
        CriterionVerdict::new("free-odometer-factor", Status::Refuted { witness: w })
    } else {
        let set = scan(&an, max_index)?;
        let inner = verdict_for(&an, &set);
        let status = match (&inner.status, &set.intersection) {
            (Status::Supported { .. }, Some(j)) if (0..d).all(|l| !j.order_of(&ZVec::unit(d, l)).is_one()) => {
                inner.status.clone()
            }
            (Status::Supported { .. }, _) => {
                Status::inconclusive("an infinite odometer factor is supported but some axis survives the intersection")
            }
            (s, _) => s.clone(),
        };
        let mut v = CriterionVerdict::new("free-odometer-factor", status);
        v.notes = inner.notes;
        v
    };
    v = v.param("max_index", max_index).param("epsilon", fmt(eps)).param("depth", depth).param("window", WINDOW);
    Ok(an.gate(v))
}
