//! Finite factors and odometer factors of a construction.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::deviation::deviation_table;
use super::forced::{closure_from, forced_at, ForcedClosure, ForcedVector};
use super::{check_epsilon, fmt, CriterionVerdict, WINDOW};
use crate::construction::{default_threshold, folner_report, unit_vectors, ConstructionSpec, FolnerReport};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, DENSE_LIMIT};
use crate::odometer::OdometerSpec;
use crate::verdict::{Status, Witness};

/// Shared state for running many checks against one construction: the
/// Følner report and forced vectors are computed once.
pub struct Analyzer<'a> {
    spec: &'a ConstructionSpec,
    eps: BigRational,
    depth: usize,
    folner: FolnerReport,
    forced: RefCell<BTreeMap<usize, Vec<ForcedVector>>>,
}

impl<'a> Analyzer<'a> {
    pub fn new(spec: &'a ConstructionSpec, eps: &BigRational, depth: usize) -> Result<Self> {
        check_epsilon(eps)?;
        if depth < 2 {
            return Err(Error::InvalidSpec("depth must be at least 2".into()));
        }
        if !spec.has_level(depth) {
            return Err(Error::LevelUnavailable { level: depth, depth: spec.depth() });
        }
        let folner = folner_report(spec, &unit_vectors(spec.dim()), depth, &default_threshold())?;
        Ok(Analyzer { spec, eps: eps.clone(), depth, folner, forced: RefCell::new(BTreeMap::new()) })
    }

    pub fn spec(&self) -> &ConstructionSpec {
        self.spec
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.eps
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn folner(&self) -> &FolnerReport {
        &self.folner
    }

    /// Vectors forced at level `m` (pair fraction at least `2 eps`).
    pub fn forced(&self, m: usize) -> Result<Vec<ForcedVector>> {
        if let Some(f) = self.forced.borrow().get(&m) {
            return Ok(f.clone());
        }
        let threshold = &self.eps * BigRational::from_integer(2.into());
        let f = forced_at(self.spec, m, &threshold, &[])?;
        self.forced.borrow_mut().insert(m, f.clone());
        Ok(f)
    }

    pub fn closure(&self) -> Result<ForcedClosure> {
        for m in 1..self.depth {
            self.forced(m)?;
        }
        closure_from(self.spec.dim(), &self.forced.borrow(), self.depth)
    }

    /// Whether `G` can be supported at this depth at all: a factor from
    /// level `N` needs `#F_N` at least the index.
    pub fn in_reach(&self, g: &Lattice) -> Result<bool> {
        let top = self.depth.saturating_sub(WINDOW).max(1);
        Ok(BigInt::from(self.spec.shape(top)?.cardinality()) >= g.index())
    }

    fn tail(&self) -> std::ops::RangeInclusive<usize> {
        self.depth.saturating_sub(WINDOW).max(1)..=self.depth - 1
    }

    /// Downgrades a verdict when the shapes are not Følner.
    pub(crate) fn gate(&self, mut v: CriterionVerdict) -> CriterionVerdict {
        v.folner_flag = self.folner.flag;
        if self.folner.flag && !v.status.is_inconclusive() {
            let was = v.status.kind();
            let witness = v.status.witness().cloned();
            let dirs: Vec<String> = self.folner.suspect.iter().map(|u| u.to_string()).collect();
            v.status = Status::Inconclusive {
                reason: format!(
                    "shapes are not Følner along {}; without the flag the verdict is {was}",
                    dirs.join(", ")
                ),
                witness,
            };
        }
        v
    }

    /// Whether `Z^d / G` is eventually a factor, i.e. `dev_{m,n}(G) < eps`
    /// for all `n > m >= N`.
    pub fn finite_factor(&self, g: &Lattice) -> Result<CriterionVerdict> {
        let d = self.spec.dim();
        if g.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.dim() });
        }
        if !self.in_reach(g)? {
            let status = Status::inconclusive(format!(
                "index {} exceeds #F_{} so no N <= depth - {WINDOW} can work",
                g.index(),
                self.depth.saturating_sub(WINDOW).max(1)
            ));
            let v = CriterionVerdict::new("finite-factor", status)
                .param("lattice", g)
                .param("epsilon", fmt(&self.eps))
                .param("depth", self.depth)
                .param("window", WINDOW);
            return Ok(self.gate(v));
        }
        let table = deviation_table(self.spec, g, self.depth)?;
        let mut certs = Vec::new();
        for m in self.tail() {
            match self.forced(m)?.into_iter().find(|f| !g.contains(&f.vector)) {
                Some(f) => certs.push(f.witness()),
                None => break,
            }
        }
        let all_tail = certs.len() == self.tail().count();
        let n = table.least_n(&self.eps);
        let status = if all_tail {
            Status::Refuted { witness: Witness::ForcedTail { lattice: g.clone(), certificates: certs.clone() } }
        } else if n + WINDOW <= self.depth {
            Status::supported(self.depth, Some(n))
        } else {
            let reason = match table.first_violation(&self.eps, 1) {
                Some(r) => format!(
                    "dev_{{{},{}}} = {} >= {} and no forced vector outside G at every tail level",
                    r.m,
                    r.n,
                    fmt(&r.dev),
                    fmt(&self.eps)
                ),
                None => format!("depth {} too shallow for a supported N", self.depth),
            };
            Status::Inconclusive { reason, witness: certs.first().cloned() }
        };
        let mut v = CriterionVerdict::new("finite-factor", status)
            .param("lattice", g)
            .param("epsilon", fmt(&self.eps))
            .param("depth", self.depth)
            .param("window", WINDOW);
        if !all_tail {
            v.witnesses = certs;
        }
        v.tables = table.rows;
        Ok(self.gate(v))
    }

    /// Every group of the chain is a finite factor.
    pub fn odometer_factor(&self, odo: &OdometerSpec) -> Result<CriterionVerdict> {
        if odo.dim() != self.spec.dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), got: odo.dim() });
        }
        let mut tables = Vec::new();
        let mut notes = Vec::new();
        let mut open: Option<Status> = None;
        let mut refuted = None;
        let mut top_n = 1;
        let mut checked = 0;
        for (j, g) in odo.chain().iter().enumerate() {
            let j = j + 1;
            if g.index() > BigInt::from(DENSE_LIMIT) || !self.in_reach(g)? {
                notes.push(format!("groups from {j} on are out of reach at depth {}", self.depth));
                break;
            }
            checked += 1;
            let v = self.finite_factor(g)?;
            tables.extend(v.tables);
            notes.push(format!("group {j}: {}", v.status.kind()));
            match v.status {
                Status::Supported { n, .. } => top_n = top_n.max(n.unwrap_or(1)),
                Status::Refuted { witness } => {
                    refuted =
                        Some(Witness::Nested { criterion: "finite-factor".into(), index: j, inner: Box::new(witness) });
                    break;
                }
                s @ Status::Inconclusive { .. } => {
                    open.get_or_insert(s);
                }
            }
        }
        let status = match (refuted, open) {
            (Some(witness), _) => Status::Refuted { witness },
            (None, Some(s)) => s,
            (None, None) if checked == 0 => Status::inconclusive("no group of the chain is within reach"),
            (None, None) => Status::supported(self.depth, Some(top_n)),
        };
        let mut v = CriterionVerdict::new("odometer-factor", status)
            .param("odometer", odo)
            .param("epsilon", fmt(&self.eps))
            .param("depth", self.depth);
        v.tables = tables;
        v.notes = notes;
        Ok(self.gate(v))
    }
}

/// Whether `Z^d / G` is eventually a factor of the construction.
pub fn finite_factor_check(
    spec: &ConstructionSpec,
    g: &Lattice,
    eps: &BigRational,
    depth: usize,
) -> Result<CriterionVerdict> {
    Analyzer::new(spec, eps, depth)?.finite_factor(g)
}

/// Whether the odometer is a factor: each group of its chain must be.
pub fn odometer_factor_check(
    spec: &ConstructionSpec,
    odo: &OdometerSpec,
    eps: &BigRational,
    depth: usize,
) -> Result<CriterionVerdict> {
    Analyzer::new(spec, eps, depth)?.odometer_factor(odo)
}
