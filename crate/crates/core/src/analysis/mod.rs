//! Finite-depth decision procedures for finite-factor, odometer-factor and
//! odometer-conjugacy criteria.
//!
//! Conventions shared by every check:
//!
//! * "eventually" clauses (`exists N, for all n >= m >= N`) are scanned over
//!   `1 <= m < n <= depth`. A verdict is `Supported(N)` only when the least
//!   workable `N` leaves at least [`WINDOW`] levels of evidence, i.e.
//!   `N <= depth - WINDOW`.
//! * Refutations always carry a certificate. The main one is the forcing
//!   lemma: if `v` is not in `G` and at least `2ε` of `I_{m,n}` pairs with
//!   `i + v` inside `I_{m,n}`, then every coset of `G` misses at least `ε` of
//!   `I_{m,n}`. (Each pair has at most one member in a given coset, and each
//!   element sits in at most two pairs.)
//! * When the shapes fail the Følner diagnostic, every factor verdict is
//!   downgraded to inconclusive, since the criteria assume a Følner sequence.

mod conjugacy;
mod deviation;
mod factor;
mod forced;
mod search;
mod subaction;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::verdict::{Status, Witness};
use crate::zvec::{ratio_json, ZVec};

pub use conjugacy::{
    best_residue_set, conjugacy_check, conjugate_to_some_odometer_check, BestResidueSet, CellReport,
    ConjugateSomeOptions,
};
pub use deviation::{deviation, deviation_table, DeviationTable};
pub use factor::{finite_factor_check, odometer_factor_check, Analyzer};
pub use forced::{
    forced_at, forced_closure, forced_vectors, free_obstruction, probes, ClosureWindow, ForcedClosure, ForcedVector,
};
pub use search::{free_odometer_factor_check, some_infinite_odometer_check, CandidateSummary, FFCandidateSet};
pub use subaction::subaction_congruence_check;

/// Levels of evidence required past the least workable `N`.
pub const WINDOW: usize = 2;
/// Forced vectors at level `m` are sought in `I_{m,n}` for `m < n <= m + SPAN`.
pub const SPAN: usize = 2;
/// Gallery defaults.
pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_MAX_INDEX: u64 = 16;

pub fn default_epsilon() -> BigRational {
    BigRational::new(1.into(), 6.into())
}

/// One row of a deviation table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DevRow {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "G")]
    pub lattice: Lattice,
    #[serde(with = "ratio_json")]
    pub dev: BigRational,
    pub g_star: ZVec,
}

/// Outcome of one criterion with everything needed to audit it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionVerdict {
    pub criterion: String,
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(flatten)]
    pub status: Status,
    pub folner_flag: bool,
    pub witnesses: Vec<Witness>,
    pub tables: Vec<DevRow>,
    pub notes: Vec<String>,
}

impl CriterionVerdict {
    pub fn new(criterion: &str, status: Status) -> Self {
        CriterionVerdict {
            criterion: criterion.into(),
            params: BTreeMap::new(),
            status,
            folner_flag: false,
            witnesses: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn tables_tsv(&self) -> String {
        rows_tsv(&self.tables)
    }
}

/// Deviation rows as TSV: `m, n, G, dev, g_star`.
pub(crate) fn rows_tsv(rows: &[DevRow]) -> String {
    let mut out = String::from("m\tn\tG\tdev\tg_star\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.m,
            r.n,
            serde_json::to_string(&r.lattice.basis()).expect("json"),
            crate::zvec::fmt_ratio(&r.dev),
            serde_json::to_string(&r.g_star).expect("json"),
        ));
    }
    out
}

pub(crate) fn check_epsilon(eps: &BigRational) -> Result<()> {
    let zero = BigRational::from_integer(BigInt::from(0));
    let one = BigRational::from_integer(BigInt::from(1));
    if *eps <= zero || *eps >= one {
        return Err(Error::BadEpsilon(crate::zvec::fmt_ratio(eps)));
    }
    Ok(())
}

pub(crate) fn fmt(r: &BigRational) -> String {
    crate::zvec::fmt_ratio(r)
}
