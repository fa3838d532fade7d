use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use super::ConstructionSpec;
use crate::error::{Error, Result};
use crate::zvec::ratio_json;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerRow {
    pub level: usize,
    /// `μ(B_n)`.
    #[serde(with = "ratio_json")]
    pub base_mass: BigRational,
    /// `#F_n · μ(B_n)`.
    #[serde(with = "ratio_json")]
    pub tower_mass: BigRational,
    /// Share of `F_n` not covered by copies of tower `n - 1`
    /// (absent at level 1).
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_ratio")]
    pub spacer_fraction: Option<BigRational>,
    /// Mass of the spacers added when building tower `n`.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_ratio")]
    pub spacer_mass: Option<BigRational>,
}

fn opt_ratio<S: serde::Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => ratio_json::serialize(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureLedger {
    #[serde(with = "ratio_json")]
    pub base_mass_at_top: BigRational,
    pub rows: Vec<LedgerRow>,
    /// Whether every mass lies in `(0, 1]`.
    pub normalized: bool,
}

/// Masses fixed top-down from `μ(B_K) = base_mass_at_top`:
/// each base `B_n` is cut into `#I_{n,n+1}` levels of tower `n + 1`, so
/// `μ(B_n) = μ(B_{n+1}) · #I_{n,n+1}`.
pub fn measure_ledger(spec: &ConstructionSpec, base_mass_at_top: &BigRational) -> Result<MeasureLedger> {
    if !base_mass_at_top.is_positive() {
        return Err(Error::InvalidSpec("base mass must be positive".into()));
    }
    let k = spec.depth();
    let size = |n: usize| -> Result<BigInt> { Ok(BigInt::from(spec.shape(n)?.cardinality())) };
    let mut base = vec![base_mass_at_top.clone(); k + 1];
    for n in (1..k).rev() {
        let p = BigInt::from(spec.placements(n)?.len());
        base[n] = &base[n + 1] * BigRational::from_integer(p);
    }
    let mut rows = Vec::with_capacity(k);
    for n in 1..=k {
        let tower = &base[n] * BigRational::from_integer(size(n)?);
        let (frac, added) = if n >= 2 {
            let p = BigInt::from(spec.placements(n - 1)?.len());
            let covered = BigRational::new(p * size(n - 1)?, size(n)?);
            let prev_tower = &base[n - 1] * BigRational::from_integer(size(n - 1)?);
            (Some(BigRational::one() - covered), Some(&tower - prev_tower))
        } else {
            (None, None)
        };
        rows.push(LedgerRow {
            level: n,
            base_mass: base[n].clone(),
            tower_mass: tower,
            spacer_fraction: frac,
            spacer_mass: added,
        });
    }
    let one = BigRational::one();
    let normalized = rows.iter().all(|r| r.base_mass.is_positive() && r.tower_mass <= one);
    Ok(MeasureLedger { base_mass_at_top: base_mass_at_top.clone(), rows, normalized })
}
