use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{ConstructionSpec, ShapeSpec};
use crate::error::Result;
use crate::zvec::{fmt_ratio, ZVec};

/// Deficiency at or above which a non-decreasing sequence is flagged.
pub fn default_threshold() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

pub const DEFAULT_FOLNER_THRESHOLD: &str = "1/2";

/// `#(F △ (F + v)) / #F`, exactly.
///
/// Since `#(F + v) = #F`, the symmetric difference has `2 (#F - #(F ∩ (F+v)))`
/// points; rectangles use the closed form for the intersection.
pub fn folner_deficiency(shape: &ShapeSpec, v: &ZVec) -> BigRational {
    let size = BigInt::from(shape.cardinality());
    let common = BigInt::from(shape.overlap_with_shift(v));
    BigRational::new(2 * (&size - common), size)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FolnerRow {
    pub level: usize,
    #[serde(serialize_with = "ser_ratios")]
    pub deficiencies: Vec<BigRational>,
}

fn ser_ratios<S: serde::Serializer>(xs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(fmt_ratio))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FolnerReport {
    pub vectors: Vec<ZVec>,
    #[serde(serialize_with = "crate::zvec::ratio_json::serialize")]
    pub threshold: BigRational,
    pub rows: Vec<FolnerRow>,
    /// Test vectors whose deficiency stays at or above the threshold without
    /// decreasing across the truncation.
    pub suspect: Vec<ZVec>,
    pub flag: bool,
}

impl FolnerReport {
    /// Deficiency of vector `i` at level `n`.
    pub fn deficiency(&self, n: usize, i: usize) -> Option<&BigRational> {
        self.rows.iter().find(|r| r.level == n).map(|r| &r.deficiencies[i])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("level");
        for v in &self.vectors {
            out.push_str(&format!("\t{v}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.level.to_string());
            for x in &r.deficiencies {
                out.push('\t');
                out.push_str(&fmt_ratio(x));
            }
            out.push('\n');
        }
        out
    }
}

/// Deficiencies of `F_1, ..., F_depth` for each test vector.
///
/// A vector is suspect when, across at least two levels, its last deficiency
/// is at least `threshold` and no smaller than its first.
pub fn folner_report(
    spec: &ConstructionSpec,
    vectors: &[ZVec],
    depth: usize,
    threshold: &BigRational,
) -> Result<FolnerReport> {
    let mut rows = Vec::with_capacity(depth);
    for n in 1..=depth {
        let shape = spec.shape(n)?;
        rows.push(FolnerRow { level: n, deficiencies: vectors.iter().map(|v| folner_deficiency(&shape, v)).collect() });
    }
    let mut suspect = Vec::new();
    if rows.len() >= 2 {
        for (i, v) in vectors.iter().enumerate() {
            let first = &rows[0].deficiencies[i];
            let last = &rows[rows.len() - 1].deficiencies[i];
            if last >= threshold && last >= first && !last.is_zero() {
                suspect.push(v.clone());
            }
        }
    }
    Ok(FolnerReport {
        vectors: vectors.to_vec(),
        threshold: threshold.clone(),
        rows,
        flag: !suspect.is_empty(),
        suspect,
    })
}

/// The standard basis `e_1, ..., e_d`.
pub fn unit_vectors(d: usize) -> Vec<ZVec> {
    (0..d).map(|l| ZVec::unit(d, l)).collect()
}
