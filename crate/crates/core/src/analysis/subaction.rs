//! Congruence of a one-dimensional subaction along an axis.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::CriterionVerdict;
use crate::construction::ConstructionSpec;
use crate::error::{Error, Result};
use crate::verdict::{Status, Witness};
use crate::zvec::ZVec;

/// Whether, from some level `N` on, every placement has its `axis`
/// coordinate divisible by `modulus` (tile coordinates and strides of steps
/// along the axis), so the `axis` subaction eventually factors onto
/// `Z / modulus`. `axis` is 0-based.
pub fn subaction_congruence_check(
    spec: &ConstructionSpec,
    axis: usize,
    modulus: &BigInt,
    depth: usize,
) -> Result<CriterionVerdict> {
    if axis >= spec.dim() {
        return Err(Error::InvalidSpec(format!("axis {} out of range for dimension {}", axis + 1, spec.dim())));
    }
    if !modulus.is_positive() {
        return Err(Error::InvalidSpec("modulus must be positive".into()));
    }
    if !spec.has_level(depth) {
        return Err(Error::LevelUnavailable { level: depth, depth: spec.depth() });
    }
    let mut last_bad: Option<(usize, ZVec, BigInt)> = None;
    for n in 1..depth {
        let p = spec.placements(n)?;
        let bad_tile = p.tile().iter().find(|t| !t[axis].mod_floor(modulus).is_zero()).cloned();
        let bad = bad_tile.or_else(|| {
            p.steps().iter().find(|s| s.axis == axis && !s.stride.mod_floor(modulus).is_zero()).map(|s| {
                let mut v = ZVec::zero(spec.dim());
                v[axis] = s.stride.clone();
                v
            })
        });
        if let Some(v) = bad {
            let r = v[axis].mod_floor(modulus);
            last_bad = Some((n, v, r));
        }
    }
    let first_good = last_bad.as_ref().map(|(n, _, _)| n + 1).unwrap_or(1);
    // Placements are read directly, so one level past `N` is enough evidence.
    let status = if first_good < depth {
        Status::supported(depth, Some(first_good))
    } else {
        let (level, placement, residue) = last_bad.clone().expect("a violation exists when N is too large");
        Status::Inconclusive {
            reason: format!("placements at level {level} are not all divisible by {modulus} along axis {}", axis + 1),
            witness: Some(Witness::Placement { level, axis: axis + 1, placement, residue }),
        }
    };
    let mut v = CriterionVerdict::new("subaction-congruence", status)
        .param("axis", axis + 1)
        .param("modulus", modulus.to_string())
        .param("depth", depth);
    if let Some((level, placement, residue)) = last_bad {
        if v.status.is_supported() {
            v.witnesses.push(Witness::Placement { level, axis: axis + 1, placement, residue });
        }
    }
    Ok(v)
}
