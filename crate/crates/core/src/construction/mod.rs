//! Stacking rank-one constructions as shapes `F_n` and placement sets
//! `I_{n,n+1}`, plus the diagnostics computed from them.

mod folner;
mod ledger;
mod placements;
mod shape;
mod validate;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zvec::ZVec;

pub use folner::{
    default_threshold, folner_deficiency, folner_report, unit_vectors, FolnerReport, FolnerRow,
    DEFAULT_FOLNER_THRESHOLD,
};
pub use ledger::{measure_ledger, LedgerRow, MeasureLedger};
pub use placements::{biguint_json, Factor, Placements, Step};
pub use shape::ShapeSpec;
pub use validate::{validate, validate_by_enumeration, Violation, ViolationKind};

/// Level `n` of a construction: the shape `F_n` and, for `n >= 2`, the
/// placements `I_{n-1,n}` of copies of tower `n - 1` inside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Level {
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placements: Option<Placements>,
}

/// Closed-form level generators, used to extend a spec past its stored depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstructionRule {
    /// Chacon towers `[0, h_n)^dim` with `h_1 = 1`, `h_{n+1} = 3 h_n + 1`,
    /// placed at `{0, h_n, 2 h_n + 1}^dim`.
    Chacon { dim: usize },
    /// Two staggered rows of `t_n` copies of `[0, 2^{4^{n-1}}) x [0, 2^n)`.
    Staggered,
    /// Odometer towers `prod_l [0, b_l^n)` with no spacers.
    DiagonalOdometer { base: ZVec },
}

pub fn chacon_height(n: usize) -> BigInt {
    (BigInt::from(3u8).pow(n as u32) - 1u8) / 2u8
}

/// `2^{4^{n-1}}`, the width of staggered tower `n`.
pub fn staggered_width(n: usize) -> BigInt {
    BigInt::one() << 4usize.pow(n as u32 - 1)
}

/// `t_n = 2^{4^n - 4^{n-1}} - 1` copies per row when building tower `n + 1`.
pub fn staggered_copies(n: usize) -> BigUint {
    let e = 4usize.pow(n as u32) - 4usize.pow(n as u32 - 1);
    (BigUint::one() << e) - 1u8
}

impl ConstructionRule {
    pub fn dim(&self) -> usize {
        match self {
            ConstructionRule::Chacon { dim } => *dim,
            ConstructionRule::Staggered => 2,
            ConstructionRule::DiagonalOdometer { base } => base.dim(),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            ConstructionRule::Chacon { dim: 0 } => Err(Error::InvalidSpec("chacon rule needs dim >= 1".into())),
            ConstructionRule::DiagonalOdometer { base }
                if base.dim() == 0 || base.iter().any(|b| *b < BigInt::one()) =>
            {
                Err(Error::InvalidSpec("odometer base entries must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Level `n >= 1`.
    pub fn level(&self, n: usize) -> Level {
        assert!(n >= 1, "levels start at 1");
        match self {
            ConstructionRule::Chacon { dim } => {
                let h = chacon_height(n);
                let shape = ShapeSpec::rect(vec![h; *dim]).expect("positive height");
                let placements = (n >= 2).then(|| {
                    let h = chacon_height(n - 1);
                    let s = [BigInt::from(0u8), h.clone(), 2u8 * &h + 1u8];
                    let mut tile: Vec<ZVec> = vec![ZVec(Vec::new())];
                    for _ in 0..*dim {
                        tile = tile
                            .iter()
                            .flat_map(|t| {
                                s.iter().map(move |x| {
                                    let mut v = t.0.clone();
                                    v.push(x.clone());
                                    ZVec(v)
                                })
                            })
                            .collect();
                    }
                    Placements::explicit(tile).expect("nonempty")
                });
                Level { shape, placements }
            }
            ConstructionRule::Staggered => {
                let shape = ShapeSpec::rect(vec![staggered_width(n), BigInt::one() << n]).expect("positive");
                let placements = (n >= 2).then(|| {
                    let m = n - 1;
                    let tile = vec![ZVec::zero(2), ZVec(vec![BigInt::one(), BigInt::one() << m])];
                    let step = Step { axis: 0, stride: staggered_width(m), count: staggered_copies(m) };
                    Placements::new(tile, vec![step]).expect("well formed")
                });
                Level { shape, placements }
            }
            ConstructionRule::DiagonalOdometer { base } => {
                let pow = |k: usize| -> Vec<BigInt> { base.iter().map(|b| b.pow(k as u32)).collect() };
                let shape = ShapeSpec::rect(pow(n)).expect("positive");
                let placements = (n >= 2).then(|| {
                    let prev = pow(n - 1);
                    let steps = base
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| !b.is_one())
                        .map(|(axis, b)| Step { axis, stride: prev[axis].clone(), count: b.magnitude().clone() })
                        .collect();
                    Placements::new(vec![ZVec::zero(base.dim())], steps).expect("well formed")
                });
                Level { shape, placements }
            }
        }
    }
}

/// A depth-`K` prefix of a stacking construction, optionally with a rule
/// that generates deeper levels on demand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionSpec {
    dim: usize,
    levels: Vec<Level>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<ConstructionRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    dim: usize,
    levels: Vec<Level>,
    #[serde(default)]
    rule: Option<ConstructionRule>,
}

impl<'de> Deserialize<'de> for ConstructionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SpecJson::deserialize(d)?;
        ConstructionSpec::new(raw.dim, raw.levels, raw.rule).map_err(serde::de::Error::custom)
    }
}

impl ConstructionSpec {
    /// Checks structure only (dimensions, which levels carry placements);
    /// geometric consistency is [`validate`]'s job.
    pub fn new(dim: usize, levels: Vec<Level>, rule: Option<ConstructionRule>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if levels.is_empty() {
            return Err(Error::InvalidSpec("a construction needs at least one level".into()));
        }
        for (i, lv) in levels.iter().enumerate() {
            if lv.shape.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: lv.shape.dim() });
            }
            match (&lv.placements, i) {
                (Some(_), 0) => {
                    return Err(Error::InvalidSpec("level 1 has no placements".into()));
                }
                (None, i) if i > 0 => {
                    return Err(Error::InvalidSpec(format!("level {} is missing placements", i + 1)));
                }
                (Some(p), _) if p.dim() != dim => {
                    return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
                }
                _ => {}
            }
        }
        if let Some(r) = &rule {
            r.check()?;
            if r.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
            }
        }
        Ok(ConstructionSpec { dim, levels, rule })
    }

    /// Materializes levels `1..=depth` of a rule.
    pub fn from_rule(rule: ConstructionRule, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidSpec("depth must be at least 1".into()));
        }
        rule.check()?;
        let levels = (1..=depth).map(|n| rule.level(n)).collect();
        Self::new(rule.dim(), levels, Some(rule))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored levels.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn rule(&self) -> Option<&ConstructionRule> {
        self.rule.as_ref()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Whether level `n` is stored or derivable from the rule.
    pub fn has_level(&self, n: usize) -> bool {
        n >= 1 && (n <= self.levels.len() || self.rule.is_some())
    }

    /// Deepest usable level not exceeding `n`.
    pub fn available(&self, n: usize) -> usize {
        if self.rule.is_some() {
            n
        } else {
            n.min(self.levels.len())
        }
    }

    pub fn level(&self, n: usize) -> Result<Level> {
        if n >= 1 && n <= self.levels.len() {
            return Ok(self.levels[n - 1].clone());
        }
        match &self.rule {
            Some(r) if n >= 1 => Ok(r.level(n)),
            _ => Err(Error::LevelUnavailable { level: n, depth: self.levels.len() }),
        }
    }

    pub fn shape(&self, n: usize) -> Result<ShapeSpec> {
        self.level(n).map(|l| l.shape)
    }

    /// `P_n = I_{n,n+1}`, stored with level `n + 1`.
    pub fn placements(&self, n: usize) -> Result<Placements> {
        if n == 0 {
            return Err(Error::LevelUnavailable { level: 0, depth: self.levels.len() });
        }
        self.level(n + 1).map(|l| l.placements.expect("levels past the first carry placements"))
    }

    /// The first `depth` levels, keeping the rule.
    pub fn truncate(&self, depth: usize) -> Result<Self> {
        let levels = (1..=depth).map(|n| self.level(n)).collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, levels, self.rule.clone())
    }
}
