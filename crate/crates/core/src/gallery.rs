//! Named constructions and odometers with their expected verdicts.
//!
//! Case names: `chacon-z`, `chacon-product`, `staggered-z2` (constructions);
//! `horizontal-odometer`, `dyadic-z2`, `triadic-z2`, `quartic-z2`,
//! `sextic-z2` (odometers); and `odometer-as-construction(<odometer case>)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::analysis::{
    conjugacy_check, conjugate_to_some_odometer_check, finite_factor_check, free_odometer_factor_check,
    odometer_factor_check, some_infinite_odometer_check, subaction_congruence_check, ConjugateSomeOptions,
};
use crate::construction::{
    default_threshold, folner_report, unit_vectors, validate, ConstructionRule, ConstructionSpec, Level, Placements,
    ShapeSpec, Step,
};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::odometer::{
    conjugate_at_depth, ff_contains, is_free_at_depth, is_infinite_at_depth, tower_shapes, OdometerSpec,
};
use crate::verdict::{Status, StatusKind, Witness};
use crate::zvec::{fmt_ratio, ZVec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "spec", rename_all = "lowercase")]
pub enum GallerySpec {
    Construction(ConstructionSpec),
    Odometer(OdometerSpec),
}

impl GallerySpec {
    pub fn construction(&self) -> Option<&ConstructionSpec> {
        match self {
            GallerySpec::Construction(c) => Some(c),
            GallerySpec::Odometer(_) => None,
        }
    }

    pub fn odometer(&self) -> Option<&OdometerSpec> {
        match self {
            GallerySpec::Odometer(o) => Some(o),
            GallerySpec::Construction(_) => None,
        }
    }
}

/// One criterion to run against a case. Odometers are named by case and
/// built at the same depth; `axis` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "criterion", rename_all = "kebab-case")]
pub enum Check {
    Validate,
    Folner,
    FiniteFactor { lattice: Lattice, epsilon: String },
    OdometerFactor { odometer: String, epsilon: String },
    Conjugacy { odometer: String, epsilon: String },
    SomeInfiniteOdometerFactor { max_index: u64, epsilon: String },
    FreeOdometerFactor { max_index: u64, epsilon: String },
    ConjugateToSomeOdometer { max_index: u64, l_max: usize },
    SubactionCongruence { axis: usize, modulus: u64 },
    IsFree,
    IsInfinite,
    FfContains { lattice: Lattice },
    ConjugateAtDepth { other: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expectation {
    #[serde(flatten)]
    pub check: Check,
    pub expected: StatusKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GalleryCase {
    pub name: String,
    pub kind: &'static str,
    pub summary: &'static str,
    pub default_depth: usize,
    pub expected: Vec<Expectation>,
}

const EPS: &str = "1/6";

fn diag(xs: &[i64]) -> Lattice {
    Lattice::diagonal_i64(xs)
}

fn exp(check: Check, expected: StatusKind) -> Expectation {
    Expectation { check, expected }
}

fn ff(lattice: Lattice, eps: &str) -> Check {
    Check::FiniteFactor { lattice, epsilon: eps.into() }
}

const BASE_CASES: [&str; 8] = [
    "chacon-z",
    "chacon-product",
    "staggered-z2",
    "horizontal-odometer",
    "dyadic-z2",
    "triadic-z2",
    "quartic-z2",
    "sextic-z2",
];

fn odometer_base(name: &str) -> Option<Vec<i64>> {
    Some(match name {
        "horizontal-odometer" => vec![2, 1],
        "dyadic-z2" => vec![2, 2],
        "triadic-z2" => vec![3, 3],
        "quartic-z2" => vec![4, 4],
        "sextic-z2" => vec![6, 6],
        _ => return None,
    })
}

fn inner_name(name: &str) -> Option<&str> {
    name.strip_prefix("odometer-as-construction(")?.strip_suffix(')')
}

/// Every case, including the odometer-as-construction variants of the
/// odometer cases that have expectations.
pub fn list() -> Vec<GalleryCase> {
    let mut names: Vec<String> = BASE_CASES.iter().map(|s| s.to_string()).collect();
    names.push("odometer-as-construction(dyadic-z2)".into());
    names.push("odometer-as-construction(horizontal-odometer)".into());
    names.iter().map(|n| case(n).expect("listed cases exist")).collect()
}

pub fn case(name: &str) -> Result<GalleryCase> {
    use StatusKind::*;
    let c = |kind, summary, default_depth, expected| GalleryCase {
        name: name.into(),
        kind,
        summary,
        default_depth,
        expected,
    };
    Ok(match name {
        "chacon-z" => c(
            "construction",
            "Chacon towers [0, h_n) with h_{n+1} = 3 h_n + 1",
            5,
            vec![
                exp(Check::Validate, Supported),
                exp(Check::Folner, Supported),
                exp(ff(diag(&[2]), EPS), Refuted),
                exp(ff(diag(&[3]), EPS), Refuted),
                exp(ff(diag(&[1]), EPS), Supported),
                exp(Check::SubactionCongruence { axis: 1, modulus: 1 }, Supported),
            ],
        ),
        "chacon-product" => c(
            "construction",
            "Chacon squared: [0, h_n)^2 with placements S x S",
            5,
            vec![
                exp(Check::Validate, Supported),
                exp(Check::Folner, Supported),
                exp(ff(diag(&[2, 2]), EPS), Refuted),
                exp(ff(diag(&[1, 1]), EPS), Supported),
                exp(Check::OdometerFactor { odometer: "dyadic-z2".into(), epsilon: EPS.into() }, Refuted),
                exp(Check::SomeInfiniteOdometerFactor { max_index: 16, epsilon: EPS.into() }, Refuted),
                exp(Check::ConjugateToSomeOdometer { max_index: 16, l_max: 2 }, Refuted),
            ],
        ),
        "staggered-z2" => c(
            "construction",
            "two staggered rows of [0, 2^{4^{n-1}}) x [0, 2^n) towers",
            4,
            vec![
                exp(Check::Validate, Supported),
                exp(Check::Folner, Supported),
                exp(ff(diag(&[1, 2]), "1/8"), Supported),
                exp(ff(diag(&[2, 1]), "1/8"), Refuted),
                exp(Check::FreeOdometerFactor { max_index: 16, epsilon: "1/8".into() }, Refuted),
                exp(Check::SubactionCongruence { axis: 2, modulus: 8 }, Supported),
                exp(Check::SubactionCongruence { axis: 1, modulus: 2 }, Inconclusive),
            ],
        ),
        "horizontal-odometer" => c(
            "odometer",
            "chain 2^n Z x Z",
            6,
            vec![
                exp(Check::IsFree, Refuted),
                exp(Check::IsInfinite, Supported),
                exp(Check::FfContains { lattice: diag(&[4, 1]) }, Supported),
                exp(Check::FfContains { lattice: diag(&[2, 2]) }, Refuted),
            ],
        ),
        "dyadic-z2" => c(
            "odometer",
            "chain 2^n Z^2",
            6,
            vec![
                exp(Check::IsFree, Supported),
                exp(Check::IsInfinite, Supported),
                exp(Check::ConjugateAtDepth { other: "quartic-z2".into() }, Supported),
                exp(Check::ConjugateAtDepth { other: "sextic-z2".into() }, Refuted),
                exp(Check::FfContains { lattice: diag(&[3, 1]) }, Refuted),
            ],
        ),
        "triadic-z2" | "quartic-z2" | "sextic-z2" => {
            c("odometer", "chain b^n Z^2", 6, vec![exp(Check::IsFree, Supported), exp(Check::IsInfinite, Supported)])
        }
        _ => match inner_name(name) {
            Some("dyadic-z2") => c(
                "construction",
                "rectangular towers of the dyadic odometer",
                6,
                vec![
                    exp(Check::Validate, Supported),
                    exp(Check::Folner, Supported),
                    exp(ff(diag(&[2, 2]), "1/4"), Supported),
                    exp(ff(diag(&[3, 1]), EPS), Refuted),
                    exp(Check::OdometerFactor { odometer: "dyadic-z2".into(), epsilon: EPS.into() }, Supported),
                    exp(Check::Conjugacy { odometer: "dyadic-z2".into(), epsilon: EPS.into() }, Supported),
                    exp(Check::Conjugacy { odometer: "triadic-z2".into(), epsilon: EPS.into() }, Refuted),
                    exp(Check::SomeInfiniteOdometerFactor { max_index: 16, epsilon: EPS.into() }, Supported),
                    exp(Check::FreeOdometerFactor { max_index: 16, epsilon: EPS.into() }, Supported),
                    exp(Check::ConjugateToSomeOdometer { max_index: 16, l_max: 2 }, Supported),
                ],
            ),
            Some("horizontal-odometer") => c(
                "construction",
                "towers [0, 2^n) x {0}: not Følner",
                6,
                vec![
                    exp(Check::Validate, Supported),
                    exp(Check::Folner, Refuted),
                    exp(ff(diag(&[2, 2]), EPS), Inconclusive),
                ],
            ),
            Some(inner) if odometer_base(inner).is_some() => {
                c("construction", "rectangular towers of an odometer", 6, vec![])
            }
            _ => return Err(Error::UnknownCase(name.into())),
        },
    })
}

/// Rectangular towers `F_j = prod_l [0, a_{j,l,l})` of a chain of diagonal
/// lattices, each tower tiled by copies of the previous one.
pub fn odometer_as_construction(odo: &OdometerSpec) -> Result<ConstructionSpec> {
    if let Some(base) = odo.pow_diagonal() {
        if base.iter().all(|b| b >= &BigInt::from(1)) {
            return ConstructionSpec::from_rule(ConstructionRule::DiagonalOdometer { base: ZVec(base) }, odo.depth());
        }
    }
    if let Some(g) = odo.chain().iter().find(|g| !g.is_diagonal()) {
        return Err(Error::InvalidSpec(format!("odometer-as-construction needs diagonal groups, got {g}")));
    }
    let shapes = tower_shapes(odo);
    let mut levels = vec![Level { shape: shapes[0].clone(), placements: None }];
    for (j, w) in odo.chain().windows(2).enumerate() {
        let (a, b) = (w[0].diagonal_entries(), w[1].diagonal_entries());
        let mut steps = Vec::new();
        for l in 0..odo.dim() {
            let (q, r) = (&b[l] / &a[l], &b[l] % &a[l]);
            if r != BigInt::from(0) {
                return Err(Error::InvalidSpec(format!(
                    "group {} does not refine group {} along axis {}",
                    j + 2,
                    j + 1,
                    l + 1
                )));
            }
            if q > BigInt::from(1) {
                steps.push(Step { axis: l, stride: a[l].clone(), count: q.magnitude().clone() });
            }
        }
        let placements = Placements::new(vec![ZVec::zero(odo.dim())], steps)?;
        levels.push(Level { shape: shapes[j + 1].clone(), placements: Some(placements) });
    }
    ConstructionSpec::new(odo.dim(), levels, None)
}

pub fn build(name: &str, depth: usize) -> Result<GallerySpec> {
    if depth == 0 {
        return Err(Error::InvalidSpec("depth must be at least 1".into()));
    }
    if let Some(base) = odometer_base(name) {
        return Ok(GallerySpec::Odometer(OdometerSpec::diagonal_pow(&base, depth)?));
    }
    let rule = match name {
        "chacon-z" => ConstructionRule::Chacon { dim: 1 },
        "chacon-product" => ConstructionRule::Chacon { dim: 2 },
        "staggered-z2" => ConstructionRule::Staggered,
        _ => {
            let inner = inner_name(name).ok_or_else(|| Error::UnknownCase(name.into()))?;
            let odo = build(inner, depth)?;
            let odo = odo.odometer().ok_or_else(|| Error::UnknownCase(name.into()))?;
            return Ok(GallerySpec::Construction(odometer_as_construction(odo)?));
        }
    };
    Ok(GallerySpec::Construction(ConstructionSpec::from_rule(rule, depth)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    #[serde(flatten)]
    pub check: Check,
    pub expected: StatusKind,
    pub actual: StatusKind,
    pub report: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GalleryReport {
    pub case: String,
    pub depth: usize,
    pub results: Vec<CheckResult>,
    pub mismatches: usize,
}

fn parse_eps(s: &str) -> Result<BigRational> {
    crate::zvec::parse_ratio(s).ok_or_else(|| Error::BadEpsilon(s.into()))
}

fn need_construction(spec: &GallerySpec) -> Result<&ConstructionSpec> {
    spec.construction().ok_or_else(|| Error::InvalidSpec("criterion needs a construction".into()))
}

fn need_odometer(spec: &GallerySpec) -> Result<&OdometerSpec> {
    spec.odometer().ok_or_else(|| Error::InvalidSpec("criterion needs an odometer".into()))
}

fn other_odometer(name: &str, depth: usize) -> Result<OdometerSpec> {
    build(name, depth)?.odometer().cloned().ok_or_else(|| Error::UnknownCase(name.into()))
}

fn json(x: impl Serialize) -> serde_json::Value {
    serde_json::to_value(x).expect("serializable report")
}

/// Runs one check, returning the status and the full report.
pub fn run_check(spec: &GallerySpec, check: &Check, depth: usize) -> Result<(Status, serde_json::Value)> {
    Ok(match check {
        Check::Validate => {
            let c = need_construction(spec)?;
            let v = validate(c);
            let status = match v.first() {
                None => Status::supported(c.depth(), None),
                Some(x) => Status::Refuted {
                    witness: Witness::Vector {
                        vector: x.point.clone().unwrap_or_else(|| ZVec::zero(c.dim())),
                        note: x.message.clone(),
                    },
                },
            };
            (status, json(&v))
        }
        Check::Folner => {
            let c = need_construction(spec)?;
            let r = folner_report(c, &unit_vectors(c.dim()), depth, &default_threshold())?;
            let status = match r.suspect.first() {
                None => Status::supported(depth, None),
                Some(v) => Status::Refuted {
                    witness: Witness::Vector {
                        vector: v.clone(),
                        note: format!("deficiency stays >= {}", fmt_ratio(&r.threshold)),
                    },
                },
            };
            (status, json(&r))
        }
        Check::FiniteFactor { lattice, epsilon } => {
            let v = finite_factor_check(need_construction(spec)?, lattice, &parse_eps(epsilon)?, depth)?;
            (v.status.clone(), json(&v))
        }
        Check::OdometerFactor { odometer, epsilon } => {
            let odo = other_odometer(odometer, depth)?;
            let v = odometer_factor_check(need_construction(spec)?, &odo, &parse_eps(epsilon)?, depth)?;
            (v.status.clone(), json(&v))
        }
        Check::Conjugacy { odometer, epsilon } => {
            let odo = other_odometer(odometer, depth)?;
            let v = conjugacy_check(need_construction(spec)?, &odo, &parse_eps(epsilon)?, depth)?;
            (v.status.clone(), json(&v))
        }
        Check::SomeInfiniteOdometerFactor { max_index, epsilon } => {
            let (v, set) =
                some_infinite_odometer_check(need_construction(spec)?, *max_index, &parse_eps(epsilon)?, depth)?;
            (v.status.clone(), serde_json::json!({ "verdict": v, "candidates": set }))
        }
        Check::FreeOdometerFactor { max_index, epsilon } => {
            let v = free_odometer_factor_check(need_construction(spec)?, *max_index, &parse_eps(epsilon)?, depth)?;
            (v.status.clone(), json(&v))
        }
        Check::ConjugateToSomeOdometer { max_index, l_max } => {
            let opts = ConjugateSomeOptions::new(*max_index, *l_max, depth);
            let (v, cells, odo) = conjugate_to_some_odometer_check(need_construction(spec)?, &opts)?;
            (v.status.clone(), serde_json::json!({ "verdict": v, "cells": cells, "odometer": odo }))
        }
        Check::SubactionCongruence { axis, modulus } => {
            if *axis == 0 {
                return Err(Error::InvalidSpec("axes are numbered from 1".into()));
            }
            let v = subaction_congruence_check(need_construction(spec)?, axis - 1, &BigInt::from(*modulus), depth)?;
            (v.status.clone(), json(&v))
        }
        Check::IsFree => {
            let v = is_free_at_depth(need_odometer(spec)?);
            (v.status.clone(), json(&v))
        }
        Check::IsInfinite => {
            let v = is_infinite_at_depth(need_odometer(spec)?);
            (v.status.clone(), json(&v))
        }
        Check::FfContains { lattice } => {
            let v = ff_contains(need_odometer(spec)?, lattice)?;
            (v.status.clone(), json(&v))
        }
        Check::ConjugateAtDepth { other } => {
            let b = other_odometer(other, depth)?;
            let v = conjugate_at_depth(need_odometer(spec)?, &b, depth)?;
            (v.status.clone(), json(&v))
        }
    })
}

/// Runs every expectation of a case at `depth` (its default when `None`).
pub fn run_expected(name: &str, depth: Option<usize>) -> Result<GalleryReport> {
    let c = case(name)?;
    let depth = depth.unwrap_or(c.default_depth);
    let spec = build(name, depth)?;
    let mut results = Vec::new();
    for e in &c.expected {
        let (status, report) = run_check(&spec, &e.check, depth)?;
        results.push(CheckResult { check: e.check.clone(), expected: e.expected, actual: status.kind(), report });
    }
    let mismatches = results.iter().filter(|r| r.expected != r.actual).count();
    Ok(GalleryReport { case: name.into(), depth, results, mismatches })
}

/// Shape of staggered tower `n` and its closed-form Følner deficiencies
/// `2 / 2^{4^{n-1}}` along `e_1` and `2 / 2^n` along `e_2`.
pub fn staggered_folner_closed_form(n: usize) -> (ShapeSpec, BigRational, BigRational) {
    let shape = ConstructionRule::Staggered.level(n).shape;
    let two = BigInt::from(2);
    let e1 = BigRational::new(two.clone(), crate::construction::staggered_width(n));
    let e2 = BigRational::new(two, BigInt::from(1) << n);
    (shape, e1, e2)
}
