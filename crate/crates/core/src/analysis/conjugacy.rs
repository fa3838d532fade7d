//! Conjugacy to odometers via residue-set approximation of descendant sets.
//!
//! Condition (a) for a lattice `G` and level `l`: for all large `m` some set
//! `D` of cosets makes `{i in F_m : i + G in D}` within `eps #I_{l,m}` of
//! `I_{l,m}` in symmetric difference. Condition (b): `G` is a finite factor.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::Serialize;

use super::factor::Analyzer;
use super::forced::free_obstruction;
use super::{check_epsilon, fmt, CriterionVerdict, WINDOW};
use crate::construction::ConstructionSpec;
use crate::descendants::compose_hist;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_sublattices, shape_coset_histogram, Lattice, DENSE_LIMIT};
use crate::odometer::{generate_from_family, OdometerSpec};
use crate::verdict::{Status, Witness};
use crate::zvec::{ratio_json, ZVec};

/// The best coset set `D` for `I_{l,m}` inside `F_m` modulo `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestResidueSet {
    pub l: usize,
    pub m: usize,
    pub lattice: Lattice,
    pub set: Vec<ZVec>,
    /// `#(I_{l,m} △ {i in F_m : i + G in D}) / #I_{l,m}`.
    #[serde(with = "ratio_json")]
    pub ratio: BigRational,
}

/// Cosets are independent: `r` joins `D` exactly when `I_{l,m}` fills more
/// than half of `F_m ∩ (r + G)`.
pub fn best_residue_set(spec: &ConstructionSpec, l: usize, m: usize, g: &Lattice) -> Result<BestResidueSet> {
    if l == 0 || l > m {
        return Err(Error::InvalidSpec(format!("need 1 <= l <= m, got l={l}, m={m}")));
    }
    let f = shape_coset_histogram(&spec.shape(m)?, g)?;
    let i = compose_hist(spec, l, m, g)?;
    let mut set = Vec::new();
    let mut miss = BigUint::from(0u8);
    for (r, cf) in f.iter() {
        let ci = i.count_of(&r);
        if ci * 2u8 > *cf {
            miss += cf - ci;
            set.push(r.rep().clone());
        } else {
            miss += ci;
        }
    }
    let ratio = BigRational::new(BigInt::from(miss), BigInt::from(i.total().clone()));
    Ok(BestResidueSet { l, m, lattice: g.clone(), set, ratio })
}

/// Ratios for `m = l..=depth` and the least `N >= l` after which all stay
/// below `eps`.
fn residue_tail(
    spec: &ConstructionSpec,
    l: usize,
    g: &Lattice,
    eps: &BigRational,
    depth: usize,
) -> Result<(Vec<(usize, BigRational)>, usize)> {
    let mut ratios = Vec::new();
    for m in l..=depth {
        ratios.push((m, best_residue_set(spec, l, m, g)?.ratio));
    }
    let n = ratios.iter().filter(|(_, r)| r >= eps).map(|(m, _)| m + 1).max().unwrap_or(l).max(l);
    Ok((ratios, n))
}

fn ratio_strings(r: &[(usize, BigRational)]) -> Vec<(usize, String)> {
    r.iter().map(|(m, x)| (*m, fmt(x))).collect()
}

/// Whether the construction is conjugate to the given odometer: (a) holds
/// for every `l` with some group of the chain, and (b) the odometer is a factor.
pub fn conjugacy_check(
    spec: &ConstructionSpec,
    odo: &OdometerSpec,
    eps: &BigRational,
    depth: usize,
) -> Result<CriterionVerdict> {
    let an = Analyzer::new(spec, eps, depth)?;
    let factor = an.odometer_factor(odo)?;
    let mut notes = Vec::new();
    let mut missing = Vec::new();
    let mut top_n = 1;
    for l in 1..=depth - WINDOW.min(depth - 1) {
        let mut found = None;
        for (k, g) in odo.chain().iter().enumerate() {
            if g.index() > BigInt::from(DENSE_LIMIT) {
                break;
            }
            let (_, n) = residue_tail(spec, l, g, eps, depth)?;
            if n + WINDOW <= depth {
                found = Some((k + 1, n));
                break;
            }
        }
        match found {
            Some((k, n)) => {
                top_n = top_n.max(n);
                notes.push(format!("l={l}: group {k} from m={n}"));
            }
            None => {
                missing.push(l);
                notes.push(format!("l={l}: no group of the chain approximates I_{{l,m}}"));
            }
        }
    }
    let status = match &factor.status {
        Status::Refuted { witness } => Status::Refuted {
            witness: Witness::Nested {
                criterion: "odometer-factor".into(),
                index: 0,
                inner: Box::new(witness.clone()),
            },
        },
        Status::Supported { n, .. } if missing.is_empty() => Status::supported(depth, Some(top_n.max(n.unwrap_or(1)))),
        Status::Supported { .. } => Status::inconclusive(format!("residue approximation fails for l in {missing:?}")),
        Status::Inconclusive { reason, witness } => {
            Status::Inconclusive { reason: format!("odometer factor: {reason}"), witness: witness.clone() }
        }
    };
    let mut v = CriterionVerdict::new("conjugacy", status)
        .param("odometer", odo)
        .param("epsilon", fmt(eps))
        .param("depth", depth)
        .param("window", WINDOW);
    v.tables = factor.tables;
    v.notes = notes;
    Ok(an.gate(v))
}

/// Grid for [`conjugate_to_some_odometer_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugateSomeOptions {
    pub max_index: u64,
    pub l_max: usize,
    #[serde(serialize_with = "ser_ratios")]
    pub eps_grid: Vec<BigRational>,
    #[serde(serialize_with = "ser_ratios")]
    pub eta_grid: Vec<BigRational>,
    pub depth: usize,
}

fn ser_ratios<S: serde::Serializer>(xs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(fmt))
}

impl ConjugateSomeOptions {
    pub fn new(max_index: u64, l_max: usize, depth: usize) -> Self {
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        ConjugateSomeOptions { max_index, l_max, eps_grid: vec![r(1, 4), r(1, 8)], eta_grid: vec![r(1, 6)], depth }
    }
}

/// One `(l, eps)` cell and the first lattice (by index) satisfying (a) and (b).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellReport {
    pub l: usize,
    #[serde(with = "ratio_json")]
    pub epsilon: BigRational,
    pub lattice: Option<Lattice>,
    pub n: Option<usize>,
}

/// Searches for an odometer the construction is conjugate to: each cell
/// `(l, eps)` needs a lattice with (a) at that cell and (b) for every `eta`;
/// the witnesses generate the odometer.
pub fn conjugate_to_some_odometer_check(
    spec: &ConstructionSpec,
    opts: &ConjugateSomeOptions,
) -> Result<(CriterionVerdict, Vec<CellReport>, Option<OdometerSpec>)> {
    let depth = opts.depth;
    if opts.eta_grid.is_empty() || opts.eps_grid.is_empty() || opts.l_max == 0 {
        return Err(Error::InvalidSpec("grids must be nonempty and l_max >= 1".into()));
    }
    if opts.l_max + WINDOW > depth {
        return Err(Error::InvalidSpec(format!("l_max = {} needs depth >= {}", opts.l_max, opts.l_max + WINDOW)));
    }
    for e in &opts.eps_grid {
        check_epsilon(e)?;
    }
    let analyzers = opts.eta_grid.iter().map(|eta| Analyzer::new(spec, eta, depth)).collect::<Result<Vec<_>>>()?;
    let strict = analyzers.iter().min_by(|a, b| a.epsilon().cmp(b.epsilon())).expect("nonempty grid");
    let closure = strict.closure()?;
    let pool = enumerate_sublattices(spec.dim(), opts.max_index);
    let mut factor_cache: HashMap<Lattice, bool> = HashMap::new();
    let mut cells = Vec::new();
    for l in 1..=opts.l_max {
        for eps in &opts.eps_grid {
            let mut cell = CellReport { l, epsilon: eps.clone(), lattice: None, n: None };
            for g in &pool {
                let (_, n) = residue_tail(spec, l, g, eps, depth)?;
                if n + WINDOW > depth {
                    continue;
                }
                let ok = match factor_cache.get(g) {
                    Some(b) => *b,
                    None => {
                        let mut b = true;
                        for an in &analyzers {
                            if !an.finite_factor(g)?.status.is_supported() {
                                b = false;
                                break;
                            }
                        }
                        factor_cache.insert(g.clone(), b);
                        b
                    }
                };
                if ok {
                    cell.lattice = Some(g.clone());
                    cell.n = Some(n);
                    break;
                }
            }
            cells.push(cell);
        }
    }
    let mut notes = Vec::new();
    if let Some(w) = free_obstruction(&closure, spec.dim()) {
        notes.push(format!("no free odometer can arise: {}", serde_json::to_string(&w).expect("json")));
    }
    let failing: Vec<&CellReport> = cells.iter().filter(|c| c.lattice.is_none()).collect();
    let (status, odometer) = if failing.is_empty() {
        let family: Vec<Lattice> = cells.iter().filter_map(|c| c.lattice.clone()).collect();
        let odo = generate_from_family(&family)?;
        let n = cells.iter().filter_map(|c| c.n).max().unwrap_or(1);
        (Status::supported(depth, Some(n)), Some(odo))
    } else {
        let first = failing[0];
        let mut status = Status::inconclusive(format!(
            "{} of {} cells have no lattice of index <= {}, first (l={}, eps={})",
            failing.len(),
            cells.len(),
            opts.max_index,
            first.l,
            fmt(&first.epsilon)
        ));
        if let (Some(w), true) = (closure.bounded(), closure.stable) {
            // Every finite factor contains `w`, so only its supergroups can serve.
            let supers: Vec<Lattice> = enumerate_sublattices(spec.dim(), w.index().try_into().unwrap_or(u64::MAX))
                .into_iter()
                .filter(|h| w.is_sublattice_of(h))
                .collect();
            'cells: for c in &failing {
                let mut best: Vec<(usize, BigRational)> = Vec::new();
                for h in &supers {
                    let (ratios, _) = residue_tail(spec, c.l, h, &c.epsilon, depth)?;
                    let tail: Vec<(usize, BigRational)> =
                        ratios.into_iter().filter(|(m, _)| m + WINDOW >= depth).collect();
                    if tail.iter().any(|(_, r)| *r < c.epsilon) {
                        continue 'cells;
                    }
                    if best.is_empty() {
                        best = tail;
                    } else {
                        for (b, (_, r)) in best.iter_mut().zip(tail) {
                            if r < b.1 {
                                b.1 = r;
                            }
                        }
                    }
                }
                status = Status::Refuted {
                    witness: Witness::ResidueSet { l: c.l, lattice: w.clone(), ratios: ratio_strings(&best) },
                };
                break;
            }
        }
        (status, None)
    };
    let mut v =
        CriterionVerdict::new("conjugate-to-some-odometer", status).param("options", opts).param("odometer", &odometer);
    v.notes = notes;
    if let Some(w) = closure.witness() {
        v.witnesses.push(w);
    }
    Ok((strict.gate(v), cells, odometer))
}
