//! `Z^d`-odometers given by decreasing chains of finite-index lattices.
//!
//! A chain is stored as a finite prefix `G_1 ⊇ ... ⊇ G_K`. An optional rule
//! says how it continues: `pow` (`G_j = B^j Z^d` for an integer matrix `B`)
//! or `explicit` (the last group repeats forever). Without a rule, questions
//! about the infinite chain stay open past the prefix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::construction::ShapeSpec;
use crate::error::{Error, Result};
use crate::lattice::{mat_vec, Lattice, Residue};
use crate::verdict::{Status, Witness};
use crate::zvec::ZVec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ChainRule {
    /// `G_j = B^j Z^d`; `base` is the matrix `B` as a list of rows.
    Pow { base: Vec<ZVec> },
    /// The stored groups, then the last one repeated.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdometerSpec {
    dim: usize,
    chain: Vec<Lattice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<ChainRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OdometerJson {
    dim: usize,
    chain: Vec<Lattice>,
    #[serde(default)]
    rule: Option<ChainRule>,
}

impl<'de> Deserialize<'de> for OdometerSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OdometerJson::deserialize(d)?;
        OdometerSpec::new(raw.dim, raw.chain, raw.rule).map_err(serde::de::Error::custom)
    }
}

/// Finite-depth verdict about an odometer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FFVerdict {
    #[serde(flatten)]
    pub status: Status,
    pub depth: usize,
}

impl FFVerdict {
    fn new(status: Status, depth: usize) -> Self {
        FFVerdict { status, depth }
    }
}

fn columns_of(rows: &[ZVec]) -> Vec<ZVec> {
    let d = rows.len();
    (0..d).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

fn determinant(rows: &[ZVec]) -> BigInt {
    // Fraction-free elimination (Bareiss).
    let d = rows.len();
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d {
        if m[k][k].is_zero() {
            match (k + 1..d).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[d - 1][d - 1]
}

/// A nonzero integer vector `v` with `M v = 0`, if one exists.
fn integer_kernel(rows: &[Vec<BigInt>]) -> Option<ZVec> {
    let d = rows.first().map(|r| r.len())?;
    let mut m: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..d {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot = m[row].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free = (0..d).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); d];
    v[free] = BigRational::one();
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = -m[r][free].clone();
    }
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    Some(v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect())
}

/// Strips from `o` every prime it shares with `b`; returns the number of
/// rounds and what is left. `o | b^N` iff the remainder is 1 and `N >= rounds`.
fn strip(o: &BigInt, b: &BigInt) -> (usize, BigInt) {
    let mut r = o.abs();
    let b = b.abs();
    let mut rounds = 0;
    loop {
        let g = r.gcd(&b);
        if g.is_one() || r.is_one() {
            return (rounds, r);
        }
        r /= g;
        rounds += 1;
    }
}

impl OdometerSpec {
    pub fn new(dim: usize, chain: Vec<Lattice>, rule: Option<ChainRule>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if chain.is_empty() {
            return Err(Error::InvalidSpec("chain must contain at least one group".into()));
        }
        for g in &chain {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
            }
        }
        for j in 1..chain.len() {
            if !chain[j].is_sublattice_of(&chain[j - 1]) {
                return Err(Error::NotDecreasing(j + 1));
            }
        }
        if let Some(ChainRule::Pow { base }) = &rule {
            if base.len() != dim || base.iter().any(|r| r.dim() != dim) {
                return Err(Error::InvalidSpec("pow base must be a d x d matrix".into()));
            }
            if determinant(base).is_zero() {
                return Err(Error::InvalidSpec("pow base is singular".into()));
            }
            let mut g = Lattice::identity(dim);
            for (j, stored) in chain.iter().enumerate() {
                g = g.image_under(&columns_of(base))?;
                if *stored != g {
                    return Err(Error::InvalidSpec(format!("group {} does not match the pow rule", j + 1)));
                }
            }
        }
        Ok(OdometerSpec { dim, chain, rule })
    }

    /// `G_j = B^j Z^d` for `j = 1..=depth`; `base` is given by rows.
    pub fn pow(base: Vec<ZVec>, depth: usize) -> Result<Self> {
        let dim = base.len();
        if dim == 0 || depth == 0 {
            return Err(Error::InvalidSpec("pow chains need d >= 1 and depth >= 1".into()));
        }
        if base.iter().any(|r| r.dim() != dim) {
            return Err(Error::InvalidSpec("pow base must be a d x d matrix".into()));
        }
        if determinant(&base).is_zero() {
            return Err(Error::InvalidSpec("pow base is singular".into()));
        }
        let cols = columns_of(&base);
        let mut chain = Vec::with_capacity(depth);
        let mut g = Lattice::identity(dim);
        for _ in 0..depth {
            g = g.image_under(&cols)?;
            chain.push(g.clone());
        }
        Self::new(dim, chain, Some(ChainRule::Pow { base }))
    }

    /// `G_j = diag(b_1^j, ..., b_d^j) Z^d`.
    pub fn diagonal_pow(base: &[i64], depth: usize) -> Result<Self> {
        let d = base.len();
        let rows = (0..d)
            .map(|i| {
                let mut r = ZVec::zero(d);
                r[i] = BigInt::from(base[i]);
                r
            })
            .collect();
        Self::pow(rows, depth)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.chain.len()
    }

    pub fn chain(&self) -> &[Lattice] {
        &self.chain
    }

    pub fn rule(&self) -> Option<&ChainRule> {
        self.rule.as_ref()
    }

    /// Whether [`group`](Self::group) works for every `j >= 1`.
    pub fn extends(&self) -> bool {
        self.rule.is_some()
    }

    /// The diagonal of `B` when the rule is `pow` with a diagonal base.
    pub fn pow_diagonal(&self) -> Option<Vec<BigInt>> {
        match &self.rule {
            Some(ChainRule::Pow { base }) => {
                let d = base.len();
                let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || base[i][j].is_zero()));
                diagonal.then(|| (0..d).map(|i| base[i][i].clone()).collect())
            }
            _ => None,
        }
    }

    /// `G_j`, 1-based, using the rule past the stored prefix.
    pub fn group(&self, j: usize) -> Result<Lattice> {
        if j >= 1 && j <= self.chain.len() {
            return Ok(self.chain[j - 1].clone());
        }
        match (&self.rule, j) {
            (_, 0) | (None, _) => Err(Error::LevelUnavailable { level: j, depth: self.chain.len() }),
            (Some(ChainRule::Explicit), _) => Ok(self.chain[self.chain.len() - 1].clone()),
            (Some(ChainRule::Pow { base }), _) => {
                let cols = columns_of(base);
                let mut g = self.chain[self.chain.len() - 1].clone();
                for _ in self.chain.len()..j {
                    g = g.image_under(&cols)?;
                }
                Ok(g)
            }
        }
    }

    /// The first `depth` groups, keeping the rule.
    pub fn truncate(&self, depth: usize) -> Result<Self> {
        let chain = (1..=depth).map(|j| self.group(j)).collect::<Result<Vec<_>>>()?;
        Self::new(self.dim, chain, self.rule.clone())
    }
}

/// A point of the depth-`K` truncation: one coset of each `G_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OdometerPoint {
    #[serde(skip)]
    spec: OdometerSpec,
    coords: Vec<Residue>,
}

impl OdometerPoint {
    /// Checks `q_j(x_{j+1}) = x_j`.
    pub fn new(spec: &OdometerSpec, coords: Vec<Residue>) -> Result<Self> {
        if coords.len() != spec.depth() {
            return Err(Error::InvalidSpec(format!("expected {} coordinates, got {}", spec.depth(), coords.len())));
        }
        for (j, c) in coords.iter().enumerate() {
            if c.lattice() != &spec.chain[j] {
                return Err(Error::InvalidSpec(format!("coordinate {} is over the wrong lattice", j + 1)));
            }
            if j > 0 && c.project(&spec.chain[j - 1])? != coords[j - 1] {
                return Err(Error::InvalidSpec(format!("coordinate {} does not project to coordinate {}", j + 1, j)));
            }
        }
        Ok(OdometerPoint { spec: spec.clone(), coords })
    }

    /// The image of `v` under `Z^d -> X`, `v -> (v + G_1, v + G_2, ...)`.
    pub fn from_vector(spec: &OdometerSpec, v: &ZVec) -> Result<Self> {
        let coords = spec.chain.iter().map(|g| g.try_reduce(v)).collect::<Result<Vec<_>>>()?;
        Ok(OdometerPoint { spec: spec.clone(), coords })
    }

    pub fn coords(&self) -> &[Residue] {
        &self.coords
    }

    pub fn spec(&self) -> &OdometerSpec {
        &self.spec
    }

    /// `σ^v`: translate every coordinate by `v`.
    pub fn act(&self, v: &ZVec) -> Result<Self> {
        if v.dim() != self.spec.dim {
            return Err(Error::DimensionMismatch { expected: self.spec.dim, got: v.dim() });
        }
        Ok(OdometerPoint { spec: self.spec.clone(), coords: self.coords.iter().map(|c| c.translate(v)).collect() })
    }
}

/// `μ(π_j^{-1}(x + G_j)) = 1 / [Z^d : G_j]`.
pub fn coordinate_measure(spec: &OdometerSpec, j: usize) -> Result<BigRational> {
    Ok(BigRational::new(BigInt::one(), spec.group(j)?.index()))
}

/// Freeness: the intersection of the chain is `{0}`.
pub fn is_free_at_depth(spec: &OdometerSpec) -> FFVerdict {
    let k = spec.depth();
    let last = spec.chain[k - 1].clone();
    match &spec.rule {
        Some(ChainRule::Pow { base }) => {
            if let Some(diag) = spec.pow_diagonal() {
                if let Some(l) = diag.iter().position(|b| b.abs().is_one()) {
                    let v = ZVec::unit(spec.dim, l);
                    return FFVerdict::new(
                        Status::Refuted {
                            witness: Witness::Vector { vector: v, note: "fixed by the base, so in every group".into() },
                        },
                        k,
                    );
                }
                return FFVerdict::new(Status::supported(k, None), k);
            }
            let d = spec.dim;
            for sign in [1i32, -1] {
                let m: Vec<Vec<BigInt>> = (0..d)
                    .map(|i| {
                        (0..d).map(|j| &base[i][j] - if i == j { BigInt::from(sign) } else { BigInt::zero() }).collect()
                    })
                    .collect();
                if let Some(v) = integer_kernel(&m) {
                    return FFVerdict::new(
                        Status::Refuted {
                            witness: Witness::Vector {
                                vector: v,
                                note: format!("B v = {sign} v, so v lies in every group"),
                            },
                        },
                        k,
                    );
                }
            }
            FFVerdict::new(
                Status::Inconclusive {
                    reason: "non-diagonal base without a fixed vector".into(),
                    witness: Some(Witness::Lattice { lattice: last, note: "deepest group".into() }),
                },
                k,
            )
        }
        Some(ChainRule::Explicit) => FFVerdict::new(
            Status::Refuted {
                witness: Witness::Lattice {
                    lattice: last,
                    note: "the chain is eventually this finite-index group".into(),
                },
            },
            k,
        ),
        None => FFVerdict::new(
            Status::Inconclusive {
                reason: "bare truncation; the intersection so far is the deepest group".into(),
                witness: Some(Witness::Lattice { lattice: last, note: "deepest group".into() }),
            },
            k,
        ),
    }
}

/// Infiniteness: `G_j ≠ G_{j+1}` for infinitely many `j`.
pub fn is_infinite_at_depth(spec: &OdometerSpec) -> FFVerdict {
    let k = spec.depth();
    let last = spec.chain[k - 1].clone();
    match &spec.rule {
        Some(ChainRule::Pow { base }) => {
            if determinant(base).abs().is_one() {
                FFVerdict::new(
                    Status::Refuted {
                        witness: Witness::Lattice { lattice: last, note: "unimodular base, constant chain".into() },
                    },
                    k,
                )
            } else {
                FFVerdict::new(Status::supported(k, None), k)
            }
        }
        Some(ChainRule::Explicit) => FFVerdict::new(
            Status::Refuted {
                witness: Witness::Lattice { lattice: last, note: "padded chain is eventually constant".into() },
            },
            k,
        ),
        None => FFVerdict::new(
            Status::inconclusive(format!(
                "bare truncation with {} distinct groups",
                spec.chain.windows(2).filter(|w| w[0] != w[1]).count() + 1
            )),
            k,
        ),
    }
}

/// Whether `H ⊇ G_N` for some `N`, i.e. `H` is a finite factor of the odometer.
pub fn ff_contains(spec: &OdometerSpec, h: &Lattice) -> Result<FFVerdict> {
    if h.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, got: h.dim() });
    }
    let k = spec.depth();
    if let Some(n) = spec.chain.iter().position(|g| g.is_sublattice_of(h)) {
        return Ok(FFVerdict::new(Status::supported(k, Some(n + 1)), k));
    }
    let coprime = |cofactor: BigInt| -> Result<FFVerdict> {
        let supergroup = h.join(&Lattice::scaled_identity(spec.dim, &cofactor))?;
        Ok(FFVerdict::new(
            Status::Refuted { witness: Witness::Coprime { cofactor, lattice: h.clone(), supergroup } },
            k,
        ))
    };
    match &spec.rule {
        Some(ChainRule::Explicit) => {
            let last = &spec.chain[k - 1];
            let col = last.basis().iter().find(|c| !h.contains(c)).expect("not a sublattice").clone();
            Ok(FFVerdict::new(
                Status::Refuted {
                    witness: Witness::Vector {
                        vector: col,
                        note: "in every group of the padded chain but not in H".into(),
                    },
                },
                k,
            ))
        }
        Some(ChainRule::Pow { base }) => {
            if let Some(diag) = spec.pow_diagonal() {
                // diag(b^N) ⊆ H iff the order o_l of e_l mod H divides b_l^N.
                let mut need = 1usize;
                let escapes = |g: &Lattice| {
                    diag.iter().enumerate().any(|(k, b)| !strip(&g.order_of(&ZVec::unit(spec.dim, k)), b).1.is_one())
                };
                for (l, b) in diag.iter().enumerate() {
                    let o = h.order_of(&ZVec::unit(spec.dim, l));
                    let (rounds, rest) = strip(&o, b);
                    if !rest.is_one() {
                        // H + rest Z^d can collapse onto a factor; then fall
                        // back to the order of e_l itself.
                        if escapes(&h.join(&Lattice::scaled_identity(spec.dim, &rest))?) {
                            return coprime(rest);
                        }
                        let note =
                            format!("order {o} modulo H has the factor {rest} coprime to {b}, but b^N e_l lies in G_N");
                        return Ok(FFVerdict::new(
                            Status::Refuted { witness: Witness::Vector { vector: ZVec::unit(spec.dim, l), note } },
                            k,
                        ));
                    }
                    need = need.max(rounds);
                }
                return Ok(FFVerdict::new(Status::supported(k, Some(need.max(1))), k));
            }
            // index(G_N) = |det B|^N must be a multiple of index(H).
            let det = determinant(base);
            let (_, rest) = strip(&h.index(), &det);
            if !rest.is_one() {
                return coprime(rest);
            }
            for sign in [1i32, -1] {
                let d = spec.dim;
                let m: Vec<Vec<BigInt>> = (0..d)
                    .map(|i| {
                        (0..d).map(|j| &base[i][j] - if i == j { BigInt::from(sign) } else { BigInt::zero() }).collect()
                    })
                    .collect();
                if let Some(v) = integer_kernel(&m) {
                    if !h.contains(&v) {
                        return Ok(FFVerdict::new(
                            Status::Refuted {
                                witness: Witness::Vector {
                                    vector: v,
                                    note: "fixed up to sign by the base, not in H".into(),
                                },
                            },
                            k,
                        ));
                    }
                }
            }
            let bits = h.index().bits() as usize;
            for n in k + 1..=k + bits {
                if spec.group(n)?.is_sublattice_of(h) {
                    return Ok(FFVerdict::new(Status::supported(k, Some(n)), k));
                }
            }
            Ok(FFVerdict::new(Status::inconclusive(format!("no G_N inside H for N <= {}", k + bits)), k))
        }
        None => Ok(FFVerdict::new(Status::inconclusive(format!("no G_N inside H for N <= {k} (bare truncation)")), k)),
    }
}

/// The odometer generated by a family: `G_k = H_1 ∩ ... ∩ H_k`, padded with
/// the last group.
pub fn generate_from_family(family: &[Lattice]) -> Result<OdometerSpec> {
    let first = family.first().ok_or_else(|| Error::InvalidSpec("family must be nonempty".into()))?;
    let mut chain = vec![first.clone()];
    for h in &family[1..] {
        let next = chain[chain.len() - 1].intersect(h)?;
        chain.push(next);
    }
    OdometerSpec::new(first.dim(), chain, Some(ChainRule::Explicit))
}

/// Conjugacy as equality of finite-factor sets, checked on the first
/// `depth` groups of each chain: every group of one chain must contain some
/// group of the other.
pub fn conjugate_at_depth(a: &OdometerSpec, b: &OdometerSpec, depth: usize) -> Result<FFVerdict> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    let mut open = None;
    for (x, y, name) in [(a, b, "b"), (b, a, "a")] {
        let top = if x.extends() { depth } else { depth.min(x.depth()) };
        for j in 1..=top {
            let g = x.group(j)?;
            let v = ff_contains(y, &g)?;
            match v.status {
                Status::Supported { .. } => {}
                Status::Refuted { witness } => {
                    let (lattice, note) = match witness {
                        Witness::Coprime { supergroup, .. } => (
                            supergroup,
                            format!("a finite factor of chain {name}'s partner containing no group of {name}"),
                        ),
                        _ => (g, format!("group {j} of the other chain contains no group of chain {name}")),
                    };
                    return Ok(FFVerdict::new(Status::Refuted { witness: Witness::Lattice { lattice, note } }, depth));
                }
                Status::Inconclusive { reason, .. } => {
                    open.get_or_insert(format!("group {j} against chain {name}: {reason}"));
                }
            }
        }
    }
    Ok(FFVerdict::new(
        match open {
            None => Status::supported(depth, None),
            Some(reason) => Status::inconclusive(reason),
        },
        depth,
    ))
}

/// `F_j = prod_l [0, a_{j,l,l})`, one representative of each coset of `G_j`.
pub fn tower_shapes(spec: &OdometerSpec) -> Vec<ShapeSpec> {
    spec.chain.iter().map(|g| ShapeSpec::rect(g.diagonal_entries()).expect("positive diagonal")).collect()
}

/// `B v` for `B` given by rows.
pub fn apply_rows(rows: &[ZVec], v: &ZVec) -> ZVec {
    mat_vec(&columns_of(rows), v)
}
