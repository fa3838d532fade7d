//! Three-valued outcomes of finite-depth checks and the certificates they carry.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::zvec::{bigint_json, ratio_json, ZVec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    /// The truncation supports the statement, from level `n` on when that
    /// makes sense.
    Supported {
        depth: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    Refuted {
        witness: Witness,
    },
    Inconclusive {
        reason: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<Witness>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusKind {
    Supported,
    Refuted,
    Inconclusive,
}

impl Status {
    pub fn supported(depth: usize, n: Option<usize>) -> Self {
        Status::Supported { depth, n }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Status::Inconclusive { reason: reason.into(), witness: None }
    }

    pub fn kind(&self) -> StatusKind {
        match self {
            Status::Supported { .. } => StatusKind::Supported,
            Status::Refuted { .. } => StatusKind::Refuted,
            Status::Inconclusive { .. } => StatusKind::Inconclusive,
        }
    }

    pub fn is_supported(&self) -> bool {
        self.kind() == StatusKind::Supported
    }

    pub fn is_refuted(&self) -> bool {
        self.kind() == StatusKind::Refuted
    }

    pub fn is_inconclusive(&self) -> bool {
        self.kind() == StatusKind::Inconclusive
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            StatusKind::Supported => 0,
            StatusKind::Refuted => 2,
            StatusKind::Inconclusive => 3,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Status::Refuted { witness } => Some(witness),
            Status::Inconclusive { witness, .. } => witness.as_ref(),
            Status::Supported { .. } => None,
        }
    }
}

impl fmt::Display for StatusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatusKind::Supported => "supported",
            StatusKind::Refuted => "refuted",
            StatusKind::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for StatusKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "supported" => Ok(StatusKind::Supported),
            "refuted" => Ok(StatusKind::Refuted),
            "inconclusive" => Ok(StatusKind::Inconclusive),
            _ => Err(format!("unknown status {s:?}")),
        }
    }
}

/// A checkable reason attached to a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Lattice {
        lattice: Lattice,
        note: String,
    },
    Vector {
        vector: ZVec,
        note: String,
    },
    /// `v` pairs at least `pair_fraction` of `I_{m,n}` with itself; any group
    /// missing `v` has deviation at least half of that at `(m, n)`.
    Forced {
        m: usize,
        n: usize,
        vector: ZVec,
        #[serde(with = "ratio_json")]
        pair_fraction: BigRational,
        exact: bool,
    },
    /// Forced vectors at every listed tail level, none of them in `lattice`.
    ForcedTail {
        lattice: Lattice,
        certificates: Vec<Witness>,
    },
    /// Everything forced at levels `m` and `m + 1` generates `lattice`.
    Closure {
        m: usize,
        lattice: Lattice,
        generators: Vec<ZVec>,
    },
    /// `multiple * direction` is forced at every window in `windows`.
    Direction {
        direction: ZVec,
        #[serde(with = "bigint_json")]
        multiple: BigInt,
        windows: Vec<usize>,
    },
    Placement {
        level: usize,
        axis: usize,
        placement: ZVec,
        #[serde(with = "bigint_json")]
        residue: BigInt,
    },
    /// `supergroup = lattice + cofactor Z^d` is proper and contains no group
    /// of the chain: some `e_l` has order modulo it with a factor coprime to
    /// the chain's growth along axis `l` (or coprime to every index when
    /// the base is not diagonal).
    Coprime {
        #[serde(with = "bigint_json")]
        cofactor: BigInt,
        lattice: Lattice,
        supergroup: Lattice,
    },
    /// Best achievable symmetric-difference ratio is too large at every `m`.
    ResidueSet {
        l: usize,
        lattice: Lattice,
        ratios: Vec<(usize, String)>,
    },
    Nested {
        criterion: String,
        index: usize,
        inner: Box<Witness>,
    },
}
