//! Exact combinatorics of Følner rank-one `Z^d` cutting-and-stacking
//! constructions and `Z^d`-odometers.
//!
//! Everything is integer or rational arithmetic with arbitrary precision.
//! Statements that quantify over infinitely many levels are evaluated at a
//! finite depth and come back as a three-valued [`Status`]: supported by the
//! truncation, refuted by an explicit certificate, or inconclusive.
//!
//! ```
//! use rankone::lattice::Lattice;
//! use rankone::zvec::ZVec;
//!
//! let l = Lattice::canonicalize(2, &[ZVec::from_i64s(&[2, 0]), ZVec::from_i64s(&[1, 3])]).unwrap();
//! assert_eq!(l.index(), 6.into());
//! assert!(l.contains(&ZVec::from_i64s(&[3, 3])));
//! ```

pub mod analysis;
pub mod cli;
pub mod construction;
pub mod descendants;
pub mod error;
pub mod gallery;
pub mod lattice;
pub mod odometer;
pub mod report;
pub mod verdict;
pub mod zvec;

pub use error::{Error, Result};
pub use verdict::{Status, Witness};
