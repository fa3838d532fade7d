//! Descendant sets of the Chacon construction, listed and counted by coset.

use rankone::construction::{ConstructionRule, ConstructionSpec};
use rankone::descendants::{cardinality, compose_exact, compose_hist, pair_fraction};
use rankone::lattice::Lattice;
use rankone::zvec::{fmt_ratio, ZVec};

fn main() -> Result<(), rankone::Error> {
    let spec = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 1 }, 8)?;
    let i13: Vec<String> = compose_exact(&spec, 1, 3, 100)?.iter().map(|v| v[0].to_string()).collect();
    println!("I_1,3 = {{{}}}", i13.join(", "));
    println!("#I_1,8 = {}", cardinality(&spec, 1, 8)?);

    let h = compose_hist(&spec, 1, 8, &Lattice::diagonal_i64(&[3]))?;
    print!("I_1,8 modulo 3\n{}", h.to_tsv());

    let pf = pair_fraction(&spec, 2, 5, &ZVec::from_i64s(&[4]), 10_000)?;
    println!("pair fraction of 4 in I_2,5: {}", fmt_ratio(&pf));
    Ok(())
}
