//! Finite-factor and odometer-factor verdicts with their certificates.

use num_bigint::BigInt;
use num_rational::BigRational;
use rankone::analysis::{conjugacy_check, deviation_table, finite_factor_check, some_infinite_odometer_check};
use rankone::construction::{ConstructionRule, ConstructionSpec};
use rankone::gallery;
use rankone::lattice::Lattice;
use rankone::odometer::OdometerSpec;

fn main() -> Result<(), rankone::Error> {
    let eps = BigRational::new(BigInt::from(1), BigInt::from(6));
    let chacon = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 2 }, 5)?;
    let v = finite_factor_check(&chacon, &Lattice::diagonal_i64(&[2, 2]), &eps, 5)?;
    println!("{}", serde_json::to_string_pretty(&v.status).expect("json"));

    print!("{}", deviation_table(&chacon, &Lattice::diagonal_i64(&[3, 1]), 4)?.to_tsv());

    let dyadic = OdometerSpec::diagonal_pow(&[2, 2], 6)?;
    let tower = gallery::odometer_as_construction(&dyadic)?;
    let (v, set) = some_infinite_odometer_check(&tower, 16, &eps, 6)?;
    println!("some infinite odometer factor: {} ({} supported lattices)", v.status.kind(), set.supported.len());
    println!("conjugate to dyadic: {}", conjugacy_check(&tower, &dyadic, &eps, 6)?.status.kind());
    Ok(())
}
