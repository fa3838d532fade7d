//! Validity, Følner deficiencies and the measure ledger of Chacon towers.

use num_bigint::BigInt;
use num_rational::BigRational;
use rankone::construction::{
    default_threshold, folner_report, measure_ledger, unit_vectors, validate, ConstructionRule, ConstructionSpec,
};
use rankone::zvec::fmt_ratio;

fn main() -> Result<(), rankone::Error> {
    let spec = ConstructionSpec::from_rule(ConstructionRule::Chacon { dim: 2 }, 5)?;
    println!("violations: {}", validate(&spec).len());

    let f = folner_report(&spec, &unit_vectors(2), 5, &default_threshold())?;
    print!("{}", f.to_tsv());
    println!("flagged: {}", f.flag);

    let top = BigRational::new(BigInt::from(1), BigInt::from(spec.shape(5)?.cardinality()));
    let ledger = measure_ledger(&spec, &top)?;
    for r in &ledger.rows {
        println!("level {}: base {} tower {}", r.level, fmt_ratio(&r.base_mass), fmt_ratio(&r.tower_mass));
    }
    Ok(())
}
