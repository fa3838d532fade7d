//! Odometers from lattice chains: actions, freeness and finite factors.

use rankone::lattice::Lattice;
use rankone::odometer::{
    conjugate_at_depth, ff_contains, generate_from_family, is_free_at_depth, OdometerPoint, OdometerSpec,
};
use rankone::zvec::ZVec;

fn main() -> Result<(), rankone::Error> {
    let dyadic = OdometerSpec::diagonal_pow(&[2, 2], 6)?;
    let x = OdometerPoint::from_vector(&dyadic, &ZVec::from_i64s(&[3, 1]))?;
    let y = x.act(&ZVec::from_i64s(&[1, 0]))?;
    let coords: Vec<String> = y.coords().iter().map(|r| r.rep().to_string()).collect();
    println!("(3,1) + e1 in the dyadic odometer: {}", coords.join(" "));

    println!("dyadic is free: {}", is_free_at_depth(&dyadic).status.kind());
    let horizontal = OdometerSpec::diagonal_pow(&[2, 1], 6)?;
    println!("horizontal is free: {}", is_free_at_depth(&horizontal).status.kind());

    for h in [Lattice::diagonal_i64(&[4, 2]), Lattice::diagonal_i64(&[3, 1])] {
        println!("Z^2/{h} is a factor of dyadic: {}", ff_contains(&dyadic, &h)?.status.kind());
    }

    let sextic = OdometerSpec::diagonal_pow(&[6, 6], 6)?;
    println!("dyadic ~ sextic: {}", conjugate_at_depth(&dyadic, &sextic, 6)?.status.kind());

    let fam = generate_from_family(&[Lattice::diagonal_i64(&[2, 1]), Lattice::diagonal_i64(&[1, 3])])?;
    let chain: Vec<String> = fam.chain().iter().map(|g| g.to_string()).collect();
    println!("generated chain: {}", chain.join(" > "));
    Ok(())
}
