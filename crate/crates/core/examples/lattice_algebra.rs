//! Hermite forms, quotients and coset counts for a few sublattices of Z^2.

use rankone::construction::ShapeSpec;
use rankone::lattice::{enumerate_sublattices, shape_coset_histogram, Lattice};
use rankone::zvec::ZVec;

fn main() -> Result<(), rankone::Error> {
    let l = Lattice::canonicalize(2, &[ZVec::from_i64s(&[4, 2]), ZVec::from_i64s(&[2, 3]), ZVec::from_i64s(&[0, 6])])?;
    println!("lattice {l} of index {}", l.index());
    let v = ZVec::from_i64s(&[5, 4]);
    println!("{v} reduces to {} and has order {}", l.reduce_vec(&v), l.order_of(&v));

    let m = Lattice::diagonal_i64(&[2, 3]);
    println!("meet with {m}: {}", l.intersect(&m)?);
    println!("join with {m}: {}", l.join(&m)?);

    let h = shape_coset_histogram(&ShapeSpec::rect_i64(&[10, 7]), &l)?;
    print!("counts of the 10x7 box per coset\n{}", h.to_tsv());

    let all = enumerate_sublattices(2, 6);
    println!("{} sublattices of index at most 6", all.len());
    Ok(())
}
