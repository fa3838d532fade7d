use num_bigint::BigInt;

use super::Lattice;
use crate::zvec::ZVec;

/// Every sublattice of `Z^d` with index at most `max_index`, each exactly
/// once, sorted by index and then by columns.
///
/// Canonical forms are in bijection with upper-triangular matrices whose
/// diagonal has product `<= max_index` and whose entry `(k, l)` lies in
/// `[0, a_{k,k})`, so this walks those matrices directly.
pub fn enumerate_sublattices(d: usize, max_index: u64) -> Vec<Lattice> {
    let mut out = Vec::new();
    let mut diag = Vec::with_capacity(d);
    diagonals(d, max_index, &mut diag, &mut |dg| fill_columns(dg, &mut out));
    out.sort();
    out
}

fn diagonals(d: usize, budget: u64, acc: &mut Vec<u64>, emit: &mut dyn FnMut(&[u64])) {
    if acc.len() == d {
        emit(acc);
        return;
    }
    for a in 1..=budget {
        acc.push(a);
        diagonals(d, budget / a, acc, emit);
        acc.pop();
    }
}

fn fill_columns(diag: &[u64], out: &mut Vec<Lattice>) {
    let d = diag.len();
    // Free entries (k, l) with k < l, in column order.
    let slots: Vec<(usize, usize)> = (0..d).flat_map(|l| (0..l).map(move |k| (k, l))).collect();
    let mut vals = vec![0u64; slots.len()];
    loop {
        let mut cols: Vec<Vec<i64>> = vec![vec![0; d]; d];
        for (l, &a) in diag.iter().enumerate() {
            cols[l][l] = a as i64;
        }
        for (&(k, l), &v) in slots.iter().zip(&vals) {
            cols[l][k] = v as i64;
        }
        let cols = cols.iter().map(|c| ZVec::from_i64s(c)).collect();
        out.push(Lattice::from_canonical_columns(cols).expect("canonical by construction"));

        // Odometer-style increment over the slots.
        let mut i = 0;
        loop {
            if i == slots.len() {
                return;
            }
            vals[i] += 1;
            if vals[i] < diag[slots[i].0] {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

/// Number of sublattices of index exactly `n` in `Z^2`, i.e. `sigma(n)`.
#[allow(dead_code)]
pub(crate) fn count_at_index(lattices: &[Lattice], n: u64) -> usize {
    let n = BigInt::from(n);
    lattices.iter().filter(|l| l.index() == n).count()
}
