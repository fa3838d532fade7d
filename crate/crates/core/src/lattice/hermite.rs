use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::zvec::ZVec;

/// Column echelon form of the subgroup spanned by `gens`.
///
/// Returns `(pivot, column)` pairs sorted by pivot, where each column's last
/// nonzero coordinate is its pivot, pivot entries are positive, and every
/// entry of a column lying in another column's pivot row is reduced into
/// `[0, pivot entry)`. The result depends only on the subgroup.
pub(crate) fn echelon_pivots(dim: usize, gens: &[ZVec]) -> Vec<(usize, ZVec)> {
    let mut work: Vec<ZVec> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    let mut pivots: Vec<(usize, ZVec)> = Vec::new();

    for row in (0..dim).rev() {
        // Euclid on coordinate `row` across the working set.
        loop {
            let mut nz: Vec<usize> = (0..work.len()).filter(|&i| !work[i][row].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by(|&a, &b| work[a][row].abs().cmp(&work[b][row].abs()));
            let p = nz[0];
            let pv = work[p].clone();
            for &i in &nz[1..] {
                let q = work[i][row].div_floor(&pv[row]);
                for k in 0..=row {
                    let t = &pv[k] * &q;
                    work[i][k] -= t;
                }
            }
            work.retain(|w| !w.is_zero());
        }
        if let Some(i) = work.iter().position(|w| !w[row].is_zero()) {
            let mut col = work.swap_remove(i);
            if col[row].is_negative() {
                col = -&col;
            }
            pivots.push((row, col));
        }
    }
    pivots.reverse();

    // Reduce entries in pivot rows of earlier columns.
    for j in 0..pivots.len() {
        for i in (0..j).rev() {
            let prow = pivots[i].0;
            let pval = pivots[i].1[prow].clone();
            let q = pivots[j].1[prow].div_floor(&pval);
            if !q.is_zero() {
                let sub = pivots[i].1.scale(&q);
                pivots[j].1 = &pivots[j].1 - &sub;
            }
        }
    }
    pivots
}

/// Canonical basis of the (possibly rank-deficient) subgroup spanned by
/// `gens`, one column per pivot.
pub fn echelon(dim: usize, gens: &[ZVec]) -> Vec<ZVec> {
    echelon_pivots(dim, gens).into_iter().map(|(_, c)| c).collect()
}

/// Membership in the span of an echelon basis produced by [`echelon`].
pub fn echelon_contains(basis: &[ZVec], v: &ZVec) -> bool {
    let mut w = v.clone();
    for col in basis.iter().rev() {
        let p = match (0..col.dim()).rev().find(|&k| !col[k].is_zero()) {
            Some(p) => p,
            None => continue,
        };
        // Coordinates above this pivot must already be cleared.
        if (p + 1..w.dim()).any(|k| !w[k].is_zero()) {
            return false;
        }
        let (q, r) = w[p].div_rem(&col[p]);
        if !r.is_zero() {
            return false;
        }
        if !q.is_zero() {
            w = &w - &col.scale(&q);
        }
    }
    w.is_zero()
}

#[allow(dead_code)]
pub(crate) fn rank(dim: usize, gens: &[ZVec]) -> usize {
    echelon_pivots(dim, gens).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(xs: &[i64]) -> ZVec {
        ZVec::from_i64s(xs)
    }

    #[test]
    fn rank_deficient_echelon() {
        let b = echelon(2, &[z(&[2, 4]), z(&[3, 6])]);
        assert_eq!(b, vec![z(&[1, 2])]);
        assert!(echelon_contains(&b, &z(&[-3, -6])));
        assert!(!echelon_contains(&b, &z(&[1, 0])));
    }

    #[test]
    fn echelon_of_mixed_rank_set() {
        let b = echelon(3, &[z(&[1, 4, 0]), z(&[0, 4, 0])]);
        assert_eq!(b, vec![z(&[1, 0, 0]), z(&[0, 4, 0])]);
        assert_eq!(rank(3, &[z(&[1, 4, 0]), z(&[0, 4, 0])]), 2);
        assert!(echelon_contains(&b, &z(&[1, 4, 0])));
        assert!(!echelon_contains(&b, &z(&[0, 2, 0])));
    }

    #[test]
    fn zero_generators() {
        assert!(echelon(2, &[z(&[0, 0])]).is_empty());
    }
}
