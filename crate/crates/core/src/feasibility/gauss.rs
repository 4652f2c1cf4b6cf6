//! Exact Gauss–Jordan elimination of an equality block.

use num_traits::Zero;

use super::Constraint;
use crate::rational::{dot, one, zero, Rational};

pub(super) enum Reduction {
    Inconsistent,
    Solved(Parametrization),
}

/// Solution set of the equalities as `x = base + Σ_k y_k · directions[k]`,
/// one free parameter per non-pivot column.
pub(super) struct Parametrization {
    base: Vec<Rational>,
    directions: Vec<Vec<Rational>>,
}

impl Parametrization {
    pub(super) fn free_count(&self) -> usize {
        self.directions.len()
    }

    pub(super) fn point(&self, params: &[Rational]) -> Vec<Rational> {
        let mut x = self.base.clone();
        for (y, dir) in params.iter().zip(&self.directions) {
            if y.is_zero() {
                continue;
            }
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi += y * di;
            }
        }
        x
    }

    /// Rewrites `a·x >= b` as a row over the free parameters.
    pub(super) fn substitute(&self, row: &Constraint) -> Constraint {
        let coeffs = self.directions.iter().map(|d| dot(&row.coeffs, d)).collect();
        Constraint::new(coeffs, &row.rhs - dot(&row.coeffs, &self.base))
    }
}

pub(super) fn reduce(equalities: &[Constraint], n: usize) -> Reduction {
    let mut rows: Vec<(Vec<Rational>, Rational)> =
        equalities.iter().map(|c| (c.coeffs.clone(), c.rhs.clone())).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut next_row = 0;
    for col in 0..n {
        let Some(found) = (next_row..rows.len()).find(|&r| !rows[r].0[col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, found);
        let inv = one() / &rows[next_row].0[col];
        for a in rows[next_row].0.iter_mut() {
            *a *= &inv;
        }
        rows[next_row].1 *= &inv;
        let (pivot_coeffs, pivot_rhs) = rows[next_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next_row || row.0[col].is_zero() {
                continue;
            }
            let factor = row.0[col].clone();
            for (a, p) in row.0.iter_mut().zip(&pivot_coeffs) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
            row.1 -= &factor * &pivot_rhs;
        }
        pivots.push((next_row, col));
        next_row += 1;
        if next_row == rows.len() {
            break;
        }
    }
    if rows[next_row..].iter().any(|(_, b)| !b.is_zero()) {
        return Reduction::Inconsistent;
    }

    let mut is_pivot = vec![false; n];
    for &(_, col) in &pivots {
        is_pivot[col] = true;
    }
    let mut base = vec![zero(); n];
    for &(r, col) in &pivots {
        base[col] = rows[r].1.clone();
    }
    let directions = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut dir = vec![zero(); n];
            dir[f] = one();
            for &(r, col) in &pivots {
                dir[col] = -&rows[r].0[f];
            }
            dir
        })
        .collect();
    Reduction::Solved(Parametrization { base, directions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn parametrizes_underdetermined_system() {
        // x + y + z = 3, x - y = 1
        let eqs = vec![
            Constraint::new(vec![int(1), int(1), int(1)], int(3)),
            Constraint::new(vec![int(1), int(-1), int(0)], int(1)),
        ];
        let Reduction::Solved(p) = reduce(&eqs, 3) else {
            panic!("consistent system")
        };
        assert_eq!(p.free_count(), 1);
        for t in -3..=3 {
            let x = p.point(&[int(t)]);
            assert!(eqs.iter().all(|c| c.lhs(&x) == c.rhs));
        }
    }

    #[test]
    fn empty_block_leaves_all_free() {
        let Reduction::Solved(p) = reduce(&[], 2) else { panic!() };
        assert_eq!(p.free_count(), 2);
        assert_eq!(p.point(&[int(4), int(5)]), vec![int(4), int(5)]);
    }

    #[test]
    fn detects_inconsistency() {
        let eqs = vec![
            Constraint::new(vec![int(1), int(1)], int(1)),
            Constraint::new(vec![int(1), int(1)], int(2)),
        ];
        assert!(matches!(reduce(&eqs, 2), Reduction::Inconsistent));
    }
}
