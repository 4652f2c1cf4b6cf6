//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use super::Constraint;
use crate::rational::{one, zero, Rational};

#[derive(Debug, Clone, PartialEq)]
pub(super) enum LpResult {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible,
}

/// Maximizes `objective · x` over free `x` subject to `eqs` (`=`) and `ges`
/// (`>=`). Free variables are split as `x = u - v` and every `>=` row gets a
/// surplus column, giving the standard form `A z = b, z >= 0`.
pub(super) fn maximize(objective: &[Rational], eqs: &[Constraint], ges: &[Constraint], n: usize) -> LpResult {
    let m_ge = ges.len();
    let cols = 2 * n + m_ge;
    let mut a = Vec::with_capacity(eqs.len() + m_ge);
    let mut b = Vec::with_capacity(eqs.len() + m_ge);
    for (k, row) in eqs.iter().chain(ges).enumerate() {
        let mut z = vec![zero(); cols];
        for (j, coeff) in row.coeffs.iter().enumerate() {
            if !coeff.is_zero() {
                z[j] = coeff.clone();
                z[n + j] = -coeff;
            }
        }
        if k >= eqs.len() {
            z[2 * n + k - eqs.len()] = -one();
        }
        a.push(z);
        b.push(row.rhs.clone());
    }
    let mut c = vec![zero(); cols];
    for (j, coeff) in objective.iter().enumerate() {
        c[j] = coeff.clone();
        c[n + j] = -coeff;
    }
    match solve_standard(a, b, &c) {
        Standard::Optimal { z, value } => {
            let point = (0..n).map(|j| &z[j] - &z[n + j]).collect();
            LpResult::Optimal { point, value }
        }
        Standard::Unbounded => LpResult::Unbounded,
        Standard::Infeasible => LpResult::Infeasible,
    }
}

enum Standard {
    Optimal { z: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j` for the current objective.
    reduced: Vec<Rational>,
    value: Rational,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let inv = one() / &self.rows[r][col];
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !self.reduced[col].is_zero() {
            let factor = self.reduced[col].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                self.reduced[j] -= delta;
            }
            self.value += &factor * &pivot_rhs;
        }
        self.basis[r] = col;
    }

    fn set_objective(&mut self, c: &[Rational]) {
        self.reduced = c.to_vec();
        self.value = zero();
        for (r, &bvar) in self.basis.iter().enumerate() {
            let cb = &c[bvar];
            if cb.is_zero() {
                continue;
            }
            for (d, a) in self.reduced.iter_mut().zip(&self.rows[r]) {
                if !a.is_zero() {
                    *d -= cb * a;
                }
            }
            self.value += cb * &self.rhs[r];
        }
    }

    /// Runs Bland's rule until optimal (`true`) or unbounded (`false`),
    /// only letting columns below `allowed` enter.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.reduced[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

fn solve_standard(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>, c: &[Rational]) -> Standard {
    let m = a.len();
    let cols = c.len();
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        if rhs.is_negative() {
            for x in row.iter_mut() {
                *x = -&*x;
            }
            *rhs = -&*rhs;
        }
    }
    for (r, row) in a.iter_mut().enumerate() {
        row.extend((0..m).map(|k| if k == r { one() } else { zero() }));
    }
    let mut t = Tableau {
        rows: a,
        rhs: b,
        basis: (cols..cols + m).collect(),
        reduced: Vec::new(),
        value: zero(),
    };
    let phase_one: Vec<Rational> = (0..cols + m).map(|j| if j < cols { zero() } else { -one() }).collect();
    t.set_objective(&phase_one);
    t.optimize(cols + m);
    if t.value.is_negative() {
        return Standard::Infeasible;
    }

    // Drive remaining artificials (all at level zero) out of the basis, or
    // drop their rows when they are redundant.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] < cols {
            r += 1;
            continue;
        }
        match (0..cols).find(|&j| !t.rows[r][j].is_zero()) {
            Some(j) => {
                t.pivot(r, j);
                r += 1;
            }
            None => {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
            }
        }
    }
    for row in t.rows.iter_mut() {
        row.truncate(cols);
    }
    t.set_objective(c);
    if !t.optimize(cols) {
        return Standard::Unbounded;
    }
    let mut z = vec![zero(); cols];
    for (r, &bvar) in t.basis.iter().enumerate() {
        z[bvar] = t.rhs[r].clone();
    }
    Standard::Optimal { z, value: t.value }
}
