//! Fourier–Motzkin elimination for small inequality systems `A y >= b`,
//! with back-substitution to recover an explicit point.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::Constraint;
use crate::rational::{zero, Rational};

/// Systems with more free variables than this go straight to the simplex.
pub const FOURIER_MOTZKIN_MAX_VARS: usize = 6;

#[derive(Debug)]
pub(super) enum Outcome {
    Feasible(Vec<Rational>),
    Infeasible,
    TooLarge,
}

pub(super) fn solve(rows: &[Constraint], dims: usize, row_cap: usize) -> Outcome {
    let mut current = match normalize(rows.iter().cloned()) {
        Some(rows) => rows,
        None => return Outcome::Infeasible,
    };
    // stages[k] is the system over variables 0..=k, before eliminating k.
    let mut stages: Vec<Vec<Constraint>> = vec![Vec::new(); dims];
    for k in (0..dims).rev() {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut next = Vec::new();
        for row in &current {
            let a = &row.coeffs[k];
            if a.is_positive() {
                lower.push(row);
            } else if a.is_negative() {
                upper.push(row);
            } else {
                next.push(row.clone());
            }
        }
        if next.len() + lower.len() * upper.len() > row_cap {
            return Outcome::TooLarge;
        }
        for lo in &lower {
            for up in &upper {
                // (-a_up) * lo + a_lo * up cancels variable k.
                let s = -&up.coeffs[k];
                let t = &lo.coeffs[k];
                let coeffs = lo.coeffs.iter().zip(&up.coeffs).map(|(l, u)| &s * l + t * u).collect();
                next.push(Constraint::new(coeffs, &s * &lo.rhs + t * &up.rhs));
            }
        }
        stages[k] = std::mem::take(&mut current);
        current = match normalize(next.into_iter()) {
            Some(rows) => rows,
            None => return Outcome::Infeasible,
        };
    }

    let mut point = vec![zero(); dims];
    for k in 0..dims {
        let mut low: Option<Rational> = None;
        let mut high: Option<Rational> = None;
        for row in &stages[k] {
            let a = &row.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let known: Rational = (0..k).map(|j| &row.coeffs[j] * &point[j]).sum();
            let bound = (&row.rhs - known) / a;
            if a.is_positive() {
                if low.as_ref().is_none_or(|l| bound > *l) {
                    low = Some(bound);
                }
            } else if high.as_ref().is_none_or(|h| bound < *h) {
                high = Some(bound);
            }
        }
        point[k] = match (low, high) {
            (Some(l), _) => l,
            (None, Some(h)) => h,
            (None, None) => zero(),
        };
    }
    Outcome::Feasible(point)
}

/// Scales rows so the first nonzero coefficient has magnitude one, keeps the
/// tightest right-hand side per coefficient vector, and drops trivial rows.
/// Returns `None` when a row reads `0 >= b` with `b > 0`.
fn normalize(rows: impl Iterator<Item = Constraint>) -> Option<Vec<Constraint>> {
    let mut tightest: HashMap<Vec<Rational>, Rational> = HashMap::new();
    let mut order = Vec::new();
    for row in rows {
        let Some(lead) = row.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) else {
            if row.rhs.is_positive() {
                return None;
            }
            continue;
        };
        let coeffs: Vec<Rational> = row.coeffs.iter().map(|c| c / &lead).collect();
        let rhs = &row.rhs / &lead;
        match tightest.get_mut(&coeffs) {
            Some(existing) => {
                if rhs > *existing {
                    *existing = rhs;
                }
            }
            None => {
                order.push(coeffs.clone());
                tightest.insert(coeffs, rhs);
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|coeffs| {
                let rhs = tightest[&coeffs].clone();
                Constraint::new(coeffs, rhs)
            })
            .collect(),
    )
}
