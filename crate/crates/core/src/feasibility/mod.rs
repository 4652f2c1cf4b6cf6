//! Exact rational linear feasibility and linear-fractional maximization.
//!
//! This is the numeric engine behind support enumeration and the
//! victory-status analysis of best responses. Everything is exact: points
//! returned as feasible satisfy every row with rational equality, and
//! infeasibility verdicts carry a Farkas certificate that can be checked
//! independently of the solver.
//!
//! `solve_feasibility` eliminates the equalities by Gaussian elimination and
//! then decides the residual inequality system with Fourier–Motzkin
//! elimination when at most [`FOURIER_MOTZKIN_MAX_VARS`] variables remain,
//! or a Bland's-rule simplex otherwise.

mod fourier_motzkin;
mod gauss;
mod simplex;

use num_traits::{Signed, Zero};

use crate::rational::{dot, one, zero, Rational};

pub use fourier_motzkin::FOURIER_MOTZKIN_MAX_VARS;

/// Row limit for Fourier–Motzkin before falling back to the simplex.
const FOURIER_MOTZKIN_ROW_CAP: usize = 400;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeasibilityError {
    #[error("malformed row {row} in {kind}: {len} coefficients for {vars} variables")]
    MalformedRow {
        kind: &'static str,
        row: usize,
        len: usize,
        vars: usize,
    },
    #[error("strict inequalities are only used for attainment checks, not feasibility solves")]
    StrictConstraints,
    #[error("objective has {len} coefficients for {vars} variables")]
    MalformedObjective { len: usize, vars: usize },
    #[error("denominator is not positive at the claimed optimum")]
    DenominatorNotPositive,
    #[error("internal solver invariant breached: {0}")]
    Internal(&'static str),
}

/// One linear row `coeffs · x (op) rhs`; the relation is given by where the
/// row is stored in a [`LinearSystem`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn lhs(&self, point: &[Rational]) -> Rational {
        dot(&self.coeffs, point)
    }

    fn negated(&self) -> Self {
        Constraint {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            rhs: -&self.rhs,
        }
    }
}

/// Equalities, weak `>=` inequalities and strict `>` inequalities over
/// named real variables. Variables are free unless a row bounds them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearSystem {
    names: Vec<String>,
    equalities: Vec<Constraint>,
    inequalities: Vec<Constraint>,
    strict: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self::with_names((0..num_vars).map(|i| format!("x{i}")).collect())
    }

    pub fn with_names(names: Vec<String>) -> Self {
        LinearSystem {
            names,
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn strict(&self) -> &[Constraint] {
        &self.strict
    }

    /// `coeffs · x = rhs`
    pub fn add_eq(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.equalities.push(Constraint::new(coeffs, rhs));
        self
    }

    /// `coeffs · x >= rhs`
    pub fn add_ge(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.inequalities.push(Constraint::new(coeffs, rhs));
        self
    }

    /// `coeffs · x <= rhs`
    pub fn add_le(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.inequalities.push(Constraint::new(coeffs, rhs).negated());
        self
    }

    /// `coeffs · x > rhs`
    pub fn add_gt(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.strict.push(Constraint::new(coeffs, rhs));
        self
    }

    /// `coeffs · x < rhs`
    pub fn add_lt(&mut self, coeffs: Vec<Rational>, rhs: Rational) -> &mut Self {
        self.strict.push(Constraint::new(coeffs, rhs).negated());
        self
    }

    /// `x_var >= 0`
    pub fn nonnegative(&mut self, var: usize) -> &mut Self {
        let mut coeffs = vec![zero(); self.num_vars()];
        coeffs[var] = one();
        self.add_ge(coeffs, zero())
    }

    /// Drops the strict rows, leaving their topological closure's ingredients.
    pub fn without_strict(&self) -> LinearSystem {
        LinearSystem {
            strict: Vec::new(),
            ..self.clone()
        }
    }

    /// Copy with every strict row `a·x > b` relaxed to `a·x >= b`.
    pub fn closure(&self) -> LinearSystem {
        let mut out = self.without_strict();
        out.inequalities.extend(self.strict.iter().cloned());
        out
    }

    pub fn check_shape(&self) -> Result<(), FeasibilityError> {
        let vars = self.num_vars();
        for (kind, rows) in [
            ("equalities", &self.equalities),
            ("inequalities", &self.inequalities),
            ("strict inequalities", &self.strict),
        ] {
            if let Some((row, c)) = rows.iter().enumerate().find(|(_, c)| c.coeffs.len() != vars) {
                return Err(FeasibilityError::MalformedRow {
                    kind,
                    row,
                    len: c.coeffs.len(),
                    vars,
                });
            }
        }
        Ok(())
    }

    /// Equalities and weak inequalities hold exactly at `point`.
    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars()
            && self.equalities.iter().all(|c| c.lhs(point) == c.rhs)
            && self.inequalities.iter().all(|c| c.lhs(point) >= c.rhs)
    }
}

/// Nonnegative combination proving a system infeasible: with `y_eq` free and
/// `y_ge >= 0`, `y_eq·A_eq + y_ge·A_ge = 0` while `y_eq·b_eq + y_ge·b_ge > 0`.
/// Any feasible `x` would give `0 >= y·b > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub equality_multipliers: Vec<Rational>,
    pub inequality_multipliers: Vec<Rational>,
}

impl FarkasCertificate {
    /// Checks the certificate against the equalities and weak inequalities of
    /// `system`; strict rows are ignored.
    pub fn certifies(&self, system: &LinearSystem) -> bool {
        if self.equality_multipliers.len() != system.equalities.len()
            || self.inequality_multipliers.len() != system.inequalities.len()
            || self.inequality_multipliers.iter().any(|y| y.is_negative())
        {
            return false;
        }
        let mut combined = vec![zero(); system.num_vars()];
        let mut bound = zero();
        let rows = system
            .equalities
            .iter()
            .zip(&self.equality_multipliers)
            .chain(system.inequalities.iter().zip(&self.inequality_multipliers));
        for (row, y) in rows {
            if y.is_zero() {
                continue;
            }
            for (acc, a) in combined.iter_mut().zip(&row.coeffs) {
                *acc += y * a;
            }
            bound += y * &row.rhs;
        }
        combined.iter().all(Zero::is_zero) && bound.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

impl Feasibility {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible(p) => Some(p),
            Feasibility::Infeasible(_) => None,
        }
    }
}

/// Finds an exact point satisfying every equality and weak inequality, or
/// certifies that none exists.
pub fn solve_feasibility(system: &LinearSystem) -> Result<Feasibility, FeasibilityError> {
    system.check_shape()?;
    if !system.strict.is_empty() {
        return Err(FeasibilityError::StrictConstraints);
    }
    let point = match gauss::reduce(&system.equalities, system.num_vars()) {
        gauss::Reduction::Inconsistent => None,
        gauss::Reduction::Solved(param) => {
            let residual: Vec<Constraint> = system.inequalities.iter().map(|row| param.substitute(row)).collect();
            solve_residual(&residual, param.free_count()).map(|y| param.point(&y))
        }
    };
    match point {
        Some(x) => {
            if !system.is_satisfied_by(&x) {
                return Err(FeasibilityError::Internal("feasible point violates a row"));
            }
            Ok(Feasibility::Feasible(x))
        }
        None => farkas_certificate(system).map(Feasibility::Infeasible),
    }
}

fn solve_residual(rows: &[Constraint], dims: usize) -> Option<Vec<Rational>> {
    if dims == 0 {
        return rows.iter().all(|r| !r.rhs.is_positive()).then(Vec::new);
    }
    if dims <= FOURIER_MOTZKIN_MAX_VARS {
        match fourier_motzkin::solve(rows, dims, FOURIER_MOTZKIN_ROW_CAP) {
            fourier_motzkin::Outcome::Feasible(y) => return Some(y),
            fourier_motzkin::Outcome::Infeasible => return None,
            fourier_motzkin::Outcome::TooLarge => {}
        }
    }
    match simplex::maximize(&vec![zero(); dims], &[], rows, dims) {
        simplex::LpResult::Optimal { point, .. } => Some(point),
        simplex::LpResult::Infeasible => None,
        simplex::LpResult::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Solves the alternative system of Farkas' lemma. It is feasible exactly
/// when `system` is infeasible.
fn farkas_certificate(system: &LinearSystem) -> Result<FarkasCertificate, FeasibilityError> {
    let m_eq = system.equalities.len();
    let m_ge = system.inequalities.len();
    let width = m_eq + m_ge;
    let mut eqs = Vec::with_capacity(system.num_vars() + 1);
    for j in 0..system.num_vars() {
        let coeffs = system
            .equalities
            .iter()
            .chain(&system.inequalities)
            .map(|row| row.coeffs[j].clone())
            .collect();
        eqs.push(Constraint::new(coeffs, zero()));
    }
    let normalizer = system
        .equalities
        .iter()
        .chain(&system.inequalities)
        .map(|row| row.rhs.clone())
        .collect();
    eqs.push(Constraint::new(normalizer, one()));
    let ges: Vec<Constraint> = (0..m_ge)
        .map(|k| {
            let mut coeffs = vec![zero(); width];
            coeffs[m_eq + k] = one();
            Constraint::new(coeffs, zero())
        })
        .collect();
    match simplex::maximize(&vec![zero(); width], &eqs, &ges, width) {
        simplex::LpResult::Optimal { point, .. } => {
            let cert = FarkasCertificate {
                equality_multipliers: point[..m_eq].to_vec(),
                inequality_multipliers: point[m_eq..].to_vec(),
            };
            if cert.certifies(system) {
                Ok(cert)
            } else {
                Err(FeasibilityError::Internal("Farkas multipliers fail verification"))
            }
        }
        _ => Err(FeasibilityError::Internal(
            "system judged infeasible but no Farkas certificate exists",
        )),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Unbounded,
    Infeasible(FarkasCertificate),
}

/// Maximizes `objective · x + constant` subject to the equalities and weak
/// inequalities of `system`. Ties between optimal vertices are resolved by
/// Bland's rule, so the returned point is deterministic.
pub fn maximize_linear(
    objective: &[Rational],
    constant: &Rational,
    system: &LinearSystem,
) -> Result<LpOutcome, FeasibilityError> {
    system.check_shape()?;
    if objective.len() != system.num_vars() {
        return Err(FeasibilityError::MalformedObjective {
            len: objective.len(),
            vars: system.num_vars(),
        });
    }
    match simplex::maximize(objective, &system.equalities, &system.inequalities, system.num_vars()) {
        simplex::LpResult::Optimal { point, value } => {
            if !system.is_satisfied_by(&point) {
                return Err(FeasibilityError::Internal("LP optimum violates a row"));
            }
            Ok(LpOutcome::Optimal {
                value: value + constant,
                point,
            })
        }
        simplex::LpResult::Unbounded => Ok(LpOutcome::Unbounded),
        simplex::LpResult::Infeasible => farkas_certificate(system).map(LpOutcome::Infeasible),
    }
}

/// `coeffs · x + constant`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl AffineForm {
    pub fn new(coeffs: Vec<Rational>, constant: Rational) -> Self {
        AffineForm { coeffs, constant }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        dot(&self.coeffs, point) + &self.constant
    }
}

/// `numerator(x) / denominator(x)`; the denominator must be positive on the
/// feasible region.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalObjective {
    pub numerator: AffineForm,
    pub denominator: AffineForm,
}

impl FractionalObjective {
    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.numerator.eval(point) / self.denominator.eval(point)
    }
}

/// Maximizes a ratio of affine forms over a polyhedron via the
/// Charnes–Cooper substitution `y = t·x`, `t = 1/denominator(x)`: maximize
/// `N·y + n0·t` subject to `D·y + d0·t = 1`, `A·y - b·t (rel) 0`, `t >= 0`.
pub fn maximize_linear_fractional(
    objective: &FractionalObjective,
    system: &LinearSystem,
) -> Result<LpOutcome, FeasibilityError> {
    system.check_shape()?;
    let n = system.num_vars();
    for form in [&objective.numerator, &objective.denominator] {
        if form.coeffs.len() != n {
            return Err(FeasibilityError::MalformedObjective {
                len: form.coeffs.len(),
                vars: n,
            });
        }
    }
    let homogenize = |row: &Constraint| {
        let mut coeffs = row.coeffs.clone();
        coeffs.push(-&row.rhs);
        Constraint::new(coeffs, zero())
    };
    let mut eqs: Vec<Constraint> = system.equalities.iter().map(homogenize).collect();
    let mut scale_row = objective.denominator.coeffs.clone();
    scale_row.push(objective.denominator.constant.clone());
    eqs.push(Constraint::new(scale_row, one()));
    let mut ges: Vec<Constraint> = system.inequalities.iter().map(homogenize).collect();
    let mut t_nonneg = vec![zero(); n + 1];
    t_nonneg[n] = one();
    ges.push(Constraint::new(t_nonneg, zero()));
    let mut lifted_objective = objective.numerator.coeffs.clone();
    lifted_objective.push(objective.numerator.constant.clone());

    match simplex::maximize(&lifted_objective, &eqs, &ges, n + 1) {
        simplex::LpResult::Optimal { point, value } => {
            let t = &point[n];
            if !t.is_positive() {
                return Ok(LpOutcome::Unbounded);
            }
            let x: Vec<Rational> = point[..n].iter().map(|y| y / t).collect();
            if !objective.denominator.eval(&x).is_positive() {
                return Err(FeasibilityError::DenominatorNotPositive);
            }
            if !system.is_satisfied_by(&x) || objective.eval(&x) != value {
                return Err(FeasibilityError::Internal("fractional optimum does not de-homogenize"));
            }
            Ok(LpOutcome::Optimal { value, point: x })
        }
        simplex::LpResult::Unbounded => Ok(LpOutcome::Unbounded),
        simplex::LpResult::Infeasible => match solve_feasibility(&system.without_strict())? {
            Feasibility::Infeasible(cert) => Ok(LpOutcome::Infeasible(cert)),
            Feasibility::Feasible(_) => Err(FeasibilityError::DenominatorNotPositive),
        },
    }
}

/// True iff every strict row `a·x > b` holds at `point`, exactly.
pub fn check_strict(point: &[Rational], strict: &[Constraint]) -> bool {
    strict
        .iter()
        .all(|c| c.coeffs.len() == point.len() && c.lhs(point) > c.rhs)
}
