//! Best responses against pure opponent spend `w^{-c}`.
//!
//! Frac responses come from comparing focused investments. Ind, Max and Plus
//! partition the responder's budget simplex by victory status (win alone,
//! tie with a rival set, lose) and optimize over each piece with exact LPs.

use num_traits::Signed;

use crate::engine::{focused_value, focused_values, utility_at, UtilityKind};
use crate::error::{Error, Result};
use crate::feasibility::{
    check_strict, maximize_linear, maximize_linear_fractional, AffineForm, Constraint, FractionalObjective,
    LinearSystem, LpOutcome,
};
use crate::model::{AggregatedGame, Investment};
use crate::rational::{dot, int, one, rat, zero, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseReport {
    pub kind: UtilityKind,
    pub responder: usize,
    /// Whether `value` is achieved by some investment.
    pub attained: bool,
    /// Optimal value, or the supremum when not attained.
    pub value: Rational,
    /// Optimal investment, or one within the requested ε of `value`.
    pub witness: Investment,
    /// Issues whose focused investment is optimal (Frac only).
    pub optimal_issues: Option<Vec<usize>>,
    pub status: String,
}

fn opponent_totals(game: &AggregatedGame, c: usize, opponents: &[Rational]) -> Result<Vec<Rational>> {
    game.check_opponents(c, opponents)?;
    Ok(opponents.to_vec())
}

/// Frac best response: the focused investments with the highest share.
/// Every split over the returned issue set is optimal too.
pub fn best_response_frac(game: &AggregatedGame, c: usize, opponents: &[Rational]) -> Result<BestResponseReport> {
    let opp = opponent_totals(game, c, opponents)?;
    let playable = game.playable_issues();
    let values: Vec<(usize, Rational)> = playable
        .iter()
        .copied()
        .zip(focused_values(game, c, playable, &opp))
        .collect();
    let best = values
        .iter()
        .map(|(_, v)| v)
        .max()
        .expect("a playable issue exists")
        .clone();
    let optimal: Vec<usize> = values.iter().filter(|(_, v)| *v == best).map(|&(i, _)| i).collect();
    let witness = game.focused(c, optimal[0]);
    Ok(BestResponseReport {
        kind: UtilityKind::Frac,
        responder: c,
        attained: true,
        value: best,
        witness,
        optimal_issues: Some(optimal),
        status: "focused optimum".into(),
    })
}

/// With two candidates, all-in on `argmax_i (Q^c_i - Q^{c'}_i)` is dominant
/// under u_ind. Lowest index on ties.
pub fn dominant_issue_ind_2c(game: &AggregatedGame, c: usize) -> Result<usize> {
    if game.num_candidates() != 2 {
        return Err(Error::InvalidArgument(format!(
            "dominant issue needs exactly 2 candidates, game has {}",
            game.num_candidates()
        )));
    }
    game.check_candidate(c)?;
    let rival = 1 - c;
    let diff = |i: usize| &game.ranks(c)[i] - &game.ranks(rival)[i];
    let mut best = game.playable_issues()[0];
    for &i in &game.playable_issues()[1..] {
        if diff(i) > diff(best) {
            best = i;
        }
    }
    Ok(best)
}

/// LP over the responder's investment `x` (one variable per issue) plus
/// `extra` auxiliary variables appended after it.
struct Space<'a> {
    game: &'a AggregatedGame,
    c: usize,
    opp: Vec<Rational>,
    n: usize,
}

impl<'a> Space<'a> {
    fn new(game: &'a AggregatedGame, c: usize, opp: Vec<Rational>) -> Self {
        Space {
            game,
            c,
            n: game.num_issues(),
            opp,
        }
    }

    fn rivals(&self) -> Vec<usize> {
        (0..self.game.num_candidates()).filter(|&d| d != self.c).collect()
    }

    fn system(&self, extra: usize) -> LinearSystem {
        let mut names: Vec<String> = self.game.issues().iter().map(|i| format!("x[{i}]")).collect();
        names.extend((0..extra).map(|k| format!("aux{k}")));
        let mut s = LinearSystem::with_names(names);
        let width = self.n + extra;
        for i in 0..self.n {
            let mut row = vec![zero(); width];
            row[i] = one();
            if self.game.is_playable(i) {
                s.add_ge(row, zero());
            } else {
                s.add_eq(row, zero());
            }
        }
        let mut budget = vec![one(); self.n];
        budget.resize(width, zero());
        s.add_eq(budget, self.game.budget(self.c).clone());
        s
    }

    /// `p(c) - p(d)` as an affine form of `x`, padded to `width`.
    fn margin(&self, d: usize, width: usize) -> (Vec<Rational>, Rational) {
        let mut coeffs: Vec<Rational> = self
            .game
            .ranks(self.c)
            .iter()
            .zip(self.game.ranks(d))
            .map(|(a, b)| a - b)
            .collect();
        let constant = dot(&coeffs, &self.opp);
        coeffs.resize(width, zero());
        (coeffs, constant)
    }

    /// Strict rows (`a·x > b`) describing a victory status, over `x` only.
    fn status_rows(&self, status: &Status) -> (Vec<Constraint>, Vec<Constraint>) {
        let mut equal = Vec::new();
        let mut strict = Vec::new();
        for d in self.rivals() {
            let (coeffs, constant) = self.margin(d, self.n);
            match status {
                Status::Lose(loser_to) if *loser_to == d => {
                    strict.push(Constraint::new(coeffs.iter().map(|a| -a).collect(), constant));
                }
                Status::Lose(_) => {}
                Status::Tie(set) if set.contains(&d) => equal.push(Constraint::new(coeffs, -constant)),
                Status::Tie(_) | Status::WinAlone => strict.push(Constraint::new(coeffs, -constant)),
            }
        }
        (equal, strict)
    }

    fn share(&self) -> FractionalObjective {
        let qc = self.game.ranks(self.c);
        let qs = self.game.rank_sums();
        FractionalObjective {
            numerator: AffineForm::new(qc.to_vec(), dot(qc, &self.opp)),
            denominator: AffineForm::new(qs.to_vec(), dot(qs, &self.opp)),
        }
    }

    fn totals_with(&self, x: &[Rational]) -> Vec<Rational> {
        self.opp.iter().zip(x).map(|(a, b)| a + b).collect()
    }

    /// Maximizes a slack `s <= 1` pushed into every strict row. The open
    /// region is nonempty iff the optimum is positive; the optimizer is then
    /// an interior point.
    fn interior(
        &self,
        equal: &[Constraint],
        strict: &[Constraint],
        extra_ge: &[Constraint],
    ) -> Result<Option<Vec<Rational>>> {
        let width = self.n + 1;
        let pad = |row: &Constraint, slack: Rational| {
            let mut coeffs = row.coeffs.clone();
            coeffs.push(slack);
            Constraint::new(coeffs, row.rhs.clone())
        };
        let mut sys = self.system(1);
        for row in equal {
            let r = pad(row, zero());
            sys.add_eq(r.coeffs, r.rhs);
        }
        for row in extra_ge {
            let r = pad(row, zero());
            sys.add_ge(r.coeffs, r.rhs);
        }
        for row in strict {
            let r = pad(row, -one());
            sys.add_ge(r.coeffs, r.rhs);
        }
        let mut cap = vec![zero(); width];
        cap[self.n] = one();
        sys.add_le(cap.clone(), one());
        match maximize_linear(&cap, &zero(), &sys)? {
            LpOutcome::Optimal { value, mut point } if value.is_positive() => {
                point.truncate(self.n);
                Ok(Some(point))
            }
            LpOutcome::Unbounded => Err(Error::Internal("bounded slack LP reported unbounded".into())),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Status {
    WinAlone,
    Tie(Vec<usize>),
    Lose(usize),
}

impl Status {
    fn victory(&self) -> Rational {
        match self {
            Status::WinAlone => one(),
            Status::Tie(set) => rat(1, set.len() as i64 + 1),
            Status::Lose(_) => zero(),
        }
    }

    fn describe(&self, game: &AggregatedGame) -> String {
        let names = |set: &[usize]| {
            set.iter()
                .map(|&d| game.candidates()[d].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Status::WinAlone => "win-alone".into(),
            Status::Tie(set) => format!("tie with {{{}}}", names(set)),
            Status::Lose(d) => format!("lose to {}", game.candidates()[*d]),
        }
    }
}

/// Nonempty subsets of `items`, by size and then lexicographically.
fn subsets_by_size(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=items.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&k| items[k]).collect());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < items.len() - size + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

/// Ind best response. First maximizes the worst margin `t` against every
/// rival. `t* > 0` wins alone; `t* = 0` searches the smallest attainable tie
/// set; `t* < 0` cannot win or tie and falls back to the Frac optimum.
pub fn best_response_ind(game: &AggregatedGame, c: usize, opponents: &[Rational]) -> Result<BestResponseReport> {
    let opp = opponent_totals(game, c, opponents)?;
    let frac = best_response_frac(game, c, &opp)?;
    let report = |value: Rational, witness: Investment, status: String| BestResponseReport {
        kind: UtilityKind::Ind,
        responder: c,
        attained: true,
        value,
        witness,
        optimal_issues: None,
        status,
    };
    let space = Space::new(game, c, opp);
    let rivals = space.rivals();
    if rivals.is_empty() {
        return Ok(report(one(), frac.witness, "sole candidate".into()));
    }
    let n = space.n;
    let mut sys = space.system(1);
    for &d in &rivals {
        let (mut coeffs, constant) = space.margin(d, n + 1);
        coeffs[n] = -one();
        sys.add_ge(coeffs, -constant);
    }
    let mut objective = vec![zero(); n + 1];
    objective[n] = one();
    let (t_star, point) = match maximize_linear(&objective, &zero(), &sys)? {
        LpOutcome::Optimal { value, point } => (value, point),
        other => return Err(Error::Internal(format!("worst-margin LP not optimal: {other:?}"))),
    };
    if t_star.is_positive() {
        let witness = Investment::new(point[..n].to_vec());
        return Ok(report(one(), witness, "win-alone".into()));
    }
    if t_star.is_negative() {
        return Ok(report(
            zero(),
            frac.witness,
            "cannot win or tie; frac-optimal witness".into(),
        ));
    }
    for set in subsets_by_size(&rivals) {
        let status = Status::Tie(set);
        let (equal, strict) = space.status_rows(&status);
        if let Some(x) = space.interior(&equal, &strict, &[])? {
            return Ok(report(status.victory(), Investment::new(x), status.describe(game)));
        }
    }
    Err(Error::Internal(
        "worst margin is zero but no tie set is attainable".into(),
    ))
}

/// Max best response: any win or tie is worth `V·v >= 1 >= r`, so the Ind
/// optimum decides unless the responder must lose, where Frac takes over.
pub fn best_response_max(
    game: &AggregatedGame,
    c: usize,
    opponents: &[Rational],
    victory_weight: &Rational,
) -> Result<BestResponseReport> {
    let kind = UtilityKind::Max(victory_weight.clone());
    kind.check(game.num_candidates())?;
    let ind = best_response_ind(game, c, opponents)?;
    if ind.value.is_positive() {
        return Ok(BestResponseReport {
            kind,
            value: victory_weight * &ind.value,
            ..ind
        });
    }
    let frac = best_response_frac(game, c, opponents)?;
    Ok(BestResponseReport {
        kind,
        optimal_issues: None,
        status: "cannot win or tie; frac optimum".into(),
        ..frac
    })
}

/// Plus best response, or its supremum with an ε-witness when the best
/// status region is open at its optimum.
pub fn best_response_plus(
    game: &AggregatedGame,
    c: usize,
    opponents: &[Rational],
    victory_weight: &Rational,
    epsilon: &Rational,
) -> Result<BestResponseReport> {
    let kind = UtilityKind::Plus(victory_weight.clone());
    kind.check(game.num_candidates())?;
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let opp = opponent_totals(game, c, opponents)?;
    let space = Space::new(game, c, opp);
    let rivals = space.rivals();
    let mut statuses = vec![Status::WinAlone];
    statuses.extend(subsets_by_size(&rivals).into_iter().map(Status::Tie));
    statuses.extend(rivals.iter().map(|&d| Status::Lose(d)));

    struct Piece {
        status: Status,
        value: Rational,
        closure_point: Vec<Rational>,
        interior: Vec<Rational>,
        attained_at: Option<Vec<Rational>>,
    }
    let share = space.share();
    let mut best: Option<Piece> = None;
    for status in statuses {
        let (equal, strict) = space.status_rows(&status);
        let Some(interior) = space.interior(&equal, &strict, &[])? else {
            continue;
        };
        let mut closure = space.system(0);
        for row in &equal {
            closure.add_eq(row.coeffs.clone(), row.rhs.clone());
        }
        for row in &strict {
            closure.add_ge(row.coeffs.clone(), row.rhs.clone());
        }
        let (r_star, x_star) = match maximize_linear_fractional(&share, &closure)? {
            LpOutcome::Optimal { value, point } => (value, point),
            other => return Err(Error::Internal(format!("share maximization not optimal: {other:?}"))),
        };
        let attained_at = if check_strict(&x_star, &strict) {
            Some(x_star.clone())
        } else {
            // Some other point of the open region may still reach r*.
            let level = Constraint::new(
                share
                    .numerator
                    .coeffs
                    .iter()
                    .zip(&share.denominator.coeffs)
                    .map(|(a, b)| a - &r_star * b)
                    .collect(),
                &r_star * &share.denominator.constant - &share.numerator.constant,
            );
            space.interior(&equal, &strict, &[level])?
        };
        let value = victory_weight * status.victory() + &r_star;
        let replace = match &best {
            None => true,
            Some(b) => value > b.value || (value == b.value && b.attained_at.is_none() && attained_at.is_some()),
        };
        if replace {
            best = Some(Piece {
                status,
                value,
                closure_point: x_star,
                interior,
                attained_at,
            });
        }
    }
    let best = best.ok_or_else(|| Error::Internal("no victory status is reachable".into()))?;
    let label = best.status.describe(game);
    if let Some(x) = best.attained_at {
        return Ok(BestResponseReport {
            kind,
            responder: c,
            attained: true,
            value: best.value,
            witness: Investment::new(x),
            optimal_issues: None,
            status: format!("{label}: optimum attained"),
        });
    }
    // Walk from the closure optimizer toward the interior point until the
    // utility is within ε. Points strictly between them lie in the open
    // region, and the share is continuous, so this terminates.
    let target = &best.value - epsilon;
    let mut delta = rat(1, 2);
    for _ in 0..256 {
        let x: Vec<Rational> = best
            .closure_point
            .iter()
            .zip(&best.interior)
            .map(|(a, b)| a + &delta * (b - a))
            .collect();
        let u = utility_at(game, &space.totals_with(&x), &kind, c)?;
        if u >= target {
            return Ok(BestResponseReport {
                kind,
                responder: c,
                attained: false,
                value: best.value,
                witness: Investment::new(x),
                optimal_issues: None,
                status: format!("{label} region open: supremum not attained"),
            });
        }
        delta /= int(2);
    }
    Err(Error::Internal("epsilon witness search did not converge".into()))
}

/// Best response for any kind. `epsilon` only matters for Plus.
pub fn best_response(
    game: &AggregatedGame,
    c: usize,
    opponents: &[Rational],
    kind: &UtilityKind,
    epsilon: &Rational,
) -> Result<BestResponseReport> {
    match kind {
        UtilityKind::Frac => best_response_frac(game, c, opponents),
        UtilityKind::Ind => best_response_ind(game, c, opponents),
        UtilityKind::Max(v) => best_response_max(game, c, opponents, v),
        UtilityKind::Plus(v) => best_response_plus(game, c, opponents, v, epsilon),
    }
}

/// True iff all-in on `better` gives `c` a strictly higher share than all-in
/// on `worse` against every pure opponent profile.
///
/// After clearing the (positive) denominators the comparison is linear in
/// the opponents' spend, so it is enough to check opponent profiles where
/// every rival is focused on one issue.
pub fn frac_strictly_dominates(game: &AggregatedGame, c: usize, better: usize, worse: usize) -> Result<bool> {
    game.check_candidate(c)?;
    for issue in [better, worse] {
        game.check_issue(issue)?;
        if !game.is_playable(issue) {
            return Err(Error::InvalidArgument(format!("issue {issue} is dead")));
        }
    }
    let rivals: Vec<usize> = (0..game.num_candidates())
        .filter(|&d| d != c && game.budget(d).is_positive())
        .collect();
    let playable = game.playable_issues();
    let mut picks = vec![0usize; rivals.len()];
    loop {
        let mut opp = vec![zero(); game.num_issues()];
        for (k, &d) in rivals.iter().enumerate() {
            opp[playable[picks[k]]] += game.budget(d);
        }
        if focused_value(game, c, better, &opp) <= focused_value(game, c, worse, &opp) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == picks.len() {
                return Ok(true);
            }
            picks[k] += 1;
            if picks[k] < playable.len() {
                break;
            }
            picks[k] = 0;
            k += 1;
        }
    }
}
