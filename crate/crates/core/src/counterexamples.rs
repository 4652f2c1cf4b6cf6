//! The four small games behind the existence and nonexistence results, with
//! scripted checks of their expected outcomes.
//!
//! All four are given in rank form with a zero slack column, so slack is a
//! dead issue and every budget goes to user issues.

use crate::engine::{payoffs_at, utility_at, UtilityKind};
use crate::equilibrium::{best_response_dynamics, verify_equilibrium, DynamicsOutcome};
use crate::error::Result;
use crate::model::{AggregatedGame, Investment};
use crate::oracle::{
    brute_force_best_response, brute_force_epsilon_equilibria, candidate_grid, DEFAULT_EVALUATION_BUDGET,
};
use crate::rational::{int, one, rat, sum, zero, Rational};
use crate::response::{best_response_frac, best_response_ind, best_response_plus, frac_strictly_dominates};

fn game(ranks: Vec<[Rational; 2]>, budgets: Vec<i64>) -> AggregatedGame {
    let names = (1..=ranks.len()).map(|k| format!("c{k}")).collect();
    let ranks = ranks.into_iter().map(|[a, b]| vec![zero(), a, b]).collect();
    AggregatedGame::from_ranks(
        names,
        vec!["1".into(), "2".into()],
        ranks,
        budgets.into_iter().map(int).collect(),
    )
    .expect("bundled game is well formed")
}

/// c1 can only tie for the lead by splitting its budget evenly.
pub fn g_split() -> AggregatedGame {
    game(
        vec![[int(1), int(1)], [int(2), int(0)], [int(0), int(2)]],
        vec![1, 0, 0],
    )
}

/// c1 wins alone iff it puts less than half on issue 1, while its share
/// keeps growing toward half: the u_plus supremum is not attained.
pub fn g_plus() -> AggregatedGame {
    game(
        vec![[int(10), int(10)], [int(0), int(9)], [int(11), int(9)]],
        vec![1, 0, 0],
    )
}

/// Four candidates with no pure u_max equilibrium for small `eps`.
pub fn g_max(eps: Rational) -> AggregatedGame {
    game(
        vec![
            [int(1), int(1)],
            [int(1), int(1) - &eps],
            [int(1) - &eps, int(1) + &eps],
            [int(1), int(0)],
        ],
        vec![1, 1, 0, 0],
    )
}

/// Three candidates, each strong on exactly one issue. All-in on issue 1 is
/// a u_ind equilibrium even though c2 and c3 spend against themselves.
pub fn g_ind_unnatural() -> AggregatedGame {
    let names = vec!["c1".into(), "c2".into(), "c3".into()];
    let ranks = (0..3)
        .map(|c| (0..4).map(|i| if i == c + 1 { one() } else { zero() }).collect())
        .collect();
    AggregatedGame::from_ranks(
        names,
        vec!["1".into(), "2".into(), "3".into()],
        ranks,
        vec![int(1), int(1), int(1)],
    )
    .expect("bundled game is well formed")
}

pub const CASE_NAMES: [&str; 4] = ["split", "plus", "max", "unnatural"];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckLine>,
}

#[derive(Default)]
struct Checks(Vec<CheckLine>);

impl Checks {
    fn check(&mut self, description: &str, passed: bool, detail: String) {
        self.0.push(CheckLine {
            description: description.into(),
            passed,
            detail,
        });
    }

    fn finish(self, name: &'static str) -> CaseReport {
        CaseReport {
            name,
            passed: self.0.iter().all(|c| c.passed),
            checks: self.0,
        }
    }
}

fn show(inv: &Investment) -> String {
    let parts: Vec<String> = inv.amounts()[1..].iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

pub fn run_case(name: &str) -> Result<CaseReport> {
    match name {
        "split" => check_split(),
        "plus" => check_plus(),
        "max" => check_max(),
        "unnatural" => check_unnatural(),
        other => Err(crate::error::Error::InvalidArgument(format!(
            "unknown counterexample {other:?}; expected one of {CASE_NAMES:?} or \"all\""
        ))),
    }
}

pub fn run_all() -> Result<Vec<CaseReport>> {
    CASE_NAMES.iter().map(|name| run_case(name)).collect()
}

fn check_split() -> Result<CaseReport> {
    let game = g_split();
    let idle = vec![zero(); 3];
    let half = Investment::new(vec![zero(), rat(1, 2), rat(1, 2)]);
    let mut out = Checks::default();

    let br = best_response_ind(&game, 0, &idle)?;
    out.check(
        "best_response_ind(c1) splits evenly for a three-way tie",
        br.witness == half && br.value == rat(1, 3),
        format!("witness {} value {}", show(&br.witness), br.value),
    );

    let (grid_best, grid_value) = brute_force_best_response(&game, 0, &idle, &UtilityKind::Ind, 2)?;
    out.check(
        "k = 2 grid oracle agrees",
        grid_best == half && grid_value == rat(1, 3),
        format!("grid witness {} value {}", show(&grid_best), grid_value),
    );

    let mut winners = Vec::new();
    for inv in candidate_grid(&game, 0, 20)? {
        if utility_at(&game, inv.amounts(), &UtilityKind::Ind, 0)? > zero() {
            winners.push(inv);
        }
    }
    out.check(
        "k = 20 grid: only (1/2, 1/2) gives c1 a positive u_ind",
        winners == vec![half],
        format!("{} grid points with u_ind > 0", winners.len()),
    );
    Ok(out.finish("split"))
}

/// Plus case settings: V = 4, witness tolerance 1/1000.
pub const PLUS_VICTORY_WEIGHT: i64 = 4;

fn check_plus() -> Result<CaseReport> {
    let game = g_plus();
    let v = int(PLUS_VICTORY_WEIGHT);
    let kind = UtilityKind::Plus(v.clone());
    let idle = vec![zero(); 3];
    let eps = rat(1, 1000);
    let supremum = &v + rat(20, 49);
    let mut out = Checks::default();

    let br = best_response_plus(&game, 0, &idle, &v, &eps)?;
    out.check(
        "best_response_plus(c1) is not attained",
        !br.attained,
        br.status.clone(),
    );
    out.check(
        "supremum is V + 20/49",
        br.value == supremum,
        format!("supremum {}", br.value),
    );
    let witness_value = utility_at(&game, br.witness.amounts(), &kind, 0)?;
    out.check(
        "witness is within epsilon of the supremum",
        witness_value >= &supremum - &eps && witness_value < supremum,
        format!("witness {} value {}", show(&br.witness), witness_value),
    );

    let k = 50;
    let (grid_best, grid_value) = brute_force_best_response(&game, 0, &idle, &kind, k)?;
    let step = rat(1, k as i64);
    let share = |x: &Rational| rat(10, 1) / (int(28) - int(7) * x);
    let gap_bound = share(&rat(1, 2)) - share(&(rat(1, 2) - &step));
    out.check(
        "k = 50 grid best is below the supremum by at most one grid step of share",
        grid_value < supremum && &supremum - &grid_value <= gap_bound,
        format!("grid witness {} value {}", show(&grid_best), grid_value),
    );

    let mut monotone = true;
    let mut previous: Option<Rational> = None;
    for inv in candidate_grid(&game, 0, k)? {
        let x = inv.amounts()[1].clone();
        let r = payoffs_at(&game, inv.amounts(), &UtilityKind::Frac)?[0].clone();
        if r != share(&x) {
            monotone = false;
        }
        // grid order runs x upward from 0
        if previous.as_ref().is_some_and(|p| r <= *p) {
            monotone = false;
        }
        previous = Some(r);
    }
    out.check(
        "c1's share 10/(28 - 7x) is strictly increasing in x",
        monotone,
        "checked on the k = 50 grid".into(),
    );
    Ok(out.finish("plus"))
}

/// Max case settings: rank gap 1/10, V = 4, grid k = 10.
pub const MAX_EPS: (i64, i64) = (1, 10);
pub const MAX_VICTORY_WEIGHT: i64 = 4;

fn check_max() -> Result<CaseReport> {
    let game = g_max(rat(MAX_EPS.0, MAX_EPS.1));
    let kind = UtilityKind::Max(int(MAX_VICTORY_WEIGHT));
    let mut out = Checks::default();

    for c in 0..2 {
        let dominates = frac_strictly_dominates(&game, c, 2, 1)?;
        out.check(
            &format!("issue 2 strictly frac-dominates issue 1 for c{}", c + 1),
            dominates,
            "checked at every opponent vertex profile".into(),
        );
    }

    let equilibria = brute_force_epsilon_equilibria(&game, &kind, 10, &zero(), DEFAULT_EVALUATION_BUDGET)?;
    out.check(
        "k = 10 grid has no pure u_max equilibrium",
        equilibria.is_empty(),
        format!("{} grid equilibria", equilibria.len()),
    );

    let outcome = best_response_dynamics(&game, &kind, None, 50)?;
    let (cycled, detail) = match &outcome {
        DynamicsOutcome::Unknown {
            cycle_start: Some(at),
            steps,
            ..
        } => (true, format!("cycle of length {} after {at} steps", steps.len() - at)),
        DynamicsOutcome::Unknown { reason, .. } => (false, reason.clone()),
        DynamicsOutcome::Converged { .. } => (false, "dynamics converged".into()),
    };
    out.check("u_max best-response dynamics cycle", cycled, detail);

    let a = game.focused_profile(&[1, 1, 1, 1]);
    let b = game.focused_profile(&[2, 2, 1, 1]);
    let sum_a = sum(&payoffs_at(&game, &a.totals(), &kind)?);
    let sum_b = sum(&payoffs_at(&game, &b.totals(), &kind)?);
    out.check(
        "u_max is not constant-sum",
        sum_a != sum_b,
        format!("sums {sum_a} and {sum_b}"),
    );
    Ok(out.finish("max"))
}

fn check_unnatural() -> Result<CaseReport> {
    let game = g_ind_unnatural();
    let profile = game.focused_profile(&[1, 1, 1]);
    let mut out = Checks::default();

    let cert = verify_equilibrium(&game, &profile, &UtilityKind::Ind)?;
    out.check(
        "all-in on issue 1 is a u_ind equilibrium",
        cert.valid,
        format!(
            "utilities {:?}",
            cert.utilities.iter().map(ToString::to_string).collect::<Vec<_>>()
        ),
    );

    let mut preferred = Vec::new();
    for c in 0..3 {
        let br = best_response_frac(&game, c, &profile.others(c))?;
        preferred.push(br.witness);
    }
    let distinct = preferred[0] != preferred[1] && preferred[0] != preferred[2] && preferred[1] != preferred[2];
    let against_interest = (1..3).all(|c| preferred[c] != *profile.investment(c));
    out.check(
        "frac-optimal replies differ per candidate; c2 and c3 play against their own share",
        distinct && against_interest,
        format!(
            "frac-optimal: {}",
            preferred.iter().map(show).collect::<Vec<_>>().join(" ")
        ),
    );
    Ok(out.finish("unnatural"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn bundled_games_have_dead_slack() {
        for game in [g_split(), g_plus(), g_max(rat(1, 10)), g_ind_unnatural()] {
            assert!(!game.is_playable(0));
            assert!(game.rank_sums()[1..].iter().all(|q| !q.is_zero()));
        }
    }

    #[test]
    fn unknown_case_is_rejected() {
        assert!(run_case("nope").is_err());
    }
}
