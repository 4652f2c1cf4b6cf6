//! Pure Nash equilibria: support enumeration for Frac with any number of
//! candidates, the focused ascent for two candidates, exact verification,
//! and best-response dynamics for the kinds where pure equilibria may not exist.

use std::collections::HashMap;

use num_traits::Signed;

use crate::engine::{focused_values, payoffs_at, utility_at, UtilityKind};
use crate::error::{Error, Result};
use crate::feasibility::{solve_feasibility, Feasibility, LinearSystem};
use crate::model::{AggregatedGame, Investment, Profile};
use crate::rational::{one, rat, zero, Rational};
use crate::response::{best_response, best_response_frac, dominant_issue_ind_2c};

/// ε used for Plus ε-witnesses during verification. Only the witness
/// depends on it; the verdict compares against the exact supremum.
const VERIFY_EPSILON: (i64, i64) = (1, 1_000_000);

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationCheck {
    pub candidate: usize,
    /// Which deviations were compared against.
    pub family: &'static str,
    pub current: Rational,
    /// Best deviation value (supremum for Plus).
    pub best_value: Rational,
    pub best_deviation: Investment,
    pub improving: bool,
    /// Frac only: focused utilities agree across the candidate's support.
    pub support_indifferent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCertificate {
    pub kind: UtilityKind,
    pub profile: Profile,
    pub supports: Vec<Vec<usize>>,
    pub utilities: Vec<Rational>,
    pub checks: Vec<DeviationCheck>,
    pub valid: bool,
}

/// Checks `profile` against each candidate's exact best deviation.
///
/// For Frac the deviation family is the focused investments, which is
/// enough because some focused investment is always a best response.
pub fn verify_equilibrium(
    game: &AggregatedGame,
    profile: &Profile,
    kind: &UtilityKind,
) -> Result<EquilibriumCertificate> {
    game.check_profile(profile)?;
    kind.check(game.num_candidates())?;
    let totals = profile.totals();
    let utilities = payoffs_at(game, &totals, kind)?;
    let epsilon = rat(VERIFY_EPSILON.0, VERIFY_EPSILON.1);
    let mut checks = Vec::with_capacity(game.num_candidates());
    for (c, current) in utilities.iter().cloned().enumerate() {
        let opp = profile.others(c);
        let check = if *kind == UtilityKind::Frac {
            let support = profile.investment(c).support();
            let focused = focused_values(game, c, &support, &opp);
            let indifferent = focused.windows(2).all(|w| w[0] == w[1]);
            let br = best_response_frac(game, c, &opp)?;
            DeviationCheck {
                candidate: c,
                family: "focused investments",
                improving: br.value > current,
                current,
                best_value: br.value,
                best_deviation: br.witness,
                support_indifferent: Some(indifferent),
            }
        } else {
            let br = best_response(game, c, &opp, kind, &epsilon)?;
            DeviationCheck {
                candidate: c,
                family: match kind {
                    UtilityKind::Ind => "ind best response",
                    UtilityKind::Max(_) => "max best response",
                    _ => "plus best response supremum",
                },
                improving: br.value > current,
                current,
                best_value: br.value,
                best_deviation: br.witness,
                support_indifferent: None,
            }
        };
        checks.push(check);
    }
    let valid = checks
        .iter()
        .all(|ch| !ch.improving && ch.support_indifferent != Some(false));
    Ok(EquilibriumCertificate {
        kind: kind.clone(),
        profile: profile.clone(),
        supports: profile.investments().iter().map(Investment::support).collect(),
        utilities,
        checks,
        valid,
    })
}

/// Nonempty subsets of `items`, each sorted, in lexicographic order.
fn lex_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u64..1 << items.len())
        .map(|mask| {
            (0..items.len())
                .filter(|&k| mask >> k & 1 == 1)
                .map(|k| items[k])
                .collect()
        })
        .collect();
    out.sort();
    out
}

/// Linear system for one support assignment: budgets spent on the support,
/// equal focused utility across it, and no better focused issue outside.
/// Cross-multiplying the utilities cancels the `B^c·B*` term, so every row
/// is linear in the rivals' spend.
fn support_system(game: &AggregatedGame, supports: &[Vec<usize>], active: &[bool]) -> (LinearSystem, Vec<Vec<usize>>) {
    let mut names = Vec::new();
    let mut var = vec![Vec::new(); supports.len()];
    for (c, set) in supports.iter().enumerate() {
        if !active[c] {
            continue;
        }
        for &i in set {
            var[c].push(names.len());
            names.push(format!("w[{}][{}]", game.candidates()[c], game.issues()[i]));
        }
    }
    let width = names.len();
    let mut sys = LinearSystem::with_names(names);
    let qs = game.rank_sums();
    for c in (0..supports.len()).filter(|&c| active[c]) {
        let qc = game.ranks(c);
        let w = game.budget(c);
        let mut budget_row = vec![zero(); width];
        for &v in &var[c] {
            budget_row[v] = one();
            sys.nonnegative(v);
        }
        sys.add_eq(budget_row, w.clone());

        // B^c and B* as linear forms in the rivals' variables.
        let mut b_c = vec![zero(); width];
        let mut b_s = vec![zero(); width];
        for d in (0..supports.len()).filter(|&d| d != c && active[d]) {
            for (&i, &v) in supports[d].iter().zip(&var[d]) {
                b_c[v] = qc[i].clone();
                b_s[v] = qs[i].clone();
            }
        }
        let rep = supports[c][0];
        let row = |j: usize| -> (Vec<Rational>, Rational) {
            let alpha = &qs[j] - &qs[rep];
            let beta = &qc[rep] - &qc[j];
            let coeffs = b_c.iter().zip(&b_s).map(|(x, y)| &alpha * x + &beta * y).collect();
            (coeffs, w * (&qc[j] * &qs[rep] - &qc[rep] * &qs[j]))
        };
        for &i in &supports[c][1..] {
            let (coeffs, rhs) = row(i);
            sys.add_eq(coeffs, rhs);
        }
        for &j in game.playable_issues() {
            if !supports[c].contains(&j) {
                let (coeffs, rhs) = row(j);
                sys.add_ge(coeffs, rhs);
            }
        }
    }
    (sys, var)
}

/// Frac equilibrium by support enumeration. Assignments are tried by total
/// support size, then lexicographically; the first feasible one wins.
pub fn nash_frac_general(game: &AggregatedGame) -> Result<EquilibriumCertificate> {
    let nc = game.num_candidates();
    let active: Vec<bool> = (0..nc).map(|c| game.budget(c).is_positive()).collect();
    let options: Vec<Vec<Vec<usize>>> = (0..nc)
        .map(|c| {
            if active[c] {
                lex_subsets(game.playable_issues())
            } else {
                vec![vec![game.playable_issues()[0]]]
            }
        })
        .collect();
    let min_total: usize = options.iter().map(|o| o.iter().map(Vec::len).min().unwrap_or(0)).sum();
    let max_total: usize = options.iter().map(|o| o.iter().map(Vec::len).max().unwrap_or(0)).sum();
    let mut chosen = Vec::with_capacity(nc);
    for total in min_total..=max_total {
        if let Some(cert) = search(game, &options, &active, total, &mut chosen)? {
            return Ok(cert);
        }
    }
    Err(Error::Internal(
        "support enumeration exhausted without an equilibrium".into(),
    ))
}

fn search(
    game: &AggregatedGame,
    options: &[Vec<Vec<usize>>],
    active: &[bool],
    remaining: usize,
    chosen: &mut Vec<usize>,
) -> Result<Option<EquilibriumCertificate>> {
    let c = chosen.len();
    if c == options.len() {
        if remaining != 0 {
            return Ok(None);
        }
        let supports: Vec<Vec<usize>> = chosen.iter().enumerate().map(|(d, &k)| options[d][k].clone()).collect();
        return try_supports(game, &supports, active);
    }
    let rest_min: usize = options[c + 1..]
        .iter()
        .map(|o| o.iter().map(Vec::len).min().unwrap_or(0))
        .sum();
    let rest_max: usize = options[c + 1..]
        .iter()
        .map(|o| o.iter().map(Vec::len).max().unwrap_or(0))
        .sum();
    for (k, set) in options[c].iter().enumerate() {
        let size = set.len();
        if size > remaining || remaining - size < rest_min || remaining - size > rest_max {
            continue;
        }
        chosen.push(k);
        let found = search(game, options, active, remaining - size, chosen)?;
        chosen.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

fn try_supports(
    game: &AggregatedGame,
    supports: &[Vec<usize>],
    active: &[bool],
) -> Result<Option<EquilibriumCertificate>> {
    let (sys, var) = support_system(game, supports, active);
    let Feasibility::Feasible(point) = solve_feasibility(&sys)? else {
        return Ok(None);
    };
    let investments = (0..supports.len())
        .map(|c| {
            let mut amounts = vec![zero(); game.num_issues()];
            for (&i, &v) in supports[c].iter().zip(&var[c]) {
                amounts[i] = point[v].clone();
            }
            Investment::new(amounts)
        })
        .collect();
    let mut cert = verify_equilibrium(game, &Profile::new(investments), &UtilityKind::Frac)?;
    if !cert.valid {
        return Err(Error::Internal(format!(
            "support assignment {supports:?} is feasible but fails verification"
        )));
    }
    cert.supports = supports.to_vec();
    Ok(Some(cert))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub candidate: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoCandidateRun {
    pub certificate: EquilibriumCertificate,
    /// Issue each candidate started on.
    pub start: [usize; 2],
    pub moves: Vec<Move>,
}

/// Two-candidate equilibrium in focused strategies.
///
/// Each candidate starts on its lowest-ranked issue (by its own rank) and
/// repeatedly climbs to the lowest own-rank level above its current issue
/// that holds a strictly better focused reply to the rival's issue. The
/// first candidate moves whenever it can. Plus and Max reuse the Frac
/// outcome; Ind plays the dominant issues.
pub fn nash_two_candidates(game: &AggregatedGame, kind: &UtilityKind) -> Result<TwoCandidateRun> {
    if game.num_candidates() != 2 {
        return Err(Error::InvalidArgument(format!(
            "two-candidate algorithm needs exactly 2 candidates, game has {}",
            game.num_candidates()
        )));
    }
    kind.check(2)?;
    if *kind == UtilityKind::Ind {
        let issues = [dominant_issue_ind_2c(game, 0)?, dominant_issue_ind_2c(game, 1)?];
        let certificate = verify_equilibrium(game, &game.focused_profile(&issues), kind)?;
        return Ok(TwoCandidateRun {
            certificate,
            start: issues,
            moves: Vec::new(),
        });
    }
    let playable = game.playable_issues();
    // focused against focused: only two issues carry spend
    let reply = |c: usize, i: usize, rival_issue: usize| {
        let (w, w_rival) = (game.budget(c), game.budget(1 - c));
        let (own, all) = (game.ranks(c), game.rank_sums());
        (w_rival * &own[rival_issue] + w * &own[i]) / (w_rival * &all[rival_issue] + w * &all[i])
    };
    let start = |c: usize| {
        let own = game.ranks(c);
        let rival = game.ranks(1 - c);
        *playable
            .iter()
            .min_by(|&&a, &&b| own[a].cmp(&own[b]).then(rival[a].cmp(&rival[b])).then(a.cmp(&b)))
            .expect("a playable issue exists")
    };
    // playable issues by own rank, then index
    let ladders: Vec<Vec<usize>> = (0..2)
        .map(|c| {
            let own = game.ranks(c);
            let mut order = playable.to_vec();
            order.sort_by(|&a, &b| own[a].cmp(&own[b]).then(a.cmp(&b)));
            order
        })
        .collect();
    let step = |c: usize, at: [usize; 2]| -> Option<usize> {
        let own = game.ranks(c);
        let current = reply(c, at[c], at[1 - c]);
        let ladder = &ladders[c];
        let mut k = ladder.partition_point(|&i| own[i] <= own[at[c]]);
        while k < ladder.len() {
            let level = &own[ladder[k]];
            let mut best: Option<(usize, Rational)> = None;
            while k < ladder.len() && own[ladder[k]] == *level {
                let i = ladder[k];
                let u = reply(c, i, at[1 - c]);
                if u > current && best.as_ref().is_none_or(|(_, b)| u > *b) {
                    best = Some((i, u));
                }
                k += 1;
            }
            if let Some((i, _)) = best {
                return Some(i);
            }
        }
        None
    };

    let first = [start(0), start(1)];
    let mut at = first;
    let mut moves = Vec::new();
    let limit = 2 * game.num_issues();
    'ascent: loop {
        for c in 0..2 {
            if let Some(to) = step(c, at) {
                moves.push(Move {
                    candidate: c,
                    from: at[c],
                    to,
                });
                at[c] = to;
                if moves.len() > limit {
                    return Err(Error::Internal("two-candidate ascent exceeded 2|I| moves".into()));
                }
                continue 'ascent;
            }
        }
        break;
    }
    let certificate = verify_equilibrium(game, &game.focused_profile(&at), kind)?;
    Ok(TwoCandidateRun {
        certificate,
        start: first,
        moves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsStep {
    pub round: usize,
    pub candidate: usize,
    pub investment: Investment,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsOutcome {
    Converged {
        certificate: EquilibriumCertificate,
        steps: Vec<DynamicsStep>,
    },
    /// No verdict. Never a claim that no equilibrium exists.
    Unknown {
        reason: String,
        steps: Vec<DynamicsStep>,
        /// Index into `steps` where a detected cycle begins.
        cycle_start: Option<usize>,
    },
}

/// Each candidate all-in on its highest own-rank playable issue, lowest
/// index on ties.
pub fn default_start(game: &AggregatedGame) -> Profile {
    let issues: Vec<usize> = (0..game.num_candidates())
        .map(|c| {
            let own = game.ranks(c);
            let mut best = game.playable_issues()[0];
            for &i in game.playable_issues() {
                if own[i] > own[best] {
                    best = i;
                }
            }
            best
        })
        .collect();
    game.focused_profile(&issues)
}

/// Round-robin best-response dynamics. A candidate keeps its strategy when
/// it already achieves its best-response value. Plus has no best response
/// in general and is rejected.
pub fn best_response_dynamics(
    game: &AggregatedGame,
    kind: &UtilityKind,
    start: Option<Profile>,
    max_rounds: usize,
) -> Result<DynamicsOutcome> {
    if matches!(kind, UtilityKind::Plus(_)) {
        return Err(Error::InvalidArgument(
            "dynamics need attained best responses; plus is unsupported".into(),
        ));
    }
    kind.check(game.num_candidates())?;
    let mut profile = start.unwrap_or_else(|| default_start(game));
    game.check_profile(&profile)?;
    let epsilon = rat(VERIFY_EPSILON.0, VERIFY_EPSILON.1);
    let mut steps = Vec::new();
    let mut seen: HashMap<(Profile, usize), usize> = HashMap::new();
    for round in 0..max_rounds {
        let mut changed = false;
        for c in 0..game.num_candidates() {
            if let Some(&at) = seen.get(&(profile.clone(), c)) {
                return Ok(DynamicsOutcome::Unknown {
                    reason: format!("cycle detected after {} steps", steps.len()),
                    steps,
                    cycle_start: Some(at),
                });
            }
            seen.insert((profile.clone(), c), steps.len());
            let current = utility_at(game, &profile.totals(), kind, c)?;
            let br = best_response(game, c, &profile.others(c), kind, &epsilon)?;
            if br.value > current {
                profile = profile.with_investment(c, br.witness.clone());
                steps.push(DynamicsStep {
                    round,
                    candidate: c,
                    investment: br.witness,
                    value: br.value,
                });
                changed = true;
            }
        }
        if !changed {
            let certificate = verify_equilibrium(game, &profile, kind)?;
            if certificate.valid {
                return Ok(DynamicsOutcome::Converged { certificate, steps });
            }
            return Ok(DynamicsOutcome::Unknown {
                reason: "fixed point failed verification".into(),
                steps,
                cycle_start: None,
            });
        }
    }
    Ok(DynamicsOutcome::Unknown {
        reason: format!("no fixed point within {max_rounds} rounds"),
        steps,
        cycle_start: None,
    })
}

/// Ind equilibrium search by best-response dynamics. May return `Unknown`.
pub fn equilibrium_search_ind(
    game: &AggregatedGame,
    start: Option<Profile>,
    max_rounds: usize,
) -> Result<DynamicsOutcome> {
    best_response_dynamics(game, &UtilityKind::Ind, start, max_rounds)
}
