//! Vote shares, victory indicators and the four utility variants.
//!
//! Everything a candidate cares about depends only on the total spend per
//! issue, so the `*_at` functions take that total vector directly. They are
//! the hot path for the oracle and for best responses.

use std::fmt;
use std::ops::Deref;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{AggregatedGame, Investment, Profile};
use crate::rational::{dot, int, sum, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum UtilityKind {
    Frac,
    Ind,
    Plus(Rational),
    Max(Rational),
}

impl UtilityKind {
    pub fn name(&self) -> &'static str {
        match self {
            UtilityKind::Frac => "frac",
            UtilityKind::Ind => "ind",
            UtilityKind::Plus(_) => "plus",
            UtilityKind::Max(_) => "max",
        }
    }

    pub fn victory_weight(&self) -> Option<&Rational> {
        match self {
            UtilityKind::Plus(v) | UtilityKind::Max(v) => Some(v),
            _ => None,
        }
    }

    /// Plus and Max need `V >= |C|`.
    pub fn check(&self, num_candidates: usize) -> Result<()> {
        match self.victory_weight() {
            Some(v) if *v < int(num_candidates as i64) => Err(Error::VictoryWeightTooSmall {
                weight: v.clone(),
                candidates: num_candidates,
            }),
            _ => Ok(()),
        }
    }

    /// Combines a victory value and a vote share into this kind's utility.
    pub fn combine(&self, victory: &Rational, share: &Rational) -> Rational {
        match self {
            UtilityKind::Frac => share.clone(),
            UtilityKind::Ind => victory.clone(),
            UtilityKind::Plus(v) => v * victory + share,
            UtilityKind::Max(v) => {
                let weighted = v * victory;
                if weighted >= *share {
                    weighted
                } else {
                    share.clone()
                }
            }
        }
    }
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.victory_weight() {
            Some(v) => write!(f, "{}(V={v})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffVector(pub Vec<Rational>);

impl PayoffVector {
    pub fn total(&self) -> Rational {
        sum(&self.0)
    }
}

impl Deref for PayoffVector {
    type Target = [Rational];

    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

/// `p(c) = Q^c · w` for every candidate.
pub fn votes_at(game: &AggregatedGame, totals: &[Rational]) -> Vec<Rational> {
    game.all_ranks().iter().map(|q| dot(q, totals)).collect()
}

fn shares_from_votes(votes: &[Rational]) -> Result<Vec<Rational>> {
    let all = sum(votes);
    if !all.is_positive() {
        return Err(Error::Internal("vote share denominator Q*·w is not positive".into()));
    }
    Ok(votes.iter().map(|p| p / &all).collect())
}

fn victory_from_votes(votes: &[Rational]) -> Vec<Rational> {
    let best = votes.iter().max().cloned().unwrap_or_else(zero);
    let leaders = votes.iter().filter(|p| **p == best).count();
    let value = Rational::one() / int(leaders as i64);
    votes
        .iter()
        .map(|p| if *p == best { value.clone() } else { zero() })
        .collect()
}

pub fn shares_at(game: &AggregatedGame, totals: &[Rational]) -> Result<Vec<Rational>> {
    shares_from_votes(&votes_at(game, totals))
}

pub fn victory_at(game: &AggregatedGame, totals: &[Rational]) -> Vec<Rational> {
    victory_from_votes(&votes_at(game, totals))
}

/// Every candidate's utility at total spend `totals`.
pub fn payoffs_at(game: &AggregatedGame, totals: &[Rational], kind: &UtilityKind) -> Result<Vec<Rational>> {
    let votes = votes_at(game, totals);
    let shares = shares_from_votes(&votes)?;
    if *kind == UtilityKind::Frac {
        return Ok(shares);
    }
    let victory = victory_from_votes(&votes);
    Ok(victory.iter().zip(&shares).map(|(v, r)| kind.combine(v, r)).collect())
}

/// Candidate `c`'s utility at total spend `totals`.
pub fn utility_at(game: &AggregatedGame, totals: &[Rational], kind: &UtilityKind, c: usize) -> Result<Rational> {
    let votes = votes_at(game, totals);
    let all = sum(&votes);
    if !all.is_positive() {
        return Err(Error::Internal("vote share denominator Q*·w is not positive".into()));
    }
    let share = &votes[c] / &all;
    if *kind == UtilityKind::Frac {
        return Ok(share);
    }
    let best = votes.iter().max().expect("at least one candidate");
    let victory = if votes[c] == *best {
        Rational::one() / int(votes.iter().filter(|p| *p == best).count() as i64)
    } else {
        zero()
    };
    Ok(kind.combine(&victory, &share))
}

/// `Q^c · w` per candidate for a full profile.
pub fn votes(game: &AggregatedGame, profile: &Profile) -> Result<Vec<Rational>> {
    game.check_profile(profile)?;
    Ok(votes_at(game, &profile.totals()))
}

/// `r(c) = Q^c·w / Q*·w`
pub fn vote_share(game: &AggregatedGame, profile: &Profile) -> Result<Vec<Rational>> {
    game.check_profile(profile)?;
    shares_at(game, &profile.totals())
}

/// `1/|argmax p|` for the vote leaders, `0` for everyone else.
pub fn victory(game: &AggregatedGame, profile: &Profile) -> Result<Vec<Rational>> {
    game.check_profile(profile)?;
    Ok(victory_at(game, &profile.totals()))
}

pub fn utility(game: &AggregatedGame, profile: &Profile, kind: &UtilityKind) -> Result<PayoffVector> {
    game.check_profile(profile)?;
    kind.check(game.num_candidates())?;
    payoffs_at(game, &profile.totals(), kind).map(PayoffVector)
}

/// Finite-support mixed strategies, one list of `(investment, probability)`
/// per candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile(pub Vec<Vec<(Investment, Rational)>>);

impl MixedProfile {
    pub fn pure(profile: &Profile) -> Self {
        MixedProfile(
            profile
                .investments()
                .iter()
                .map(|inv| vec![(inv.clone(), Rational::one())])
                .collect(),
        )
    }

    pub fn check(&self, game: &AggregatedGame) -> Result<()> {
        if self.0.len() != game.num_candidates() {
            return Err(Error::InvalidProfile(format!(
                "mixed profile has {} entries for {} candidates",
                self.0.len(),
                game.num_candidates()
            )));
        }
        for (c, support) in self.0.iter().enumerate() {
            let who = &game.candidates()[c];
            if support.is_empty() {
                return Err(Error::InvalidProfile(format!("{who}: empty mixture")));
            }
            for (inv, p) in support {
                game.check_investment(c, inv)?;
                if p.is_negative() {
                    return Err(Error::InvalidProfile(format!("{who}: negative probability {p}")));
                }
            }
            let total = sum(support.iter().map(|(_, p)| p));
            if !total.is_one() {
                return Err(Error::InvalidProfile(format!(
                    "{who}: probabilities sum to {total}, not 1"
                )));
            }
        }
        Ok(())
    }
}

/// Expected utility of `c` over the full product of supports. Exponential
/// in the number of candidates.
pub fn expected_utility(game: &AggregatedGame, mixed: &MixedProfile, kind: &UtilityKind, c: usize) -> Result<Rational> {
    game.check_candidate(c)?;
    mixed.check(game)?;
    kind.check(game.num_candidates())?;
    let mut total = zero();
    let mut picks = vec![0usize; mixed.0.len()];
    loop {
        let mut weight = Rational::one();
        let mut totals = vec![zero(); game.num_issues()];
        for (k, &pick) in picks.iter().enumerate() {
            let (inv, p) = &mixed.0[k][pick];
            weight *= p;
            for (acc, x) in totals.iter_mut().zip(inv.amounts()) {
                *acc += x;
            }
        }
        if !weight.is_zero() {
            total += weight * utility_at(game, &totals, kind, c)?;
        }
        // odometer over the support product
        let mut k = 0;
        loop {
            if k == picks.len() {
                return Ok(total);
            }
            picks[k] += 1;
            if picks[k] < mixed.0[k].len() {
                break;
            }
            picks[k] = 0;
            k += 1;
        }
    }
}

/// `(B^c + W^c Q^c_i) / (B* + W^c Q*_i)`: `c`'s share when going all-in on
/// `issue` against opponent spend `opponents`.
pub fn focused_utility(game: &AggregatedGame, c: usize, issue: usize, opponents: &[Rational]) -> Result<Rational> {
    game.check_candidate(c)?;
    game.check_issue(issue)?;
    if opponents.len() != game.num_issues() {
        return Err(Error::InvalidArgument(format!(
            "opponent spend has {} entries, expected {}",
            opponents.len(),
            game.num_issues()
        )));
    }
    Ok(focused_value(game, c, issue, opponents))
}

pub(crate) fn focused_value(game: &AggregatedGame, c: usize, issue: usize, opponents: &[Rational]) -> Rational {
    focused_values(game, c, &[issue], opponents).pop().expect("one issue")
}

/// Focused utilities for several issues, sharing the opponent terms.
pub(crate) fn focused_values(
    game: &AggregatedGame,
    c: usize,
    issues: &[usize],
    opponents: &[Rational],
) -> Vec<Rational> {
    let w = game.budget(c);
    let b_c = dot(game.ranks(c), opponents);
    let b_s = dot(game.rank_sums(), opponents);
    issues
        .iter()
        .map(|&i| (&b_c + w * &game.ranks(c)[i]) / (&b_s + w * &game.rank_sums()[i]))
        .collect()
}

/// Numerator of `∂u_frac/∂x_i` in the concise representation where `c`
/// invests `x_k` on each `k ∈ J \ {j}` and the remainder `W^c - Σ x` on `j`.
/// The value does not depend on `x_i` itself.
///
/// `x` is indexed by issue; `x[j]` is ignored and entries outside `J` must
/// be zero. Returns `(i, numerator)` for each `i ∈ J \ {j}` in issue order.
pub fn reduced_gradient_numerator(
    game: &AggregatedGame,
    c: usize,
    default_issue: usize,
    support: &[usize],
    x: &[Rational],
    opponents: &[Rational],
) -> Result<Vec<(usize, Rational)>> {
    game.check_candidate(c)?;
    let n = game.num_issues();
    if x.len() != n || opponents.len() != n {
        return Err(Error::InvalidArgument(format!("vectors must have {n} entries")));
    }
    for &i in support {
        game.check_issue(i)?;
    }
    let j = default_issue;
    if !support.contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "default issue {j} is not in the support"
        )));
    }
    let in_support = |k: usize| support.contains(&k);
    if let Some(k) = (0..n).find(|&k| k != j && !in_support(k) && !x[k].is_zero()) {
        return Err(Error::InvalidArgument(format!(
            "x has spend on issue {k} outside the support"
        )));
    }
    let spent = sum((0..n).filter(|&k| k != j).map(|k| &x[k]));
    if x.iter().enumerate().any(|(k, v)| k != j && v.is_negative()) || spent > *game.budget(c) {
        return Err(Error::InvalidArgument(
            "x must be nonnegative with total at most the budget".into(),
        ));
    }
    let qc = game.ranks(c);
    let qs = game.rank_sums();
    let b_c = dot(qc, opponents);
    let b_s = dot(qs, opponents);
    let mut issues: Vec<usize> = support.iter().copied().filter(|&i| i != j).collect();
    issues.sort_unstable();
    issues.dedup();
    Ok(issues
        .into_iter()
        .map(|i| {
            let rest = (0..n).filter(|&k| k != i && k != j && in_support(k));
            let (mut s_star, mut s_c, mut r) = (b_s.clone(), b_c.clone(), game.budget(c).clone());
            for k in rest {
                s_star += &qs[k] * &x[k];
                s_c += &qc[k] * &x[k];
                r -= &x[k];
            }
            let value = &qc[i] * &s_star - &qs[i] * &s_c - &qc[j] * &s_star
                + &qs[j] * &s_c
                + (&qc[i] * &qs[j] - &qs[i] * &qc[j]) * r;
            (i, value)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{g_ind_unnatural, g_max, g_plus, g_split};
    use crate::rational::{parse_rational, rat};

    fn inv(xs: &[Rational]) -> Investment {
        Investment::new(xs.to_vec())
    }

    #[test]
    fn split_game_three_way_tie() {
        let game = g_split();
        let profile = Profile::new(vec![
            inv(&[zero(), rat(1, 2), rat(1, 2)]),
            inv(&[zero(), zero(), zero()]),
            inv(&[zero(), zero(), zero()]),
        ]);
        assert_eq!(vote_share(&game, &profile).unwrap(), vec![rat(1, 3); 3]);
        assert_eq!(victory(&game, &profile).unwrap(), vec![rat(1, 3); 3]);
        let lopsided = profile.with_investment(0, game.focused(0, 2));
        assert_eq!(votes(&game, &lopsided).unwrap(), vec![int(1), int(0), int(2)]);
        assert_eq!(victory(&game, &lopsided).unwrap(), vec![zero(), zero(), int(1)]);
    }

    #[test]
    fn plus_game_votes_and_utility() {
        let game = g_plus();
        let x = rat(2, 5);
        let profile = game
            .focused_profile(&[1, 1, 1])
            .with_investment(0, inv(&[zero(), x.clone(), int(1) - &x]));
        let p = votes(&game, &profile).unwrap();
        assert_eq!(
            p,
            vec![int(10), parse_rational("5.4").unwrap(), parse_rational("9.8").unwrap()]
        );
        let u = utility(&game, &profile, &UtilityKind::Plus(int(4))).unwrap();
        assert_eq!(u[0], int(4) + rat(25, 63));
        assert_eq!(u.total(), int(5));
    }

    #[test]
    fn unnatural_all_in_first_issue() {
        let game = g_ind_unnatural();
        let profile = game.focused_profile(&[1, 1, 1]);
        let u = utility(&game, &profile, &UtilityKind::Ind).unwrap();
        assert_eq!(u.0, vec![int(1), zero(), zero()]);
    }

    #[test]
    fn victory_weight_is_checked() {
        let game = g_split();
        let profile = game.focused_profile(&[1, 1, 1]);
        assert!(matches!(
            utility(&game, &profile, &UtilityKind::Max(int(2))),
            Err(Error::VictoryWeightTooSmall { .. })
        ));
    }

    #[test]
    fn mixed_max_matches_closed_form() {
        // c2 plays all-in 1 w.p. x and all-in 2 w.p. 1 - x; c1 all-in 1.
        // Totals (2, 0) give votes (2, 2, 9/5, 2): three-way tie with c2, c4.
        // Totals (1, 1) give votes (2, 19/10, 2, 1): tie with c3.
        let game = g_max(rat(1, 10));
        let v = int(4);
        for x in [zero(), rat(1, 3), rat(1, 2), int(1)] {
            let mixed = MixedProfile(vec![
                vec![(game.focused(0, 1), int(1))],
                vec![(game.focused(1, 1), x.clone()), (game.focused(1, 2), int(1) - &x)],
                vec![(game.focused(2, 1), int(1))],
                vec![(game.focused(3, 1), int(1))],
            ]);
            let u = expected_utility(&game, &mixed, &UtilityKind::Max(v.clone()), 0).unwrap();
            assert_eq!(u, &x * &v / int(3) + (int(1) - &x) * &v / int(2));
        }
    }

    #[test]
    fn focused_utility_on_plus_game() {
        let game = g_plus();
        let idle = vec![zero(); 3];
        assert_eq!(focused_utility(&game, 0, 1, &idle).unwrap(), rat(10, 21));
        assert_eq!(focused_utility(&game, 0, 2, &idle).unwrap(), rat(10, 28));
    }

    #[test]
    fn gradient_numerator_is_zero_on_twin_issues() {
        let game = AggregatedGame::from_ranks(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![int(1), int(3), int(3)], vec![int(1), int(2), int(2)]],
            vec![int(1), int(1)],
        )
        .unwrap();
        let opp = vec![rat(1, 4), rat(1, 4), rat(1, 2)];
        let x = vec![zero(), rat(1, 3), zero()];
        let out = reduced_gradient_numerator(&game, 0, 2, &[1, 2], &x, &opp).unwrap();
        assert_eq!(out, vec![(1, zero())]);
    }

    #[test]
    fn gradient_numerator_rejects_bad_support() {
        let game = g_plus();
        let x = vec![zero(); 3];
        assert!(reduced_gradient_numerator(&game, 0, 2, &[1], &x, &x).is_err());
    }
}
