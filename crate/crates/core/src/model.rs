//! Election instances, their aggregated rank form, and strategy profiles.
//!
//! Issue index 0 of an [`AggregatedGame`] is the slack issue. Every
//! [`Investment`] spends its candidate's budget exactly, with unspent money
//! parked on slack.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{dot, sum, zero, Rational};

pub const SLACK_ISSUE: usize = 0;
pub const SLACK_NAME: &str = "slack";

#[derive(Debug, Clone, PartialEq)]
pub struct VoterRecord {
    /// `quality[c][i]`, one row per candidate, one entry per user issue.
    pub quality: Vec<Vec<Rational>>,
    /// Initial salience per user issue.
    pub salience0: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionInstance {
    pub candidates: Vec<String>,
    pub issues: Vec<String>,
    pub elasticities: Vec<Rational>,
    pub budgets: Vec<Rational>,
    pub voters: Vec<VoterRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    DuplicateName {
        kind: &'static str,
        name: String,
    },
    NoCandidates,
    NegativeQuality {
        voter: usize,
        candidate: usize,
        issue: usize,
    },
    QualitySumAboveOne {
        voter: usize,
        issue: usize,
        sum: Rational,
    },
    NegativeSalience {
        voter: usize,
        issue: usize,
    },
    SalienceSumNotOne {
        voter: usize,
        sum: Rational,
    },
    NegativeElasticity {
        issue: usize,
    },
    NegativeBudget {
        candidate: usize,
    },
    ZeroTotalBudget,
    DegenerateElectorate,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Violation::DuplicateName { kind, name } => write!(f, "duplicate {kind} name {name:?}"),
            Violation::NoCandidates => write!(f, "no candidates"),
            Violation::NegativeQuality {
                voter,
                candidate,
                issue,
            } => write!(f, "voter {voter}, candidate {candidate}, issue {issue}: quality < 0"),
            Violation::QualitySumAboveOne { voter, issue, sum } => {
                write!(f, "voter {voter}, issue {issue}: quality sum > 1 (got {sum})")
            }
            Violation::NegativeSalience { voter, issue } => {
                write!(f, "voter {voter}, issue {issue}: initial salience < 0")
            }
            Violation::SalienceSumNotOne { voter, sum } => {
                write!(f, "voter {voter}: salience sum ≠ 1 (got {sum})")
            }
            Violation::NegativeElasticity { issue } => write!(f, "issue {issue}: elasticity < 0"),
            Violation::NegativeBudget { candidate } => write!(f, "candidate {candidate}: budget < 0"),
            Violation::ZeroTotalBudget => write!(f, "total budget zero: aggregation undefined"),
            Violation::DegenerateElectorate => {
                write!(f, "degenerate instance: all vote shares undefined")
            }
        }
    }
}

fn duplicates(kind: &'static str, names: &[String], out: &mut Vec<Violation>) {
    for (k, name) in names.iter().enumerate() {
        if names[..k].contains(name) {
            out.push(Violation::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
}

/// Every violated instance invariant, with coordinates. Empty iff valid.
pub fn validate_instance(instance: &ElectionInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let nc = instance.candidates.len();
    let ni = instance.issues.len();
    if nc == 0 {
        out.push(Violation::NoCandidates);
    }
    duplicates("candidate", &instance.candidates, &mut out);
    duplicates("issue", &instance.issues, &mut out);
    if instance.elasticities.len() != ni {
        out.push(Violation::Shape(format!(
            "{} elasticities for {ni} issues",
            instance.elasticities.len()
        )));
    }
    if instance.budgets.len() != nc {
        out.push(Violation::Shape(format!(
            "{} budgets for {nc} candidates",
            instance.budgets.len()
        )));
    }
    for (issue, rho) in instance.elasticities.iter().enumerate() {
        if rho.is_negative() {
            out.push(Violation::NegativeElasticity { issue });
        }
    }
    for (candidate, w) in instance.budgets.iter().enumerate() {
        if w.is_negative() {
            out.push(Violation::NegativeBudget { candidate });
        }
    }
    if instance.budgets.len() == nc && nc > 0 && !sum(&instance.budgets).is_positive() {
        out.push(Violation::ZeroTotalBudget);
    }

    let mut shapes_ok = true;
    for (v, voter) in instance.voters.iter().enumerate() {
        if voter.quality.len() != nc || voter.quality.iter().any(|row| row.len() != ni) {
            out.push(Violation::Shape(format!(
                "voter {v}: quality must be {nc} candidates x {ni} issues"
            )));
            shapes_ok = false;
        } else {
            for (c, row) in voter.quality.iter().enumerate() {
                for (i, q) in row.iter().enumerate() {
                    if q.is_negative() {
                        out.push(Violation::NegativeQuality {
                            voter: v,
                            candidate: c,
                            issue: i,
                        });
                    }
                }
            }
            for i in 0..ni {
                let s = sum(voter.quality.iter().map(|row| &row[i]));
                if s > Rational::one() {
                    out.push(Violation::QualitySumAboveOne {
                        voter: v,
                        issue: i,
                        sum: s,
                    });
                }
            }
        }
        if voter.salience0.len() != ni {
            out.push(Violation::Shape(format!(
                "voter {v}: {} initial saliences for {ni} issues",
                voter.salience0.len()
            )));
            shapes_ok = false;
            continue;
        }
        for (i, s) in voter.salience0.iter().enumerate() {
            if s.is_negative() {
                out.push(Violation::NegativeSalience { voter: v, issue: i });
            }
        }
        let total = sum(&voter.salience0);
        if !total.is_one() {
            out.push(Violation::SalienceSumNotOne { voter: v, sum: total });
        }
    }
    if shapes_ok && !bias_terms(instance).iter().any(Signed::is_positive) {
        out.push(Violation::DegenerateElectorate);
    }
    out
}

/// `B̄^c = Σ_v Σ_i q^v_i(c) · s^v_i(0)` per candidate.
fn bias_terms(instance: &ElectionInstance) -> Vec<Rational> {
    (0..instance.candidates.len())
        .map(|c| instance.voters.iter().map(|v| dot(&v.quality[c], &v.salience0)).sum())
        .collect()
}

/// Per-candidate rank vectors over issues `0..=n` (slack first).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedGame {
    candidates: Vec<String>,
    issues: Vec<String>,
    ranks: Vec<Vec<Rational>>,
    budgets: Vec<Rational>,
    total_budget: Rational,
    rank_sums: Vec<Rational>,
    playable: Vec<usize>,
}

/// Collapses the voters into one rank vector per candidate.
pub fn aggregate(instance: &ElectionInstance) -> Result<AggregatedGame> {
    let violations = validate_instance(instance);
    if violations.contains(&Violation::ZeroTotalBudget) {
        return Err(Error::ZeroTotalBudget);
    }
    if violations.contains(&Violation::DegenerateElectorate) {
        return Err(Error::DegenerateElectorate);
    }
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let total = sum(&instance.budgets);
    let ranks = bias_terms(instance)
        .into_iter()
        .enumerate()
        .map(|(c, bias)| {
            let base = bias / &total;
            let mut row = Vec::with_capacity(instance.issues.len() + 1);
            row.push(base.clone());
            for (i, rho) in instance.elasticities.iter().enumerate() {
                let q: Rational = instance.voters.iter().map(|v| &v.quality[c][i]).sum();
                row.push(&base + q * rho);
            }
            row
        })
        .collect();
    AggregatedGame::from_ranks(
        instance.candidates.clone(),
        instance.issues.clone(),
        ranks,
        instance.budgets.clone(),
    )
}

impl AggregatedGame {
    /// Builds a game directly from ranks. `issues` names the user issues;
    /// each rank row has one extra leading entry for slack.
    pub fn from_ranks(
        candidates: Vec<String>,
        issues: Vec<String>,
        ranks: Vec<Vec<Rational>>,
        budgets: Vec<Rational>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidGame(msg));
        if candidates.is_empty() {
            return bad("no candidates".into());
        }
        if ranks.len() != candidates.len() || budgets.len() != candidates.len() {
            return bad(format!(
                "{} candidates but {} rank rows and {} budgets",
                candidates.len(),
                ranks.len(),
                budgets.len()
            ));
        }
        let width = issues.len() + 1;
        for (c, row) in ranks.iter().enumerate() {
            if row.len() != width {
                return bad(format!(
                    "candidate {:?} has {} ranks, expected {width} (slack first)",
                    candidates[c],
                    row.len()
                ));
            }
            if row.iter().any(Signed::is_negative) {
                return bad(format!("candidate {:?} has a negative rank", candidates[c]));
            }
        }
        for (c, w) in budgets.iter().enumerate() {
            if w.is_negative() {
                return bad(format!("candidate {:?} has a negative budget", candidates[c]));
            }
        }
        let mut names = Vec::new();
        for (kind, list) in [("candidate", &candidates), ("issue", &issues)] {
            duplicates(kind, list, &mut names);
        }
        if issues.iter().any(|i| i == SLACK_NAME) {
            return bad(format!("issue name {SLACK_NAME:?} is reserved"));
        }
        if let Some(v) = names.first() {
            return bad(v.to_string());
        }
        let total_budget = sum(&budgets);
        if !total_budget.is_positive() {
            return Err(Error::ZeroTotalBudget);
        }
        let rank_sums: Vec<Rational> = (0..width).map(|i| sum(ranks.iter().map(|r| &r[i]))).collect();
        let playable: Vec<usize> = (0..width).filter(|&i| rank_sums[i].is_positive()).collect();
        if playable.is_empty() {
            return Err(Error::DegenerateElectorate);
        }
        let mut all_issues = Vec::with_capacity(width);
        all_issues.push(SLACK_NAME.to_string());
        all_issues.extend(issues);
        Ok(AggregatedGame {
            candidates,
            issues: all_issues,
            ranks,
            budgets,
            total_budget,
            rank_sums,
            playable,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Issue count including slack.
    pub fn num_issues(&self) -> usize {
        self.issues.len()
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    /// Issue names, `"slack"` first.
    pub fn issues(&self) -> &[String] {
        &self.issues
    }

    pub fn user_issues(&self) -> &[String] {
        &self.issues[1..]
    }

    pub fn candidate_index(&self, name: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == name)
    }

    pub fn ranks(&self, c: usize) -> &[Rational] {
        &self.ranks[c]
    }

    pub fn all_ranks(&self) -> &[Vec<Rational>] {
        &self.ranks
    }

    pub fn rank_sums(&self) -> &[Rational] {
        &self.rank_sums
    }

    pub fn budget(&self, c: usize) -> &Rational {
        &self.budgets[c]
    }

    pub fn budgets(&self) -> &[Rational] {
        &self.budgets
    }

    pub fn total_budget(&self) -> &Rational {
        &self.total_budget
    }

    /// `Q^{-c}_i = Q*_i - Q^c_i`
    pub fn rival_ranks(&self, c: usize) -> Vec<Rational> {
        self.rank_sums.iter().zip(&self.ranks[c]).map(|(s, q)| s - q).collect()
    }

    /// Issues with `Q*_i > 0`. An issue no candidate gains from is dead:
    /// spending there would leave vote shares undefined, so strategies
    /// keep it at zero.
    pub fn playable_issues(&self) -> &[usize] {
        &self.playable
    }

    pub fn is_playable(&self, issue: usize) -> bool {
        self.rank_sums.get(issue).is_some_and(Signed::is_positive)
    }

    pub fn check_candidate(&self, c: usize) -> Result<()> {
        if c < self.num_candidates() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "candidate index {c} out of range for {} candidates",
                self.num_candidates()
            )))
        }
    }

    pub fn check_issue(&self, issue: usize) -> Result<()> {
        if issue < self.num_issues() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "issue index {issue} out of range for {} issues",
                self.num_issues()
            )))
        }
    }

    /// Checks that `amounts` is a legal full-budget allocation of `budget`.
    fn check_allocation(&self, amounts: &[Rational], budget: &Rational, who: &str) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(format!("{who}: {msg}")));
        if amounts.len() != self.num_issues() {
            return bad(format!(
                "{} entries, expected {} (slack first)",
                amounts.len(),
                self.num_issues()
            ));
        }
        if let Some(i) = amounts.iter().position(Signed::is_negative) {
            return bad(format!("negative amount on issue {:?}", self.issues[i]));
        }
        if let Some(i) = (0..amounts.len()).find(|&i| !amounts[i].is_zero() && !self.is_playable(i)) {
            return bad(format!(
                "spends on dead issue {:?} (no candidate ranks on it)",
                self.issues[i]
            ));
        }
        let total = sum(amounts);
        if total != *budget {
            return bad(format!("spends {total}, budget is {budget}"));
        }
        Ok(())
    }

    pub fn check_investment(&self, c: usize, investment: &Investment) -> Result<()> {
        self.check_candidate(c)?;
        self.check_allocation(investment.amounts(), &self.budgets[c], &self.candidates[c])
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.len() != self.num_candidates() {
            return Err(Error::InvalidProfile(format!(
                "{} investments for {} candidates",
                profile.len(),
                self.num_candidates()
            )));
        }
        for (c, inv) in profile.investments().iter().enumerate() {
            self.check_investment(c, inv)?;
        }
        Ok(())
    }

    /// Checks a joint opponent total `w^{-c}`.
    pub fn check_opponents(&self, c: usize, opponents: &[Rational]) -> Result<()> {
        self.check_candidate(c)?;
        let budget = &self.total_budget - &self.budgets[c];
        self.check_allocation(opponents, &budget, "opponents of candidate")
            .map_err(|e| match e {
                Error::InvalidProfile(msg) => Error::InvalidProfile(msg.replacen("candidate", &self.candidates[c], 1)),
                other => other,
            })
    }

    /// All-in on `issue` for candidate `c`.
    pub fn focused(&self, c: usize, issue: usize) -> Investment {
        Investment::focused(self.num_issues(), issue, self.budgets[c].clone())
    }

    /// Each candidate all-in on `issues[c]`.
    pub fn focused_profile(&self, issues: &[usize]) -> Profile {
        Profile::new(issues.iter().enumerate().map(|(c, &i)| self.focused(c, i)).collect())
    }
}

/// One candidate's allocation over issues `0..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Investment(Vec<Rational>);

impl Investment {
    pub fn new(amounts: Vec<Rational>) -> Self {
        Investment(amounts)
    }

    pub fn focused(num_issues: usize, issue: usize, budget: Rational) -> Self {
        let mut amounts = vec![zero(); num_issues];
        amounts[issue] = budget;
        Investment(amounts)
    }

    pub fn amounts(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_amounts(self) -> Vec<Rational> {
        self.0
    }

    pub fn total(&self) -> Rational {
        sum(&self.0)
    }

    /// Issues with strictly positive spend.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i].is_positive()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile(Vec<Investment>);

impl Profile {
    pub fn new(investments: Vec<Investment>) -> Self {
        Profile(investments)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn investments(&self) -> &[Investment] {
        &self.0
    }

    pub fn investment(&self, c: usize) -> &Investment {
        &self.0[c]
    }

    pub fn with_investment(&self, c: usize, investment: Investment) -> Profile {
        let mut next = self.clone();
        next.0[c] = investment;
        next
    }

    /// `w_i = Σ_c w^c_i`
    pub fn totals(&self) -> Vec<Rational> {
        let width = self.0.first().map_or(0, |inv| inv.0.len());
        let mut out = vec![zero(); width];
        for inv in &self.0 {
            for (acc, x) in out.iter_mut().zip(&inv.0) {
                *acc += x;
            }
        }
        out
    }

    /// `w^{-c}`, the joint spend of everyone but `c`.
    pub fn others(&self, c: usize) -> Vec<Rational> {
        let mut totals = self.totals();
        for (acc, x) in totals.iter_mut().zip(&self.0[c].0) {
            *acc -= x;
        }
        totals
    }
}

/// Votes and shares computed voter by voter from the unsimplified model.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteBreakdown {
    pub votes: Vec<Rational>,
    pub shares: Vec<Rational>,
}

/// Evaluates the salience dynamics voter by voter: each voter's saliences
/// move to `ρ_i · w_i + s_i(0)`, are renormalized, and weight the voter's
/// quality scores. Spend on slack is ignored and candidates may leave
/// budget unspent here.
pub fn per_voter_share(instance: &ElectionInstance, profile: &Profile) -> Result<VoteBreakdown> {
    let violations = validate_instance(instance);
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let nc = instance.candidates.len();
    let ni = instance.issues.len();
    if profile.len() != nc {
        return Err(Error::InvalidProfile(format!(
            "{} investments for {nc} candidates",
            profile.len()
        )));
    }
    for (c, inv) in profile.investments().iter().enumerate() {
        let who = &instance.candidates[c];
        if inv.0.len() != ni + 1 {
            return Err(Error::InvalidProfile(format!(
                "{who}: {} entries, expected {} (slack first)",
                inv.0.len(),
                ni + 1
            )));
        }
        if inv.0.iter().any(Signed::is_negative) {
            return Err(Error::InvalidProfile(format!("{who}: negative amount")));
        }
        if sum(&inv.0[1..]) > instance.budgets[c] {
            return Err(Error::InvalidProfile(format!("{who}: spends over budget")));
        }
    }
    let totals = profile.totals();
    let mut votes = vec![zero(); nc];
    for voter in &instance.voters {
        let salience: Vec<Rational> = (0..ni)
            .map(|i| &instance.elasticities[i] * &totals[i + 1] + &voter.salience0[i])
            .collect();
        let norm = sum(&salience);
        for (c, p) in votes.iter_mut().enumerate() {
            *p += dot(&voter.quality[c], &salience) / &norm;
        }
    }
    let all = sum(&votes);
    if all.is_zero() {
        return Err(Error::InvalidProfile("vote share undefined: no votes cast".into()));
    }
    let shares = votes.iter().map(|p| p / &all).collect();
    Ok(VoteBreakdown { votes, shares })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, rat};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    pub(crate) fn example_instance() -> ElectionInstance {
        ElectionInstance {
            candidates: vec!["c1".into(), "c2".into()],
            issues: vec!["i1".into(), "i2".into()],
            elasticities: vec![int(1), int(2)],
            budgets: vec![int(1), int(1)],
            voters: vec![VoterRecord {
                quality: vec![vec![r("0.5"), r("0.2")], vec![r("0.3"), r("0.4")]],
                salience0: vec![r("0.6"), r("0.4")],
            }],
        }
    }

    #[test]
    fn example_instance_is_valid() {
        assert_eq!(validate_instance(&example_instance()), vec![]);
    }

    #[test]
    fn salience_and_quality_violations_are_reported() {
        let mut inst = example_instance();
        inst.voters[0].salience0 = vec![r("0.6"), r("0.5")];
        let v = validate_instance(&inst);
        assert_eq!(
            v,
            vec![Violation::SalienceSumNotOne {
                voter: 0,
                sum: rat(11, 10)
            }]
        );
        assert!(v[0].to_string().contains("salience sum ≠ 1"));

        let mut inst = example_instance();
        inst.voters[0].quality[1][0] = r("0.7");
        let v = validate_instance(&inst);
        assert_eq!(
            v,
            vec![Violation::QualitySumAboveOne {
                voter: 0,
                issue: 0,
                sum: rat(6, 5)
            }]
        );
        assert!(v[0].to_string().contains("quality sum > 1"));
    }

    #[test]
    fn aggregation_matches_hand_values() {
        let game = aggregate(&example_instance()).unwrap();
        assert_eq!(game.ranks(0), &[r("0.19"), r("0.69"), r("0.59")]);
        assert_eq!(game.ranks(1), &[r("0.17"), r("0.47"), r("0.97")]);
        assert_eq!(game.rank_sums(), &[r("0.36"), r("1.16"), r("1.56")]);
        assert_eq!(game.playable_issues(), &[0, 1, 2]);
    }

    #[test]
    fn zero_elasticity_flattens_ranks() {
        let mut inst = example_instance();
        inst.elasticities = vec![int(0), int(0)];
        let game = aggregate(&inst).unwrap();
        for c in 0..2 {
            let q = game.ranks(c);
            assert!(q.iter().all(|x| *x == q[0]));
        }
    }

    #[test]
    fn aggregation_rejects_degenerate_inputs() {
        let mut inst = example_instance();
        inst.budgets = vec![int(0), int(0)];
        assert_eq!(aggregate(&inst), Err(Error::ZeroTotalBudget));
        let mut inst = example_instance();
        inst.voters[0].quality = vec![vec![int(0), int(0)], vec![int(0), int(0)]];
        assert_eq!(aggregate(&inst), Err(Error::DegenerateElectorate));
    }

    #[test]
    fn per_voter_example() {
        let inst = example_instance();
        let profile = Profile::new(vec![
            Investment::new(vec![int(0), int(1), int(0)]),
            Investment::new(vec![int(0), int(0), int(1)]),
        ]);
        let out = per_voter_share(&inst, &profile).unwrap();
        assert_eq!(out.votes, vec![r("0.32"), r("0.36")]);
        assert_eq!(out.shares[0], rat(8, 17));
    }

    #[test]
    fn zero_spend_share_is_bias_ratio() {
        let inst = example_instance();
        let profile = Profile::new(vec![Investment::new(vec![int(0); 3]), Investment::new(vec![int(0); 3])]);
        let out = per_voter_share(&inst, &profile).unwrap();
        // B̄ = (0.38, 0.34)
        assert_eq!(out.shares[0], rat(19, 36));
    }

    #[test]
    fn profile_checks() {
        let game = aggregate(&example_instance()).unwrap();
        let ok = game.focused_profile(&[1, 2]);
        assert!(game.check_profile(&ok).is_ok());
        let under = ok.with_investment(0, Investment::new(vec![int(0), rat(1, 2), int(0)]));
        assert!(matches!(game.check_profile(&under), Err(Error::InvalidProfile(_))));
        assert_eq!(ok.others(0), vec![int(0), int(0), int(1)]);
        assert_eq!(ok.totals(), vec![int(0), int(1), int(1)]);
    }

    #[test]
    fn dead_issues_are_not_playable() {
        let game = AggregatedGame::from_ranks(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![int(0), int(1), int(0)], vec![int(0), int(2), int(0)]],
            vec![int(1), int(0)],
        )
        .unwrap();
        assert_eq!(game.playable_issues(), &[1]);
        assert!(game.check_investment(0, &game.focused(0, 2)).is_err());
        assert!(game.check_investment(0, &game.focused(0, 1)).is_ok());
    }
}
