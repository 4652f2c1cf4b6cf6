//! Exhaustive grid oracle. Strategies are all allocations in multiples of
//! `W^c / k`; every value is exact, so comparisons against the solvers need
//! no tolerance.

use num_traits::Zero;

use crate::engine::{utility_at, UtilityKind};
use crate::error::{Error, Result};
use crate::model::{AggregatedGame, Investment, Profile};
use crate::rational::{int, zero, Rational};

/// Profile-evaluation cap for [`brute_force_epsilon_equilibria`].
pub const DEFAULT_EVALUATION_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub resolution: u32,
    pub issues: usize,
    pub budget: Rational,
}

/// Every composition of `resolution` units over `issues` slots, scaled by
/// `budget / resolution`, in ascending lexicographic order.
pub fn grid_strategies(spec: &GridSpec) -> Result<Vec<Investment>> {
    if spec.resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be at least 1".into()));
    }
    if spec.issues == 0 {
        return Ok(Vec::new());
    }
    let unit = &spec.budget / int(spec.resolution as i64);
    let mut out = Vec::new();
    let mut parts = vec![0u32; spec.issues];
    compositions(spec.resolution, 0, &mut parts, &mut |parts| {
        out.push(Investment::new(parts.iter().map(|&p| &unit * int(p as i64)).collect()));
    });
    Ok(out)
}

fn compositions(left: u32, slot: usize, parts: &mut [u32], emit: &mut impl FnMut(&[u32])) {
    if slot + 1 == parts.len() {
        parts[slot] = left;
        emit(parts);
        return;
    }
    for take in 0..=left {
        parts[slot] = take;
        compositions(left - take, slot + 1, parts, emit);
    }
}

/// Grid strategies of candidate `c`, over its playable issues only.
pub fn candidate_grid(game: &AggregatedGame, c: usize, resolution: u32) -> Result<Vec<Investment>> {
    game.check_candidate(c)?;
    if game.budget(c).is_zero() {
        if resolution == 0 {
            return Err(Error::InvalidArgument("grid resolution must be at least 1".into()));
        }
        return Ok(vec![Investment::new(vec![zero(); game.num_issues()])]);
    }
    let playable = game.playable_issues();
    let spec = GridSpec {
        resolution,
        issues: playable.len(),
        budget: game.budget(c).clone(),
    };
    Ok(grid_strategies(&spec)?
        .into_iter()
        .map(|inv| {
            let mut amounts = vec![zero(); game.num_issues()];
            for (&i, x) in playable.iter().zip(inv.into_amounts()) {
                amounts[i] = x;
            }
            Investment::new(amounts)
        })
        .collect())
}

fn with_own(opponents: &[Rational], own: &Investment) -> Vec<Rational> {
    opponents.iter().zip(own.amounts()).map(|(a, b)| a + b).collect()
}

/// Best grid investment for `c`; the lexicographically lowest on ties.
pub fn brute_force_best_response(
    game: &AggregatedGame,
    c: usize,
    opponents: &[Rational],
    kind: &UtilityKind,
    resolution: u32,
) -> Result<(Investment, Rational)> {
    game.check_opponents(c, opponents)?;
    kind.check(game.num_candidates())?;
    let mut best: Option<(Investment, Rational)> = None;
    for inv in candidate_grid(game, c, resolution)? {
        let u = utility_at(game, &with_own(opponents, &inv), kind, c)?;
        if best.as_ref().is_none_or(|(_, b)| u > *b) {
            best = Some((inv, u));
        }
    }
    best.ok_or_else(|| Error::Internal("empty grid".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridDeviation {
    pub candidate: usize,
    pub investment: Investment,
    pub value: Rational,
    pub current: Rational,
}

/// First grid deviation (candidate order, then grid order) that improves
/// on `profile` by more than `epsilon`.
pub fn grid_deviation(
    game: &AggregatedGame,
    profile: &Profile,
    kind: &UtilityKind,
    resolution: u32,
    epsilon: &Rational,
) -> Result<Option<GridDeviation>> {
    game.check_profile(profile)?;
    kind.check(game.num_candidates())?;
    let grids = (0..game.num_candidates())
        .map(|c| candidate_grid(game, c, resolution))
        .collect::<Result<Vec<_>>>()?;
    first_deviation(game, profile, kind, &grids, epsilon)
}

fn first_deviation(
    game: &AggregatedGame,
    profile: &Profile,
    kind: &UtilityKind,
    grids: &[Vec<Investment>],
    epsilon: &Rational,
) -> Result<Option<GridDeviation>> {
    let totals = profile.totals();
    for (c, grid) in grids.iter().enumerate() {
        let current = utility_at(game, &totals, kind, c)?;
        let bar = &current + epsilon;
        let opp = profile.others(c);
        for inv in grid {
            let u = utility_at(game, &with_own(&opp, inv), kind, c)?;
            if u > bar {
                return Ok(Some(GridDeviation {
                    candidate: c,
                    investment: inv.clone(),
                    value: u,
                    current,
                }));
            }
        }
    }
    Ok(None)
}

/// Every grid profile where no candidate gains more than `epsilon` from a
/// grid deviation. Errors out rather than sampling when the full product
/// would exceed `budget` utility evaluations.
pub fn brute_force_epsilon_equilibria(
    game: &AggregatedGame,
    kind: &UtilityKind,
    resolution: u32,
    epsilon: &Rational,
    budget: u128,
) -> Result<Vec<Profile>> {
    if *epsilon < zero() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    kind.check(game.num_candidates())?;
    let grids = (0..game.num_candidates())
        .map(|c| candidate_grid(game, c, resolution))
        .collect::<Result<Vec<_>>>()?;
    let profiles = grids.iter().try_fold(1u128, |acc, g| acc.checked_mul(g.len() as u128));
    let per_profile: u128 = 1 + grids.iter().map(|g| g.len() as u128).sum::<u128>();
    let required = profiles.and_then(|p| p.checked_mul(per_profile)).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::OracleBudgetExceeded { required, budget });
    }
    let mut out = Vec::new();
    let mut picks = vec![0usize; grids.len()];
    loop {
        let profile = Profile::new(picks.iter().enumerate().map(|(c, &k)| grids[c][k].clone()).collect());
        if first_deviation(game, &profile, kind, &grids, epsilon)?.is_none() {
            out.push(profile);
        }
        // last candidate varies fastest
        let mut c = grids.len();
        loop {
            if c == 0 {
                return Ok(out);
            }
            c -= 1;
            picks[c] += 1;
            if picks[c] < grids[c].len() {
                break;
            }
            picks[c] = 0;
        }
    }
}
