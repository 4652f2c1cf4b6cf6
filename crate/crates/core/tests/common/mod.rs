#![allow(dead_code)]

use priming_core::engine::{payoffs_at, UtilityKind};
use priming_core::model::{AggregatedGame, ElectionInstance, Investment, Profile, VoterRecord};
use priming_core::rational::{int, rat, sum, zero, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_rat(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(0..=max_num), rng.gen_range(1..=max_den))
}

/// `parts` nonnegative rationals with denominator `den` summing to `total`.
pub fn random_split(rng: &mut impl Rng, total: &Rational, parts: usize, den: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (0..parts - 1).map(|_| rng.gen_range(0..=den)).collect();
    cuts.push(0);
    cuts.push(den);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| total * rat(w[1] - w[0], den)).collect()
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// A valid instance with the given shape; entries have denominators ≤ 20.
pub fn random_instance(rng: &mut impl Rng, nc: usize, ni: usize, nv: usize) -> ElectionInstance {
    loop {
        let mut voters = Vec::with_capacity(nv);
        for _ in 0..nv {
            let mut quality = vec![vec![zero(); ni]; nc];
            for i in 0..ni {
                let den = rng.gen_range(1..=20);
                let mut left = den;
                for row in quality.iter_mut() {
                    let take = rng.gen_range(0..=left);
                    left -= take;
                    row[i] = rat(take, den);
                }
            }
            let den = rng.gen_range(1..=20);
            let salience0 = random_split(rng, &int(1), ni, den);
            voters.push(VoterRecord { quality, salience0 });
        }
        let instance = ElectionInstance {
            candidates: names("c", nc),
            issues: names("i", ni),
            elasticities: (0..ni).map(|_| rand_rat(rng, 20, 20)).collect(),
            budgets: (0..nc).map(|_| rand_rat(rng, 20, 20)).collect(),
            voters,
        };
        if priming_core::validate_instance(&instance).is_empty() {
            return instance;
        }
    }
}

/// A rank-form game; slack gets a positive rank with probability 1/2.
pub fn random_game(rng: &mut impl Rng, nc: usize, ni: usize) -> AggregatedGame {
    loop {
        let with_slack = rng.gen_bool(0.5);
        let ranks: Vec<Vec<Rational>> = (0..nc)
            .map(|_| {
                (0..=ni)
                    .map(|i| {
                        if i == 0 && !with_slack {
                            zero()
                        } else {
                            rand_rat(rng, 20, 20)
                        }
                    })
                    .collect()
            })
            .collect();
        let budgets: Vec<Rational> = (0..nc)
            .map(|_| {
                if rng.gen_ratio(1, 8) {
                    zero()
                } else {
                    rat(rng.gen_range(1..=20), rng.gen_range(1..=20))
                }
            })
            .collect();
        if let Ok(game) = AggregatedGame::from_ranks(names("c", nc), names("i", ni), ranks, budgets) {
            return game;
        }
    }
}

/// Full-budget investment of `c` over the game's playable issues.
pub fn random_investment(rng: &mut impl Rng, game: &AggregatedGame, c: usize) -> Investment {
    let playable = game.playable_issues();
    let den = rng.gen_range(1..=20);
    let parts = random_split(rng, game.budget(c), playable.len(), den);
    let mut amounts = vec![zero(); game.num_issues()];
    for (&i, x) in playable.iter().zip(parts) {
        amounts[i] = x;
    }
    Investment::new(amounts)
}

pub fn random_profile(rng: &mut impl Rng, game: &AggregatedGame) -> Profile {
    Profile::new(
        (0..game.num_candidates())
            .map(|c| random_investment(rng, game, c))
            .collect(),
    )
}

/// Opponent totals `w^{-c}` from a random profile.
pub fn random_opponents(rng: &mut impl Rng, game: &AggregatedGame, c: usize) -> Vec<Rational> {
    random_profile(rng, game).others(c)
}

/// Sums of u_frac, u_ind and u_plus over candidates, which must equal
/// 1, 1 and V + 1. Returns false on any mismatch.
pub fn constant_sums_hold(game: &AggregatedGame, profile: &Profile) -> bool {
    let totals = profile.totals();
    let v = int(game.num_candidates() as i64);
    let check =
        |kind: UtilityKind, expect: Rational| sum(&payoffs_at(game, &totals, &kind).expect("valid profile")) == expect;
    check(UtilityKind::Frac, int(1))
        && check(UtilityKind::Ind, int(1))
        && check(UtilityKind::Plus(v.clone()), v + int(1))
}
