//! Seeded workloads for the solver benchmarks.

use priming_core::model::{AggregatedGame, ElectionInstance, Profile, VoterRecord};
use priming_core::rational::{rat, zero, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// Rank-form game with positive ranks, zero slack and positive budgets.
pub fn rank_game(seed: u64, candidates: usize, issues: usize) -> AggregatedGame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranks = (0..candidates)
        .map(|_| {
            std::iter::once(zero())
                .chain((0..issues).map(|_| rat(rng.gen_range(1..=20), rng.gen_range(1..=20))))
                .collect()
        })
        .collect();
    let budgets = (0..candidates).map(|_| rat(rng.gen_range(1..=20), 10)).collect();
    AggregatedGame::from_ranks(names("c", candidates), names("i", issues), ranks, budgets)
        .expect("generated game is valid")
}

/// Voter-level instance with uniform initial salience.
pub fn instance(seed: u64, candidates: usize, issues: usize, voters: usize) -> ElectionInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let voters = (0..voters)
        .map(|_| VoterRecord {
            quality: (0..candidates)
                .map(|_| {
                    (0..issues)
                        .map(|_| rat(rng.gen_range(0..=10), 10 * candidates as i64))
                        .collect()
                })
                .collect(),
            salience0: vec![rat(1, issues as i64); issues],
        })
        .collect();
    ElectionInstance {
        candidates: names("c", candidates),
        issues: names("i", issues),
        elasticities: (0..issues).map(|_| rat(rng.gen_range(0..=20), 10)).collect(),
        budgets: (0..candidates).map(|_| rat(rng.gen_range(1..=20), 10)).collect(),
        voters,
    }
}

/// Everyone idle except on their first playable issue.
pub fn idle_opponents(game: &AggregatedGame, c: usize) -> Vec<Rational> {
    let issue = game.playable_issues()[0];
    let all = game.focused_profile(&vec![issue; game.num_candidates()]);
    Profile::others(&all, c)
}
