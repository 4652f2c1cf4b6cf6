mod common;

use common::*;
use num_traits::Signed;
use priming_core::engine::{payoffs_at, utility_at};
use priming_core::equilibrium::nash_two_candidates;
use priming_core::feasibility::{maximize_linear_fractional, AffineForm, FractionalObjective, LinearSystem, LpOutcome};
use priming_core::io::{game_json, parse_compact};
use priming_core::model::{aggregate, per_voter_share, AggregatedGame, Investment, Profile};
use priming_core::oracle::brute_force_best_response;
use priming_core::rational::{int, one, rat, sum, zero, Rational};
use priming_core::response::{best_response, best_response_frac, best_response_ind, best_response_max};
use priming_core::UtilityKind;
use proptest::prelude::*;
use rand::Rng;

/// Victory indicator from shares, computed independently of the engine.
fn victory_from_shares(shares: &[Rational]) -> Vec<Rational> {
    let best = shares.iter().max().unwrap();
    let leaders = shares.iter().filter(|s| *s == best).count() as i64;
    shares
        .iter()
        .map(|s| if s == best { rat(1, leaders) } else { zero() })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn per_voter_probabilities_are_subprobabilities(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(1..=3);
        let ni = rng.gen_range(1..=3);
        let instance = random_instance(&mut rng, nc, ni, 1);
        let game = aggregate(&instance).unwrap();
        // spend part of each budget and leave the rest idle
        let profile = Profile::new((0..nc).map(|c| {
            let spend = game.budget(c) * rat(rng.gen_range(0..=4), 4);
            let mut amounts = vec![zero()];
            amounts.extend(random_split(&mut rng, &spend, ni, 7));
            Investment::new(amounts)
        }).collect());
        let p = per_voter_share(&instance, &profile).unwrap().votes;
        prop_assert!(p.iter().all(|x| !x.is_negative()));
        prop_assert!(sum(&p) <= one());
    }

    #[test]
    fn unspent_budget_equals_slack_spend(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(1..=3);
        let ni = rng.gen_range(1..=3);
        let nv = rng.gen_range(1..=4);
        let instance = random_instance(&mut rng, nc, ni, nv);
        let game = aggregate(&instance).unwrap();
        let mut idle = Vec::new();
        let mut on_slack = Vec::new();
        for c in 0..nc {
            let spend = game.budget(c) * rat(rng.gen_range(0..=5), 5);
            let user = random_split(&mut rng, &spend, ni, 9);
            let mut a = vec![zero()];
            a.extend(user.iter().cloned());
            idle.push(Investment::new(a));
            let mut b = vec![game.budget(c) - &spend];
            b.extend(user);
            on_slack.push(Investment::new(b));
        }
        let direct = per_voter_share(&instance, &Profile::new(idle)).unwrap().shares;
        let victory = victory_from_shares(&direct);
        let totals = Profile::new(on_slack).totals();
        let v = int(nc as i64);
        for kind in [UtilityKind::Frac, UtilityKind::Ind, UtilityKind::Plus(v.clone()), UtilityKind::Max(v)] {
            let expect: Vec<Rational> = (0..nc).map(|c| kind.combine(&victory[c], &direct[c])).collect();
            prop_assert_eq!(payoffs_at(&game, &totals, &kind).unwrap(), expect);
        }
    }

    #[test]
    fn aggregated_rank_sums_are_positive(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(1..=3);
        let instance = random_instance(&mut rng, nc, 2, 3);
        let game = aggregate(&instance).unwrap();
        prop_assert!(game.rank_sums().iter().all(Signed::is_positive));
    }

    #[test]
    fn compact_games_round_trip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(1..=4);
        let ni = rng.gen_range(1..=5);
        let game = random_game(&mut rng, nc, ni);
        let text = serde_json::to_string(&game_json(&game)).unwrap();
        let back = parse_compact(&text).unwrap();
        prop_assert_eq!(&back, &game);
        prop_assert_eq!(serde_json::to_string(&game_json(&back)).unwrap(), text);
    }

    #[test]
    fn frac_splits_over_optimal_issues_are_optimal(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(2..=3);
        let ni = rng.gen_range(1..=4);
        let game = random_game(&mut rng, nc, ni);
        let c = rng.gen_range(0..nc);
        let opp = random_opponents(&mut rng, &game, c);
        let br = best_response_frac(&game, c, &opp).unwrap();
        let optimal = br.optimal_issues.clone().unwrap();
        let parts = random_split(&mut rng, game.budget(c), optimal.len(), 11);
        let mut amounts = vec![zero(); game.num_issues()];
        for (&i, x) in optimal.iter().zip(parts) {
            amounts[i] = x;
        }
        let totals: Vec<Rational> = opp.iter().zip(&amounts).map(|(a, b)| a + b).collect();
        prop_assert_eq!(utility_at(&game, &totals, &UtilityKind::Frac, c).unwrap(), br.value);
    }

    #[test]
    fn frac_sees_rivals_only_through_their_sum(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ni = rng.gen_range(1..=4);
        let game = random_game(&mut rng, 3, ni);
        let opp = random_opponents(&mut rng, &game, 0);
        let mut ranks = game.all_ranks().to_vec();
        let (left, right) = ranks.split_at_mut(2);
        for (a, b) in left[1].iter_mut().zip(right[0].iter_mut()) {
            let pooled = &*a + &*b;
            *a = &pooled * rat(rng.gen_range(0..=6), 6);
            *b = pooled - &*a;
        }
        let resplit = AggregatedGame::from_ranks(
            game.candidates().to_vec(),
            game.user_issues().to_vec(),
            ranks,
            game.budgets().to_vec(),
        ).unwrap();
        let a = best_response_frac(&game, 0, &opp).unwrap();
        let b = best_response_frac(&resplit, 0, &opp).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ind_and_max_responses_are_attained(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(2..=3);
        let ni = rng.gen_range(1..=3);
        let game = random_game(&mut rng, nc, ni);
        let c = rng.gen_range(0..nc);
        let opp = random_opponents(&mut rng, &game, c);
        let ind = best_response_ind(&game, c, &opp).unwrap();
        let max = best_response_max(&game, c, &opp, &int(nc as i64)).unwrap();
        prop_assert!(ind.attained && max.attained);
        for (report, kind) in [(ind, UtilityKind::Ind), (max, UtilityKind::Max(int(nc as i64)))] {
            let totals: Vec<Rational> = opp.iter().zip(report.witness.amounts()).map(|(a, b)| a + b).collect();
            prop_assert_eq!(utility_at(&game, &totals, &kind, c).unwrap(), report.value);
        }
    }

    #[test]
    fn exact_responses_dominate_the_grid(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let nc = rng.gen_range(2..=3);
        let ni = rng.gen_range(1..=3);
        let game = random_game(&mut rng, nc, ni);
        let c = rng.gen_range(0..nc);
        let opp = random_opponents(&mut rng, &game, c);
        let v = int(nc as i64);
        for kind in [UtilityKind::Frac, UtilityKind::Ind, UtilityKind::Max(v)] {
            let exact = best_response(&game, c, &opp, &kind, &rat(1, 1000)).unwrap();
            let mut previous: Option<Rational> = None;
            for k in [1u32, 2, 4, 8] {
                let (_, value) = brute_force_best_response(&game, c, &opp, &kind, k).unwrap();
                prop_assert!(value <= exact.value);
                prop_assert!(previous.as_ref().is_none_or(|p| value >= *p));
                previous = Some(value);
            }
        }
    }

    #[test]
    fn two_candidate_frac_outcome_holds_for_plus_and_max(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ni = rng.gen_range(1..=4);
        let game = random_game(&mut rng, 2, ni);
        let v = int(rng.gen_range(2..=5));
        let frac = nash_two_candidates(&game, &UtilityKind::Frac).unwrap();
        for kind in [UtilityKind::Plus(v.clone()), UtilityKind::Max(v.clone())] {
            let run = nash_two_candidates(&game, &kind).unwrap();
            prop_assert_eq!(&run.certificate.profile, &frac.certificate.profile);
            prop_assert!(run.certificate.valid);
        }
    }
}

fn bounded_fractional() -> impl Strategy<Value = (LinearSystem, FractionalObjective)> {
    (2usize..=3).prop_flat_map(|n| {
        let row = move || (prop::collection::vec(-3i64..=3, n), -2i64..=3);
        (
            prop::collection::vec(row(), 0..=3),
            prop::collection::vec(-4i64..=4, n + 1),
            prop::collection::vec(0i64..=4, n),
            1i64..=4,
        )
            .prop_map(move |(rows, num, den, den0)| {
                let mut s = LinearSystem::new(n);
                for k in 0..n {
                    s.nonnegative(k);
                    let mut cap = vec![zero(); n];
                    cap[k] = int(1);
                    s.add_le(cap, int(1));
                }
                for (coeffs, b) in rows {
                    s.add_ge(coeffs.into_iter().map(int).collect(), int(b));
                }
                let objective = FractionalObjective {
                    numerator: AffineForm::new(num[..n].iter().map(|&x| int(x)).collect(), int(num[n])),
                    denominator: AffineForm::new(den.into_iter().map(int).collect(), int(den0)),
                };
                (s, objective)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fractional_optimum_dominates_the_grid((system, objective) in bounded_fractional()) {
        let n = system.num_vars();
        let outcome = maximize_linear_fractional(&objective, &system).unwrap();
        // scan x = p / 64 in integers: every coefficient here is an integer
        let ints = |v: &[Rational]| -> Vec<i64> { v.iter().map(|x| x.to_integer().try_into().unwrap()).collect() };
        let rows: Vec<(Vec<i64>, i64)> = system
            .inequalities()
            .iter()
            .map(|c| (ints(&c.coeffs), 64 * i64::try_from(c.rhs.to_integer()).unwrap()))
            .collect();
        let (num, num0) = (ints(&objective.numerator.coeffs), 64 * i64::try_from(objective.numerator.constant.to_integer()).unwrap());
        let (den, den0) = (ints(&objective.denominator.coeffs), 64 * i64::try_from(objective.denominator.constant.to_integer()).unwrap());
        let lin = |a: &[i64], p: &[i64]| -> i64 { a.iter().zip(p).map(|(x, y)| x * y).sum() };
        let mut grid_best: Option<(i64, i64)> = None;
        let mut point = vec![0i64; n];
        loop {
            if rows.iter().all(|(a, b)| lin(a, &point) >= *b) {
                let value = (lin(&num, &point) + num0, lin(&den, &point) + den0);
                if grid_best.is_none_or(|(bn, bd)| value.0 as i128 * bd as i128 > bn as i128 * value.1 as i128) {
                    grid_best = Some(value);
                }
            }
            let Some(k) = (0..n).find(|&k| point[k] < 64) else { break };
            point[k] += 1;
            for p in point.iter_mut().take(k) {
                *p = 0;
            }
        }
        let grid_best = grid_best.map(|(a, b)| rat(a, b));
        match outcome {
            LpOutcome::Optimal { value, point } => {
                prop_assert!(system.is_satisfied_by(&point));
                prop_assert_eq!(objective.eval(&point), value.clone());
                if let Some(best) = grid_best {
                    prop_assert!(value >= best);
                }
            }
            LpOutcome::Infeasible(cert) => {
                prop_assert!(cert.certifies(&system));
                prop_assert!(grid_best.is_none());
            }
            LpOutcome::Unbounded => prop_assert!(false, "bounded region reported unbounded"),
        }
    }
}
