use std::path::PathBuf;

use priming_core::counterexamples::{run_all, run_case};
use priming_core::engine::{expected_utility, payoffs_at, shares_at, victory_at, votes_at};
use priming_core::equilibrium::{best_response_dynamics, nash_frac_general, nash_two_candidates};
use priming_core::io::{
    best_response_json, case_report_json, certificate_json, dynamics_json, game_json, kind_json, parse_full_profile,
    parse_game_input, parse_mixed_profile, parse_profile, payoff_table_json, profile_json, rational_json,
    rationals_json, two_candidate_json, GameInput,
};
use priming_core::model::{validate_instance, AggregatedGame, Investment, Profile};
use priming_core::oracle::{
    brute_force_best_response, brute_force_epsilon_equilibria, grid_deviation, DEFAULT_EVALUATION_BUDGET,
};
use priming_core::rational::{format_rational, rat, zero, Rational};
use priming_core::response::best_response;
use priming_core::{verify_equilibrium, DynamicsOutcome, UtilityKind};
use serde_json::{json, Value};

use crate::{
    Algorithm, Command, Failure, GlobalArgs, Inputs, Outcome, Output, Utility, EXIT_CONTRACT, EXIT_INVALID, EXIT_OK,
};

const DEFAULT_EPSILON: (i64, i64) = (1, 1000);

pub fn run(command: &Command, global: &GlobalArgs, inputs: &mut Inputs) -> Result<Outcome, Failure> {
    if global.output == Output::Csv && !matches!(command, Command::Eval { .. }) {
        return Err(Failure::invalid("csv output is available for eval only"));
    }
    match command {
        Command::Validate { input } => validate(inputs, input),
        Command::Aggregate { input } => aggregate(inputs, input),
        Command::Eval { game, profile, mixed } => eval(inputs, global, game, profile.as_ref(), mixed.as_ref()),
        Command::BestResponse {
            game,
            profile,
            candidate,
        } => respond(inputs, global, game, profile, candidate),
        Command::Nash {
            game,
            algorithm,
            max_rounds,
            start,
        } => nash(inputs, global, game, *algorithm, *max_rounds, start.as_ref()),
        Command::Verify { game, profile } => verify(inputs, global, game, profile),
        Command::Oracle {
            game,
            profile,
            candidate,
            budget,
        } => oracle(inputs, global, game, profile.as_ref(), candidate.as_deref(), *budget),
        Command::Counterexamples { name } => counterexamples(name),
    }
}

fn done(result: Value, summary: String) -> Result<Outcome, Failure> {
    Ok(Outcome {
        result,
        summary,
        exit_code: EXIT_OK,
        csv: None,
    })
}

fn load_game(inputs: &mut Inputs, path: &PathBuf) -> Result<AggregatedGame, Failure> {
    let text = inputs.read(path)?;
    Ok(parse_game_input(&text)?.game()?)
}

fn kind_for(global: &GlobalArgs, game: &AggregatedGame) -> Result<UtilityKind, Failure> {
    let weight = || {
        global
            .victory_weight
            .clone()
            .unwrap_or_else(|| Rational::from_integer((game.num_candidates() as i64).into()))
    };
    let kind = match global.utility {
        Utility::Frac => UtilityKind::Frac,
        Utility::Ind => UtilityKind::Ind,
        Utility::Plus => UtilityKind::Plus(weight()),
        Utility::Max => UtilityKind::Max(weight()),
    };
    kind.check(game.num_candidates())?;
    Ok(kind)
}

fn epsilon(global: &GlobalArgs) -> Result<Rational, Failure> {
    let eps = global
        .epsilon
        .clone()
        .unwrap_or_else(|| rat(DEFAULT_EPSILON.0, DEFAULT_EPSILON.1));
    if eps < zero() {
        return Err(Failure::invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    Ok(eps)
}

fn candidate(game: &AggregatedGame, name: &str) -> Result<usize, Failure> {
    game.candidate_index(name)
        .ok_or_else(|| Failure::invalid(format!("unknown candidate {name:?}")))
}

fn validate(inputs: &mut Inputs, path: &PathBuf) -> Result<Outcome, Failure> {
    let text = inputs.read(path)?;
    match parse_game_input(&text)? {
        GameInput::Instance(instance) => {
            let violations: Vec<String> = validate_instance(&instance).iter().map(ToString::to_string).collect();
            let valid = violations.is_empty();
            let summary = if valid {
                format!(
                    "valid instance: {} candidates, {} issues, {} voters",
                    instance.candidates.len(),
                    instance.issues.len(),
                    instance.voters.len()
                )
            } else {
                format!("invalid instance: {} violations", violations.len())
            };
            Ok(Outcome {
                result: json!({"form": "instance", "valid": valid, "violations": violations}),
                summary,
                exit_code: if valid { EXIT_OK } else { EXIT_INVALID },
                csv: None,
            })
        }
        GameInput::Compact(game) => done(
            json!({"form": "compact", "valid": true, "violations": []}),
            format!(
                "valid compact game: {} candidates, {} user issues",
                game.num_candidates(),
                game.num_issues() - 1
            ),
        ),
    }
}

fn aggregate(inputs: &mut Inputs, path: &PathBuf) -> Result<Outcome, Failure> {
    let game = load_game(inputs, path)?;
    let summary = format!(
        "aggregated {} candidates over {} user issues",
        game.num_candidates(),
        game.num_issues() - 1
    );
    done(game_json(&game), summary)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let fail = |e: csv::Error| Failure::contract(format!("writing csv: {e}"));
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(header).map_err(fail)?;
    for row in rows {
        out.write_record(&row).map_err(fail)?;
    }
    let bytes = out
        .into_inner()
        .map_err(|e| Failure::contract(format!("writing csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8"))
}

fn eval(
    inputs: &mut Inputs,
    global: &GlobalArgs,
    game_path: &PathBuf,
    profile_path: Option<&PathBuf>,
    mixed_path: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    let game = load_game(inputs, game_path)?;
    let kind = kind_for(global, &game)?;
    if let Some(path) = mixed_path {
        let mixed = parse_mixed_profile(&game, &inputs.read(path)?)?;
        let values = (0..game.num_candidates())
            .map(|c| expected_utility(&game, &mixed, &kind, c))
            .collect::<Result<Vec<_>, _>>()?;
        let csv = csv_table(
            &["candidate", "expected_utility"],
            game.candidates()
                .iter()
                .zip(&values)
                .map(|(name, v)| vec![name.clone(), format_rational(v)]),
        )?;
        let result = json!({
            "kind": kind_json(&kind),
            "expected_utilities": game.candidates().iter().cloned().zip(values.iter().map(rational_json)).collect::<serde_json::Map<_, _>>(),
        });
        return Ok(Outcome {
            result,
            summary: format!("expected {} utilities of a mixed profile", kind.name()),
            exit_code: EXIT_OK,
            csv: Some(csv),
        });
    }
    let path = profile_path.expect("clap requires --profile or --mixed");
    let profile = parse_full_profile(&game, &inputs.read(path)?)?;
    let totals = profile.totals();
    let votes = votes_at(&game, &totals);
    let shares = shares_at(&game, &totals)?;
    let victory = victory_at(&game, &totals);
    let utilities = payoffs_at(&game, &totals, &kind)?;
    let csv = csv_table(
        &["candidate", "votes", "share", "victory", "utility"],
        (0..game.num_candidates()).map(|c| {
            let mut row = vec![game.candidates()[c].clone()];
            row.extend([&votes[c], &shares[c], &victory[c], &utilities[c]].map(format_rational));
            row
        }),
    )?;
    let result = json!({
        "kind": kind_json(&kind),
        "issues": game.issues(),
        "totals": rationals_json(&totals),
        "payoffs": payoff_table_json(&game, &votes, &shares, &victory, &utilities),
    });
    let leaders: Vec<&str> = (0..game.num_candidates())
        .filter(|&c| victory[c] > zero())
        .map(|c| game.candidates()[c].as_str())
        .collect();
    Ok(Outcome {
        result,
        summary: format!("{} utilities evaluated; leading: {}", kind.name(), leaders.join(", ")),
        exit_code: EXIT_OK,
        csv: Some(csv),
    })
}

fn respond(
    inputs: &mut Inputs,
    global: &GlobalArgs,
    game_path: &PathBuf,
    profile_path: &PathBuf,
    name: &str,
) -> Result<Outcome, Failure> {
    let game = load_game(inputs, game_path)?;
    let kind = kind_for(global, &game)?;
    let c = candidate(&game, name)?;
    let partial = parse_profile(&game, &inputs.read(profile_path)?)?;
    let opponents = opponent_totals(&game, c, &partial)?;
    let report = best_response(&game, c, &opponents, &kind, &epsilon(global)?)?;
    let summary = format!(
        "{} best response of {name}: value {}{}",
        kind.name(),
        report.value,
        if report.attained {
            ""
        } else {
            " (supremum, not attained)"
        }
    );
    done(best_response_json(&game, &report), summary)
}

fn opponent_totals(game: &AggregatedGame, c: usize, partial: &[Option<Investment>]) -> Result<Vec<Rational>, Failure> {
    let mut totals = vec![zero(); game.num_issues()];
    for (d, inv) in partial.iter().enumerate() {
        if d == c {
            continue;
        }
        let inv = inv
            .as_ref()
            .ok_or_else(|| Failure::invalid(format!("no investment for {}", game.candidates()[d])))?;
        for (t, x) in totals.iter_mut().zip(inv.amounts()) {
            *t += x;
        }
    }
    Ok(totals)
}

fn nash(
    inputs: &mut Inputs,
    global: &GlobalArgs,
    game_path: &PathBuf,
    algorithm: Algorithm,
    max_rounds: usize,
    start: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    let game = load_game(inputs, game_path)?;
    let kind = kind_for(global, &game)?;
    if start.is_some() && algorithm != Algorithm::Dynamics {
        return Err(Failure::invalid("--start applies to --algorithm dynamics only"));
    }
    match algorithm {
        Algorithm::General => {
            if kind != UtilityKind::Frac {
                return Err(Failure::contract(format!(
                    "the support-enumeration algorithm computes frac equilibria only; pure {} equilibria need not exist",
                    kind.name()
                )));
            }
            let cert = nash_frac_general(&game)?;
            done(
                certificate_json(&game, &cert),
                "frac equilibrium found and verified".into(),
            )
        }
        Algorithm::TwoCandidate => {
            let run = nash_two_candidates(&game, &kind)?;
            let summary = format!(
                "two-candidate {} equilibrium after {} moves",
                kind.name(),
                run.moves.len()
            );
            done(two_candidate_json(&game, &run), summary)
        }
        Algorithm::Dynamics => {
            if matches!(kind, UtilityKind::Plus(_)) {
                return Err(Failure::contract(
                    "plus best responses need not exist; dynamics are undefined",
                ));
            }
            let start = match start {
                Some(path) => Some(parse_full_profile(&game, &inputs.read(path)?)?),
                None => None,
            };
            let outcome = best_response_dynamics(&game, &kind, start, max_rounds)?;
            let (summary, code) = match &outcome {
                DynamicsOutcome::Converged { steps, .. } => {
                    (format!("dynamics converged after {} steps", steps.len()), EXIT_OK)
                }
                DynamicsOutcome::Unknown { reason, .. } => (format!("no equilibrium found: {reason}"), EXIT_CONTRACT),
            };
            Ok(Outcome {
                result: dynamics_json(&game, &outcome),
                summary,
                exit_code: code,
                csv: None,
            })
        }
    }
}

fn verify(
    inputs: &mut Inputs,
    global: &GlobalArgs,
    game_path: &PathBuf,
    profile_path: &PathBuf,
) -> Result<Outcome, Failure> {
    let game = load_game(inputs, game_path)?;
    let kind = kind_for(global, &game)?;
    let profile = parse_full_profile(&game, &inputs.read(profile_path)?)?;
    let cert = verify_equilibrium(&game, &profile, &kind)?;
    let improving: Vec<&str> = cert
        .checks
        .iter()
        .filter(|ch| ch.improving || ch.support_indifferent == Some(false))
        .map(|ch| game.candidates()[ch.candidate].as_str())
        .collect();
    let (summary, code) = if cert.valid {
        (format!("{} equilibrium verified", kind.name()), EXIT_OK)
    } else {
        (
            format!(
                "not a {} equilibrium: {} can improve",
                kind.name(),
                improving.join(", ")
            ),
            EXIT_CONTRACT,
        )
    };
    Ok(Outcome {
        result: certificate_json(&game, &cert),
        summary,
        exit_code: code,
        csv: None,
    })
}

fn oracle(
    inputs: &mut Inputs,
    global: &GlobalArgs,
    game_path: &PathBuf,
    profile_path: Option<&PathBuf>,
    name: Option<&str>,
    budget: Option<u128>,
) -> Result<Outcome, Failure> {
    let game = load_game(inputs, game_path)?;
    let kind = kind_for(global, &game)?;
    let k = global.grid;
    let eps = global.epsilon.clone().unwrap_or_else(zero);
    if eps < zero() {
        return Err(Failure::invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    match (profile_path, name) {
        (Some(path), Some(name)) => {
            let c = candidate(&game, name)?;
            let partial = parse_profile(&game, &inputs.read(path)?)?;
            let opponents = opponent_totals(&game, c, &partial)?;
            let (inv, value) = brute_force_best_response(&game, c, &opponents, &kind, k)?;
            done(
                json!({
                    "kind": kind_json(&kind),
                    "grid": k,
                    "responder": name,
                    "issues": game.issues(),
                    "best": rationals_json(inv.amounts()),
                    "value": rational_json(&value),
                }),
                format!("k = {k} grid best response of {name}: value {value}"),
            )
        }
        (Some(path), None) => {
            let profile = parse_full_profile(&game, &inputs.read(path)?)?;
            let found = grid_deviation(&game, &profile, &kind, k, &eps)?;
            let (deviation, summary, code) = match found {
                None => (
                    Value::Null,
                    format!("no k = {k} grid deviation gains more than {eps}"),
                    EXIT_OK,
                ),
                Some(d) => (
                    json!({
                        "candidate": game.candidates()[d.candidate],
                        "investment": rationals_json(d.investment.amounts()),
                        "value": rational_json(&d.value),
                        "current": rational_json(&d.current),
                    }),
                    format!(
                        "{} gains on the k = {k} grid: {} over {}",
                        game.candidates()[d.candidate],
                        d.value,
                        d.current
                    ),
                    EXIT_CONTRACT,
                ),
            };
            Ok(Outcome {
                result: json!({
                    "kind": kind_json(&kind),
                    "grid": k,
                    "epsilon": rational_json(&eps),
                    "issues": game.issues(),
                    "deviation": deviation,
                }),
                summary,
                exit_code: code,
                csv: None,
            })
        }
        (None, _) => {
            let budget = budget.unwrap_or(DEFAULT_EVALUATION_BUDGET);
            let found = brute_force_epsilon_equilibria(&game, &kind, k, &eps, budget)?;
            let profiles: Vec<Value> = found.iter().map(|p: &Profile| profile_json(&game, p)).collect();
            done(
                json!({
                    "kind": kind_json(&kind),
                    "grid": k,
                    "epsilon": rational_json(&eps),
                    "issues": game.issues(),
                    "equilibria": profiles,
                }),
                format!("{} k = {k} grid equilibria", found.len()),
            )
        }
    }
}

fn counterexamples(name: &str) -> Result<Outcome, Failure> {
    let reports = if name == "all" {
        run_all()?
    } else {
        vec![run_case(name)?]
    };
    let passed = reports.iter().all(|r| r.passed);
    let failing: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let summary = if passed {
        format!("{} counterexample checks passed", reports.len())
    } else {
        format!("failing counterexamples: {}", failing.join(", "))
    };
    Ok(Outcome {
        result: json!({
            "passed": passed,
            "cases": reports.iter().map(case_report_json).collect::<Vec<_>>(),
        }),
        summary,
        exit_code: if passed { EXIT_OK } else { EXIT_CONTRACT },
        csv: None,
    })
}
