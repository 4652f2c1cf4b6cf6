//! JSON input and output.
//!
//! Inputs keep candidate order as written. Outputs are built as
//! `serde_json::Value` trees, whose object keys serialize sorted, and every
//! rational is a canonical `"p/q"` string, so identical results give
//! byte-identical text.

use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::counterexamples::CaseReport;
use crate::engine::{MixedProfile, UtilityKind};
use crate::equilibrium::{DynamicsOutcome, DynamicsStep, EquilibriumCertificate, TwoCandidateRun};
use crate::error::{Error, Result};
use crate::model::{aggregate, AggregatedGame, ElectionInstance, Investment, Profile, VoterRecord};
use crate::rational::{format_rational, sum, Rational, RawRational};
use crate::response::BestResponseReport;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    candidates: Vec<String>,
    issues: Vec<String>,
    rho: Vec<RawRational>,
    budgets: Vec<RawRational>,
    voters: Vec<VoterFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VoterFile {
    quality: IndexMap<String, Vec<RawRational>>,
    salience0: Vec<RawRational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompactFile {
    #[serde(default)]
    candidates: Option<Vec<String>>,
    #[serde(default)]
    issues: Option<Vec<String>>,
    ranks: IndexMap<String, Vec<RawRational>>,
    budgets: Vec<RawRational>,
}

fn raw(values: Vec<RawRational>) -> Vec<Rational> {
    values.into_iter().map(|r| r.0).collect()
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// A game file: voter-level data, or ranks given directly.
#[derive(Debug, Clone, PartialEq)]
pub enum GameInput {
    Instance(ElectionInstance),
    Compact(AggregatedGame),
}

impl GameInput {
    pub fn game(&self) -> Result<AggregatedGame> {
        match self {
            GameInput::Instance(instance) => aggregate(instance),
            GameInput::Compact(game) => Ok(game.clone()),
        }
    }
}

/// Parses either file form; a top-level `ranks` key selects the compact one.
pub fn parse_game_input(text: &str) -> Result<GameInput> {
    let probe: Value = serde_json::from_str(text).map_err(parse_err)?;
    let Some(object) = probe.as_object() else {
        return Err(Error::Parse("game file must be a JSON object".into()));
    };
    if object.contains_key("ranks") {
        parse_compact(text).map(GameInput::Compact)
    } else {
        parse_instance(text).map(GameInput::Instance)
    }
}

pub fn parse_instance(text: &str) -> Result<ElectionInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(parse_err)?;
    let mut voters = Vec::with_capacity(file.voters.len());
    for (v, mut voter) in file.voters.into_iter().enumerate() {
        let mut quality = Vec::with_capacity(file.candidates.len());
        for name in &file.candidates {
            let row = voter
                .quality
                .shift_remove(name)
                .ok_or_else(|| Error::Parse(format!("voter {v}: no quality entry for candidate {name:?}")))?;
            quality.push(raw(row));
        }
        if let Some(extra) = voter.quality.keys().next() {
            return Err(Error::Parse(format!(
                "voter {v}: unknown candidate {extra:?} in quality"
            )));
        }
        voters.push(VoterRecord {
            quality,
            salience0: raw(voter.salience0),
        });
    }
    Ok(ElectionInstance {
        candidates: file.candidates,
        issues: file.issues,
        elasticities: raw(file.rho),
        budgets: raw(file.budgets),
        voters,
    })
}

pub fn parse_compact(text: &str) -> Result<AggregatedGame> {
    let mut file: CompactFile = serde_json::from_str(text).map_err(parse_err)?;
    let candidates = match file.candidates.take() {
        Some(names) => names,
        None => file.ranks.keys().cloned().collect(),
    };
    let mut ranks = Vec::with_capacity(candidates.len());
    for name in &candidates {
        let row = file
            .ranks
            .shift_remove(name)
            .ok_or_else(|| Error::Parse(format!("no ranks for candidate {name:?}")))?;
        ranks.push(raw(row));
    }
    if let Some(extra) = file.ranks.keys().next() {
        return Err(Error::Parse(format!("ranks given for unknown candidate {extra:?}")));
    }
    let width = ranks.first().map_or(1, Vec::len);
    let issues = file
        .issues
        .unwrap_or_else(|| (1..width).map(|k| k.to_string()).collect());
    AggregatedGame::from_ranks(candidates, issues, ranks, raw(file.budgets))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    investments: IndexMap<String, Vec<RawRational>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedFile {
    mixed: IndexMap<String, Vec<MixedEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedEntry {
    investment: Vec<RawRational>,
    probability: RawRational,
}

/// Reads one candidate's allocation. Arrays may include slack first, or
/// list user issues only, in which case slack gets the unspent budget.
fn investment_from(game: &AggregatedGame, c: usize, amounts: Vec<Rational>) -> Result<Investment> {
    let n = game.num_issues();
    let amounts = if amounts.len() + 1 == n {
        let slack = game.budget(c) - sum(&amounts);
        std::iter::once(slack).chain(amounts).collect()
    } else if amounts.len() == n {
        amounts
    } else {
        return Err(Error::InvalidProfile(format!(
            "{}: {} entries, expected {} (slack first) or {} (user issues)",
            game.candidates()[c],
            amounts.len(),
            n,
            n - 1
        )));
    };
    let investment = Investment::new(amounts);
    game.check_investment(c, &investment)?;
    Ok(investment)
}

fn candidate_of(game: &AggregatedGame, name: &str) -> Result<usize> {
    game.candidate_index(name)
        .ok_or_else(|| Error::Parse(format!("unknown candidate {name:?}")))
}

/// Investments per candidate; candidates absent from the file are `None`.
pub fn parse_profile(game: &AggregatedGame, text: &str) -> Result<Vec<Option<Investment>>> {
    let file: ProfileFile = serde_json::from_str(text).map_err(parse_err)?;
    let mut out = vec![None; game.num_candidates()];
    for (name, amounts) in file.investments {
        let c = candidate_of(game, &name)?;
        out[c] = Some(investment_from(game, c, raw(amounts))?);
    }
    Ok(out)
}

/// Parses a profile file that must cover every candidate.
pub fn parse_full_profile(game: &AggregatedGame, text: &str) -> Result<Profile> {
    let partial = parse_profile(game, text)?;
    let mut investments = Vec::with_capacity(partial.len());
    for (c, inv) in partial.into_iter().enumerate() {
        investments
            .push(inv.ok_or_else(|| Error::InvalidProfile(format!("no investment for {}", game.candidates()[c])))?);
    }
    Ok(Profile::new(investments))
}

pub fn parse_mixed_profile(game: &AggregatedGame, text: &str) -> Result<MixedProfile> {
    let file: MixedFile = serde_json::from_str(text).map_err(parse_err)?;
    let mut out: Vec<Option<Vec<(Investment, Rational)>>> = vec![None; game.num_candidates()];
    for (name, entries) in file.mixed {
        let c = candidate_of(game, &name)?;
        let support = entries
            .into_iter()
            .map(|e| Ok((investment_from(game, c, raw(e.investment))?, e.probability.0)))
            .collect::<Result<Vec<_>>>()?;
        out[c] = Some(support);
    }
    let strategies = out
        .into_iter()
        .enumerate()
        .map(|(c, s)| s.ok_or_else(|| Error::InvalidProfile(format!("no mixture for {}", game.candidates()[c]))))
        .collect::<Result<Vec<_>>>()?;
    let mixed = MixedProfile(strategies);
    mixed.check(game)?;
    Ok(mixed)
}

pub fn rational_json(value: &Rational) -> Value {
    Value::String(format_rational(value))
}

pub fn rationals_json(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(rational_json).collect())
}

fn per_candidate(game: &AggregatedGame, values: impl IntoIterator<Item = Value>) -> Value {
    Value::Object(game.candidates().iter().cloned().zip(values).collect::<Map<_, _>>())
}

fn issue_names(game: &AggregatedGame, issues: &[usize]) -> Value {
    issues
        .iter()
        .map(|&i| Value::String(game.issues()[i].clone()))
        .collect()
}

/// Compact rank form; parses back to an identical game.
pub fn game_json(game: &AggregatedGame) -> Value {
    json!({
        "candidates": game.candidates(),
        "issues": game.user_issues(),
        "ranks": per_candidate(game, game.all_ranks().iter().map(|r| rationals_json(r))),
        "budgets": rationals_json(game.budgets()),
    })
}

pub fn profile_json(game: &AggregatedGame, profile: &Profile) -> Value {
    json!({
        "investments": per_candidate(game, profile.investments().iter().map(|inv| rationals_json(inv.amounts()))),
    })
}

pub fn kind_json(kind: &UtilityKind) -> Value {
    json!({
        "name": kind.name(),
        "victory_weight": kind.victory_weight().map(rational_json),
    })
}

pub fn certificate_json(game: &AggregatedGame, cert: &EquilibriumCertificate) -> Value {
    let checks: Vec<Value> = cert
        .checks
        .iter()
        .map(|ch| {
            json!({
                "candidate": game.candidates()[ch.candidate],
                "deviation_family": ch.family,
                "current": rational_json(&ch.current),
                "best_deviation_value": rational_json(&ch.best_value),
                "best_deviation": rationals_json(ch.best_deviation.amounts()),
                "improving": ch.improving,
                "support_indifferent": ch.support_indifferent,
            })
        })
        .collect();
    json!({
        "kind": kind_json(&cert.kind),
        "valid": cert.valid,
        "issues": game.issues(),
        "profile": profile_json(game, &cert.profile),
        "supports": per_candidate(game, cert.supports.iter().map(|s| issue_names(game, s))),
        "utilities": per_candidate(game, cert.utilities.iter().map(rational_json)),
        "checks": checks,
    })
}

pub fn best_response_json(game: &AggregatedGame, report: &BestResponseReport) -> Value {
    json!({
        "kind": kind_json(&report.kind),
        "responder": game.candidates()[report.responder],
        "attained": report.attained,
        "value": rational_json(&report.value),
        "issues": game.issues(),
        "witness": rationals_json(report.witness.amounts()),
        "optimal_issues": report.optimal_issues.as_ref().map(|s| issue_names(game, s)),
        "status": report.status,
    })
}

pub fn two_candidate_json(game: &AggregatedGame, run: &TwoCandidateRun) -> Value {
    let moves: Vec<Value> = run
        .moves
        .iter()
        .map(|m| {
            json!({
                "candidate": game.candidates()[m.candidate],
                "from": game.issues()[m.from],
                "to": game.issues()[m.to],
            })
        })
        .collect();
    json!({
        "certificate": certificate_json(game, &run.certificate),
        "start": per_candidate(game, run.start.iter().map(|&i| Value::String(game.issues()[i].clone()))),
        "moves": moves,
    })
}

fn steps_json(game: &AggregatedGame, steps: &[DynamicsStep]) -> Value {
    steps
        .iter()
        .map(|s| {
            json!({
                "round": s.round,
                "candidate": game.candidates()[s.candidate],
                "investment": rationals_json(s.investment.amounts()),
                "value": rational_json(&s.value),
            })
        })
        .collect()
}

pub fn dynamics_json(game: &AggregatedGame, outcome: &DynamicsOutcome) -> Value {
    match outcome {
        DynamicsOutcome::Converged { certificate, steps } => json!({
            "outcome": "equilibrium",
            "certificate": certificate_json(game, certificate),
            "steps": steps_json(game, steps),
        }),
        DynamicsOutcome::Unknown {
            reason,
            steps,
            cycle_start,
        } => json!({
            "outcome": "unknown",
            "reason": reason,
            "cycle_start": cycle_start,
            "steps": steps_json(game, steps),
        }),
    }
}

pub fn case_report_json(report: &CaseReport) -> Value {
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"check": c.description, "passed": c.passed, "detail": c.detail}))
        .collect();
    json!({"name": report.name, "passed": report.passed, "checks": checks})
}

/// Votes, shares, victory values and utilities per candidate.
pub fn payoff_table_json(
    game: &AggregatedGame,
    votes: &[Rational],
    shares: &[Rational],
    victory: &[Rational],
    utilities: &[Rational],
) -> Value {
    let rows = (0..game.num_candidates()).map(|c| {
        json!({
            "votes": rational_json(&votes[c]),
            "share": rational_json(&shares[c]),
            "victory": rational_json(&victory[c]),
            "utility": rational_json(&utilities[c]),
        })
    });
    per_candidate(game, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::g_plus;
    use crate::rational::{int, rat};

    const INSTANCE: &str = r#"{
        "candidates": ["c1", "c2"],
        "issues": ["economy", "health"],
        "rho": ["1", 2],
        "budgets": [1, 1],
        "voters": [
            {"quality": {"c2": ["0.3", "0.4"], "c1": ["1/2", "0.2"]}, "salience0": ["0.6", "2/5"]}
        ]
    }"#;

    #[test]
    fn instance_file_respects_candidate_order() {
        let GameInput::Instance(inst) = parse_game_input(INSTANCE).unwrap() else {
            panic!("expected instance form")
        };
        assert_eq!(inst.voters[0].quality[0], vec![rat(1, 2), rat(1, 5)]);
        let game = aggregate(&inst).unwrap();
        assert_eq!(game.ranks(0)[0], rat(19, 100));
    }

    #[test]
    fn compact_round_trip() {
        let game = g_plus();
        let text = serde_json::to_string(&game_json(&game)).unwrap();
        let back = parse_compact(&text).unwrap();
        assert_eq!(back, game);
        assert_eq!(serde_json::to_string(&game_json(&back)).unwrap(), text);
    }

    #[test]
    fn compact_without_names_uses_map_order() {
        let text = r#"{"ranks": {"zed": ["0", "1"], "amy": ["0", "2"]}, "budgets": [1, 0]}"#;
        let game = parse_compact(text).unwrap();
        assert_eq!(game.candidates(), &["zed".to_string(), "amy".to_string()]);
        assert_eq!(game.user_issues(), &["1".to_string()]);
    }

    #[test]
    fn profile_slack_is_inferred() {
        let game = aggregate(&parse_instance(INSTANCE).unwrap()).unwrap();
        let text = r#"{"investments": {"c1": ["1/2", "0"], "c2": ["0", "0", "1"]}}"#;
        let profile = parse_full_profile(&game, text).unwrap();
        assert_eq!(profile.investment(0).amounts(), &[rat(1, 2), rat(1, 2), int(0)]);
        let overspent = r#"{"investments": {"c1": ["1", "1"]}}"#;
        assert!(parse_profile(&game, overspent).is_err());
    }

    #[test]
    fn floats_are_refused() {
        let text = r#"{"ranks": {"a": [0, 0.5]}, "budgets": [1]}"#;
        let err = parse_compact(text).unwrap_err();
        assert!(err.to_string().contains("floating-point"));
    }

    #[test]
    fn mixed_profile_parses() {
        let game = g_plus();
        let text = r#"{"mixed": {
            "c1": [{"investment": ["1", "0"], "probability": "1/2"}, {"investment": ["0", "1"], "probability": "1/2"}],
            "c2": [{"investment": [], "probability": 1}],
            "c3": [{"investment": ["0", "0", "0"], "probability": 1}]
        }}"#;
        let err = parse_mixed_profile(&game, text).unwrap_err();
        assert!(matches!(err, Error::InvalidProfile(_)));
        let fixed = text.replace(r#""investment": [],"#, r#""investment": ["0", "0"],"#);
        let mixed = parse_mixed_profile(&game, &fixed).unwrap();
        assert_eq!(mixed.0[0].len(), 2);
    }
}
