//! Exact-arithmetic solvers for priming games: aggregation of voter data,
//! utilities, best responses, equilibria and a grid oracle.

pub mod counterexamples;
pub mod engine;
pub mod equilibrium;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod response;

pub use engine::{MixedProfile, PayoffVector, UtilityKind};
pub use equilibrium::{
    best_response_dynamics, nash_frac_general, nash_two_candidates, verify_equilibrium, DynamicsOutcome,
    EquilibriumCertificate, TwoCandidateRun,
};
pub use error::{Error, Result};
pub use model::{aggregate, validate_instance, AggregatedGame, ElectionInstance, Investment, Profile, VoterRecord};
pub use rational::Rational;
pub use response::{best_response, BestResponseReport};
