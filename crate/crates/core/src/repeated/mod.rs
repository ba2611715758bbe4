//! The n-stage Divide-and-Choose game with valuations drawn once and
//! information revealed only through play.
//!
//! Alice either plays non-risky (both get ½) or risky, after which Bob
//! picks the left piece (gains `g_A`, `g_B`) or the right one (gains
//! `1 - g_A`, `1 - g_B`).

mod spec;
mod strategy;
mod tree;
mod verify;

pub use spec::{risk_condition, GamePair, RepeatedGameSpec};
pub use strategy::{
    builtin_alice_strategy, builtin_bob_strategy, perturb, Action, BehavioralStrategy,
    InformationSet, Player, Rule, StageOutcome,
};
pub use tree::{
    expected_total_gains, expected_total_gains_collapsed, expected_total_gains_full,
    COLLAPSED_CAP, FULL_TREE_CAP,
};
pub use verify::{
    alice_posterior_ratio_exact, deviation_value, deviation_value_given_t, equilibrium_verify,
    posterior_ratio, walk_gain_identity_check, walk_identity_holds, EpsilonReport, VerifyReport,
    VERIFY_TOL,
};
