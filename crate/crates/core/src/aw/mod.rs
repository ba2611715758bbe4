//! Adjusted Winner with two parties, and what Alice gains by lying about
//! her valuation after learning something about Bob's.
//!
//! With two items Alice's valuation is `(a, 1 - a)` and Bob's `(b, 1 - b)`.
//! `Ψ(ã; a, b)` is Alice's true gain when she announces `ã` against an
//! honest Bob; averaging `b` over a uniform interval and maximizing over
//! `ã` gives `Ψ*`, and `Δ*ₖ` is the best expected improvement from `k`
//! yes/no questions about `b`.

mod allocation;
mod psi;
mod questions;
mod reduction;

pub use allocation::{adjusted_winner, aw2, AWAllocation};
pub use psi::{psi, psi_interval, psi_interval_quadrature, psi_star, thresholds, AWInterval};
pub use questions::{
    delta_improvement, delta_star, f_s, f_s_monotone_check, geometric_partition,
    interval_concavity_check, optimal_plan, sequence_concavity_check, tilde_delta_bound,
    QuestionPlan, SequenceCheck, TildeDelta,
};
pub use reduction::aw_to_dc_scenario;
