//! Numerical toolkit for information-constrained fair division.
//!
//! * [`info`]: exact Shannon measures on finite tables.
//! * [`dc`]: Divide-and-Choose scenarios, auxiliary-variable strategies and
//!   the single-letter rate-gain region (selfish curves, gain polygons).
//! * [`repeated`]: the n-stage implicit-information Divide-and-Choose game,
//!   exact expected gains and trembling-hand equilibrium verification.
//! * [`aw`]: Adjusted Winner, Alice's spying gain Ψ / Ψ* / Δ*ₖ and the
//!   bounds around them, plus the finite-valuation reduction to
//!   Divide-and-Choose.
//! * [`nash`]: Nash collective utility over clustered societies and the
//!   clustering-refinement bound.

// `!(x >= 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aw;
pub mod bundled;
pub mod dc;
pub mod error;
pub mod format;
pub mod geometry;
pub mod info;
pub mod nash;
pub mod numeric;
pub mod repeated;

pub use error::{Error, Result};
