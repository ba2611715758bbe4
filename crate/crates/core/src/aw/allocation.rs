use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// Per-item shares. `alice[i] + bob[i] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AWAllocation {
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
    /// Set when the valuations are identical and another allocation is
    /// equally valid.
    pub ambiguous: bool,
}

impl AWAllocation {
    pub fn alice_gain(&self, a: &[f64]) -> f64 {
        self.alice.iter().zip(a).map(|(d, v)| d * v).sum()
    }

    pub fn bob_gain(&self, b: &[f64]) -> f64 {
        self.bob.iter().zip(b).map(|(d, v)| d * v).sum()
    }
}

fn check_valuation(name: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid(format!("{name}[{i}]"), format!("{} is not a nonnegative weight", v[i])));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(name, format!("weights sum to {s}, expected 1")));
    }
    Ok(())
}

/// Adjusted Winner on announced valuations `a` (Alice) and `b` (Bob).
///
/// Items are ordered by `a_i / b_i`, Alice takes a prefix and Bob the rest,
/// and the single boundary item is split so both announced gains agree.
pub fn adjusted_winner(a: &[f64], b: &[f64]) -> Result<AWAllocation> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { context: "adjusted winner valuations".into(), expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty("no items".into()));
    }
    check_valuation("a", a)?;
    check_valuation("b", b)?;
    let m = a.len();
    // Items nobody values go last; they never move the balance.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        let zi = a[i] + b[i] == 0.0;
        let zj = a[j] + b[j] == 0.0;
        match (zi, zj) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            // a_i / b_i > a_j / b_j first
            _ => (a[j] * b[i]).partial_cmp(&(a[i] * b[j])).unwrap_or(Ordering::Equal),
        }
    });

    let mut alice = vec![0.0; m];
    let mut alice_sum = 0.0;
    let mut bob_rest: f64 = b.iter().sum();
    for &i in &order {
        let after_alice = alice_sum + a[i];
        let after_bob = bob_rest - b[i];
        if after_alice >= after_bob && a[i] + b[i] > 0.0 {
            // x·a_i + alice_sum = (1 - x)·b_i + after_bob
            let x = ((after_bob + b[i] - alice_sum) / (a[i] + b[i])).clamp(0.0, 1.0);
            alice[i] = x;
            break;
        }
        alice[i] = 1.0;
        alice_sum = after_alice;
        bob_rest = after_bob;
    }
    let bob = alice.iter().map(|x| 1.0 - x).collect();
    let ambiguous = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15);
    Ok(AWAllocation { alice, bob, ambiguous })
}

/// Alice's shares of the two items for announced `(a, 1 - a)` against
/// `(b, 1 - b)`, by the four-case closed form.
pub fn aw2(a: f64, b: f64) -> Result<(f64, f64)> {
    for (name, x) in [("a", a), ("b", b)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::invalid(name, format!("{x} is outside (0, 1)")));
        }
    }
    if a == b {
        return Err(Error::Ambiguous(format!("identical valuations a = b = {a}")));
    }
    Ok(aw2_unchecked(a, b))
}

/// The closed form without the singular-point check; at `a = b` it
/// returns one of the two valid allocations.
pub(crate) fn aw2_unchecked(a: f64, b: f64) -> (f64, f64) {
    if a <= b.min(1.0 - b) {
        (0.0, 1.0 / (2.0 - a - b))
    } else if a >= b.max(1.0 - b) {
        (1.0 / (a + b), 0.0)
    } else if b <= 0.5 {
        (1.0, (1.0 - a - b) / (2.0 - a - b))
    } else {
        (1.0 - 1.0 / (a + b), 1.0)
    }
}
