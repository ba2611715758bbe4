use super::allocation::aw2;
use crate::dc::Scenario;
use crate::error::{Error, Result};

/// Divide-and-Choose scenario whose divisions are Alice's possible
/// announcements `ã`: announcing `ã` against Bob's honest `b` yields
/// `g_A = AW_A(ã, b)·(a, 1-a)` and `g_B = AW_B(ã, b)·(b, 1-b)`.
///
/// `joint[i][j]` is the probability of Alice's `alice[i]` and Bob's `bob[j]`.
pub fn aw_to_dc_scenario(
    alice: &[f64],
    bob: &[f64],
    joint: &[Vec<f64>],
    announcements: &[f64],
) -> Result<Scenario> {
    if announcements.is_empty() {
        return Err(Error::Empty("announcements".into()));
    }
    let gains = announcements
        .iter()
        .enumerate()
        .map(|(d, &t)| {
            alice
                .iter()
                .map(|&a| {
                    bob.iter()
                        .map(|&b| {
                            let (x1, x2) = aw2(t, b).map_err(|e| match e {
                                Error::Ambiguous(r) => Error::Ambiguous(format!("announcements[{d}]: {r}")),
                                other => other,
                            })?;
                            Ok((x1 * a + x2 * (1.0 - a), (1.0 - x1) * b + (1.0 - x2) * (1.0 - b)))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let label = |p: &str, x: &f64| format!("{p}{x}");
    Scenario::from_gain_table(
        "adjusted-winner",
        alice.iter().map(|x| label("a=", x)).collect(),
        bob.iter().map(|x| label("b=", x)).collect(),
        announcements.iter().map(|x| label("announce ", x)).collect(),
        joint,
        &gains,
        false,
    )
}
