use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{Axis, JointPmf};

/// Axis names used for the valuation joint of every scenario.
pub const AXIS_A: &str = "vA";
pub const AXIS_B: &str = "vB";

const SUM_TOL: f64 = 1e-12;

/// Which piece Bob takes when both are worth the same to him.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// The piece Alice values more, leaving her the worse one.
    #[default]
    Adversarial,
    /// The piece Alice values less.
    Favorable,
}

fn check_simplex(path: &str, w: &[f64]) -> Result<()> {
    for (i, &x) in w.iter().enumerate() {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!("{path}[{i}]"), format!("{x} is outside [0, 1]")));
        }
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(path, format!("entries sum to {s}, expected 1")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cake {
    items: Vec<String>,
    composition: Vec<f64>,
}

impl Cake {
    pub fn new(items: Vec<String>, composition: Vec<f64>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::invalid("items", "a cake needs at least one item"));
        }
        if items.len() != composition.len() {
            return Err(Error::DimensionMismatch {
                context: "composition".into(),
                expected: items.len(),
                got: composition.len(),
            });
        }
        check_simplex("composition", &composition)?;
        Ok(Cake { items, composition })
    }

    /// Cake with `m` equal-share items named `item0`, `item1`, ...
    pub fn uniform(m: usize) -> Result<Self> {
        Cake::new((0..m).map(|i| format!("item{i}")).collect(), vec![1.0 / m as f64; m])
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn composition(&self) -> &[f64] {
        &self.composition
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A valuation vector: the value of each whole item, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation {
    pub label: String,
    weights: Vec<f64>,
}

impl Valuation {
    pub fn new(label: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        let label = label.into();
        check_simplex(&format!("valuation `{label}`"), &weights)?;
        Ok(Valuation { label, weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A cut of the cake into two pieces; `piece1[i]` is the fraction of item
/// `i` in the first piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    pub label: String,
    piece1: Vec<f64>,
}

impl Division {
    pub fn new(label: impl Into<String>, piece1: Vec<f64>) -> Result<Self> {
        let label = label.into();
        for (i, &x) in piece1.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                return Err(Error::invalid(
                    format!("division `{label}`.piece1[{i}]"),
                    format!("fraction {x} is outside [0, 1]"),
                ));
            }
        }
        Ok(Division { label, piece1 })
    }

    pub fn piece1(&self) -> &[f64] {
        &self.piece1
    }

    pub fn piece2(&self) -> Vec<f64> {
        self.piece1.iter().map(|x| 1.0 - x).collect()
    }
}

/// Value of a piece: `Σ αᵢ vᵢ`, so the whole cake is worth 1 to everyone.
pub fn piece_value(piece: &[f64], cake: &Cake, v: &Valuation) -> Result<f64> {
    if piece.len() != cake.len() {
        return Err(Error::DimensionMismatch {
            context: "piece".into(),
            expected: cake.len(),
            got: piece.len(),
        });
    }
    if v.weights.len() != cake.len() {
        return Err(Error::DimensionMismatch {
            context: format!("valuation `{}`", v.label),
            expected: cake.len(),
            got: v.weights.len(),
        });
    }
    if let Some(i) = piece.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::invalid(format!("piece[{i}]"), "fraction outside [0, 1]"));
    }
    Ok(piece.iter().zip(&v.weights).map(|(a, w)| a * w).sum())
}

/// Gains `(g_A, g_B)` when Alice cuts by `d` and Bob picks selfishly.
pub fn dc_gains(
    d: &Division,
    v_a: &Valuation,
    v_b: &Valuation,
    cake: &Cake,
    tie: TieBreak,
) -> Result<(f64, f64)> {
    let b1 = piece_value(&d.piece1, cake, v_b)?;
    let b2 = piece_value(&d.piece2(), cake, v_b)?;
    let a1 = piece_value(&d.piece1, cake, v_a)?;
    let a2 = piece_value(&d.piece2(), cake, v_a)?;
    let bob_takes_first = if (b1 - b2).abs() <= SUM_TOL {
        match tie {
            TieBreak::Adversarial => a1 >= a2,
            TieBreak::Favorable => a1 < a2,
        }
    } else {
        b1 > b2
    };
    Ok(if bob_takes_first { (a2, b1) } else { (a1, b2) })
}

/// A Divide-and-Choose instance with its gain table precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    alice: Vec<String>,
    bob: Vec<String>,
    divisions: Vec<String>,
    joint: JointPmf,
    /// `[d][a][b]` flattened.
    gains: Vec<(f64, f64)>,
    partitions_cake: bool,
}

fn joint_over(alice: &[String], bob: &[String], rows: &[Vec<f64>]) -> Result<JointPmf> {
    if rows.len() != alice.len() {
        return Err(Error::DimensionMismatch {
            context: "joint rows".into(),
            expected: alice.len(),
            got: rows.len(),
        });
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != bob.len() {
            return Err(Error::invalid(
                format!("joint[{i}]"),
                format!("expected {} columns, got {}", bob.len(), r.len()),
            ));
        }
    }
    let axes = vec![Axis::new(AXIS_A, alice.to_vec()), Axis::new(AXIS_B, bob.to_vec())];
    JointPmf::new(axes, rows.concat())
}

/// Builds a scenario from item valuations. Rows of `joint` are indexed by
/// Alice's valuation, columns by Bob's.
pub fn build_scenario(
    name: impl Into<String>,
    cake: &Cake,
    alice: &[Valuation],
    bob: &[Valuation],
    divisions: &[Division],
    joint: &[Vec<f64>],
    tie: TieBreak,
) -> Result<Scenario> {
    if divisions.is_empty() {
        return Err(Error::invalid("divisions", "no divisions"));
    }
    for d in divisions {
        if d.piece1.len() != cake.len() {
            return Err(Error::DimensionMismatch {
                context: format!("division `{}`", d.label),
                expected: cake.len(),
                got: d.piece1.len(),
            });
        }
    }
    let a_labels: Vec<String> = alice.iter().map(|v| v.label.clone()).collect();
    let b_labels: Vec<String> = bob.iter().map(|v| v.label.clone()).collect();
    let joint = joint_over(&a_labels, &b_labels, joint)?;
    let mut gains = Vec::with_capacity(divisions.len() * alice.len() * bob.len());
    for d in divisions {
        for va in alice {
            for vb in bob {
                gains.push(dc_gains(d, va, vb, cake, tie)?);
            }
        }
    }
    Ok(Scenario {
        name: name.into(),
        alice: a_labels,
        bob: b_labels,
        divisions: divisions.iter().map(|d| d.label.clone()).collect(),
        joint,
        gains,
        partitions_cake: true,
    })
}

impl Scenario {
    /// Scenario from an abstract gain table `gains[d][a][b] = (g_A, g_B)`.
    /// `partitions_cake` records whether every division splits one cake in
    /// two, which enables the `g_B ≥ ½` guarantees.
    pub fn from_gain_table(
        name: impl Into<String>,
        alice: Vec<String>,
        bob: Vec<String>,
        divisions: Vec<String>,
        joint: &[Vec<f64>],
        gains: &[Vec<Vec<(f64, f64)>>],
        partitions_cake: bool,
    ) -> Result<Scenario> {
        if divisions.is_empty() {
            return Err(Error::invalid("divisions", "no divisions"));
        }
        let jp = joint_over(&alice, &bob, joint)?;
        if gains.len() != divisions.len() {
            return Err(Error::DimensionMismatch {
                context: "gain_table".into(),
                expected: divisions.len(),
                got: gains.len(),
            });
        }
        let mut flat = Vec::with_capacity(divisions.len() * alice.len() * bob.len());
        for (d, rows) in gains.iter().enumerate() {
            if rows.len() != alice.len() {
                return Err(Error::invalid(
                    format!("gain_table[{d}]"),
                    format!("expected {} rows, got {}", alice.len(), rows.len()),
                ));
            }
            for (a, row) in rows.iter().enumerate() {
                if row.len() != bob.len() {
                    return Err(Error::invalid(
                        format!("gain_table[{d}][{a}]"),
                        format!("expected {} cells, got {}", bob.len(), row.len()),
                    ));
                }
                for (b, &(ga, gb)) in row.iter().enumerate() {
                    for g in [ga, gb] {
                        if !(0.0..=1.0).contains(&g) {
                            return Err(Error::invalid(
                                format!("gain_table[{d}][{a}][{b}]"),
                                format!("gain {g} is outside [0, 1]"),
                            ));
                        }
                    }
                    if partitions_cake && gb < 0.5 - SUM_TOL {
                        return Err(Error::invalid(
                            format!("gain_table[{d}][{a}][{b}]"),
                            "Bob's gain is below 1/2 although divisions partition the cake",
                        ));
                    }
                    flat.push((ga, gb));
                }
            }
        }
        Ok(Scenario {
            name: name.into(),
            alice,
            bob,
            divisions,
            joint: jp,
            gains: flat,
            partitions_cake,
        })
    }

    pub fn alice_labels(&self) -> &[String] {
        &self.alice
    }

    pub fn bob_labels(&self) -> &[String] {
        &self.bob
    }

    pub fn division_labels(&self) -> &[String] {
        &self.divisions
    }

    pub fn num_alice(&self) -> usize {
        self.alice.len()
    }

    pub fn num_bob(&self) -> usize {
        self.bob.len()
    }

    pub fn num_divisions(&self) -> usize {
        self.divisions.len()
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    /// `p(v_A = a, v_B = b)`.
    pub fn p(&self, a: usize, b: usize) -> f64 {
        self.joint.table()[a * self.bob.len() + b]
    }

    pub fn gain(&self, d: usize, a: usize, b: usize) -> (f64, f64) {
        self.gains[(d * self.alice.len() + a) * self.bob.len() + b]
    }

    pub fn partitions_cake(&self) -> bool {
        self.partitions_cake
    }

    /// H(V_B | V_A), the rate at which Alice learns Bob's valuation fully.
    pub fn full_information_rate(&self) -> f64 {
        crate::info::conditional_entropy(&self.joint, AXIS_B, AXIS_A).unwrap_or(0.0)
    }

    /// Expected gains when Alice always uses division `d`.
    pub fn fixed_division_gains(&self, d: usize) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for a in 0..self.alice.len() {
            for b in 0..self.bob.len() {
                let p = self.p(a, b);
                let (ga, gb) = self.gain(d, a, b);
                g.0 += p * ga;
                g.1 += p * gb;
            }
        }
        g
    }
}
