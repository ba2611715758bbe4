use serde::{Deserialize, Serialize};

use super::scenario::{build_scenario, Cake, Division, Scenario, TieBreak, Valuation};
use crate::error::{Error, Result};
use crate::format::Prob;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValuationEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Prob>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisionEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piece1: Option<Vec<Prob>>,
}

/// On-disk scenario document.
///
/// `joint` rows follow Alice's valuations, columns Bob's. Bob's set
/// defaults to Alice's. With `gain_table` (`[d][a][b] = [g_A, g_B]`) the
/// weights and pieces become optional metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub items: Vec<String>,
    #[serde(default)]
    pub composition: Vec<Prob>,
    pub valuations: Vec<ValuationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_valuations: Option<Vec<ValuationEntry>>,
    pub divisions: Vec<DivisionEntry>,
    pub joint: Vec<Vec<Prob>>,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_table: Option<Vec<Vec<Vec<[Prob; 2]>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions_cake: Option<bool>,
}

fn values(path: &str, v: &[Prob]) -> Result<Vec<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, p)| p.value().map_err(|e| Error::invalid(format!("{path}[{i}]"), e)))
        .collect()
}

fn rename(path: String, e: Error) -> Error {
    match e {
        Error::Invalid { reason, .. } => Error::Invalid { path, reason },
        Error::DimensionMismatch { expected, got, .. } => Error::invalid(
            path,
            format!("expected {expected} entries, got {got}"),
        ),
        other => other,
    }
}

fn valuations(path: &str, entries: &[ValuationEntry], m: usize) -> Result<Vec<Valuation>> {
    if entries.is_empty() {
        return Err(Error::invalid(path, "no valuations"));
    }
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let p = format!("{path}[{i}] ({})", e.label);
            let w = e
                .weights
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("{p}.weights"), "missing"))?;
            let w = values(&format!("{p}.weights"), w)?;
            if w.len() != m {
                return Err(Error::invalid(
                    format!("{p}.weights"),
                    format!("expected {m} entries, got {}", w.len()),
                ));
            }
            Valuation::new(e.label.clone(), w).map_err(|err| rename(format!("{p}.weights"), err))
        })
        .collect()
}

fn check_labels(path: &str, labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::invalid(format!("{path}[{i}]"), format!("duplicate label `{l}`")));
        }
    }
    Ok(())
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let joint: Vec<Vec<f64>> = self
            .joint
            .iter()
            .enumerate()
            .map(|(i, r)| values(&format!("joint[{i}]"), r))
            .collect::<Result<_>>()?;
        let alice_labels: Vec<String> = self.valuations.iter().map(|v| v.label.clone()).collect();
        let bob_entries = self.bob_valuations.as_ref().unwrap_or(&self.valuations);
        let bob_labels: Vec<String> = bob_entries.iter().map(|v| v.label.clone()).collect();
        let div_labels: Vec<String> = self.divisions.iter().map(|d| d.label.clone()).collect();
        check_labels("valuations", &alice_labels)?;
        check_labels("bob_valuations", &bob_labels)?;
        check_labels("divisions", &div_labels)?;
        let name = if self.name.is_empty() { "scenario".to_string() } else { self.name.clone() };

        if let Some(table) = &self.gain_table {
            let gains = table
                .iter()
                .enumerate()
                .map(|(d, rows)| {
                    rows.iter()
                        .enumerate()
                        .map(|(a, row)| {
                            row.iter()
                                .enumerate()
                                .map(|(b, [x, y])| {
                                    let path = format!("gain_table[{d}][{a}][{b}]");
                                    let gx = x.value().map_err(|e| Error::invalid(&path, e))?;
                                    let gy = y.value().map_err(|e| Error::invalid(&path, e))?;
                                    Ok((gx, gy))
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Scenario::from_gain_table(
                name,
                alice_labels,
                bob_labels,
                div_labels,
                &joint,
                &gains,
                self.partitions_cake.unwrap_or(false),
            );
        }

        let composition = values("composition", &self.composition)?;
        let cake = Cake::new(self.items.clone(), composition)
            .map_err(|e| rename("composition".into(), e))?;
        let m = cake.len();
        let alice = valuations("valuations", &self.valuations, m)?;
        let bob = match &self.bob_valuations {
            Some(b) => valuations("bob_valuations", b, m)?,
            None => alice.clone(),
        };
        let divisions = self
            .divisions
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let p = format!("divisions[{i}] ({}).piece1", d.label);
                let piece = d.piece1.as_ref().ok_or_else(|| Error::invalid(&p, "missing"))?;
                let piece = values(&p, piece)?;
                if piece.len() != m {
                    return Err(Error::invalid(
                        &p,
                        format!("expected {m} entries, got {}", piece.len()),
                    ));
                }
                if let Some(j) = piece.iter().position(|x| !(0.0..=1.0).contains(x)) {
                    return Err(Error::invalid(
                        format!("{p}[{j}]"),
                        format!("fraction {} is outside [0, 1]", piece[j]),
                    ));
                }
                Division::new(d.label.clone(), piece)
            })
            .collect::<Result<Vec<_>>>()?;
        build_scenario(name, &cake, &alice, &bob, &divisions, &joint, self.tie_break)
    }
}

/// Parses a scenario document from JSON text.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses and validates a scenario document.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    parse_scenario(text)?.into_scenario()
}
