use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Prob;

const MASS_TOL: f64 = 1e-12;

/// One support point of `p(g_A, g_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GamePair {
    pub g_a: f64,
    pub g_b: f64,
    pub p: f64,
}

impl GamePair {
    /// `T = 1` unless exactly one of the players prefers the left piece.
    pub fn t(&self) -> bool {
        (self.g_a - 0.5) * (self.g_b - 0.5) >= 0.0
    }
}

/// Joint distribution of the stage gains and the number of stages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatedGameSpec {
    pairs: Vec<GamePair>,
    pub n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    #[serde(rename = "gA")]
    g_a: Prob,
    #[serde(rename = "gB")]
    g_b: Prob,
    p: Prob,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    pairs: Vec<PairEntry>,
    #[serde(default)]
    n: Option<usize>,
}

impl RepeatedGameSpec {
    pub fn new(pairs: Vec<GamePair>, n: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("pairs", "empty support"));
        }
        for (i, q) in pairs.iter().enumerate() {
            for (name, g) in [("gA", q.g_a), ("gB", q.g_b)] {
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::invalid(format!("pairs[{i}].{name}"), format!("{g} is outside [0, 1]")));
                }
                if g == 0.5 {
                    return Err(Error::invalid(format!("pairs[{i}].{name}"), "gain must differ from 1/2"));
                }
            }
            if !(q.p >= 0.0) {
                return Err(Error::invalid(format!("pairs[{i}].p"), "negative probability"));
            }
        }
        let total: f64 = pairs.iter().map(|q| q.p).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid("pairs", format!("probabilities sum to {total}, expected 1")));
        }
        if n == 0 {
            return Err(Error::invalid("n", "at least one stage is required"));
        }
        Ok(RepeatedGameSpec { pairs, n })
    }

    /// Parses `{pairs: [{gA, gB, p}], n}`; `n` defaults to 1.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: GameFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let pairs = f
            .pairs
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let v = |name: &str, x: &Prob| {
                    x.value().map_err(|r| Error::invalid(format!("pairs[{i}].{name}"), r))
                };
                Ok(GamePair { g_a: v("gA", &e.g_a)?, g_b: v("gB", &e.g_b)?, p: v("p", &e.p)? })
            })
            .collect::<Result<Vec<_>>>()?;
        RepeatedGameSpec::new(pairs, f.n.unwrap_or(1))
    }

    pub fn pairs(&self) -> &[GamePair] {
        &self.pairs
    }

    pub fn with_stages(&self, n: usize) -> Result<Self> {
        RepeatedGameSpec::new(self.pairs.clone(), n)
    }

    /// Distinct values of `g_A` in order of first appearance.
    pub fn alice_types(&self) -> Vec<f64> {
        distinct(self.pairs.iter().map(|q| q.g_a))
    }

    pub fn bob_types(&self) -> Vec<f64> {
        distinct(self.pairs.iter().map(|q| q.g_b))
    }

    /// `(p(T=0 | g_A), p(T=1 | g_A))`, or `None` if `g_A` has zero mass.
    pub fn t_posterior(&self, g_a: f64) -> Option<(f64, f64)> {
        let (mut p0, mut p1) = (0.0, 0.0);
        for q in self.pairs.iter().filter(|q| q.g_a == g_a) {
            if q.t() {
                p1 += q.p;
            } else {
                p0 += q.p;
            }
        }
        let z = p0 + p1;
        (z > 0.0).then(|| (p0 / z, p1 / z))
    }
}

fn distinct(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::new();
    for x in it {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

/// Whether risking beats the safe half in the one-stage game for every
/// `g_A`, with both values of `T` possible.
pub fn risk_condition(spec: &RepeatedGameSpec) -> bool {
    spec.alice_types().into_iter().all(|g| match spec.t_posterior(g) {
        Some((p0, p1)) => {
            let (lo, hi) = (g.min(1.0 - g), g.max(1.0 - g));
            p0 > 0.0 && p1 > 0.0 && p0 * lo + p1 * hi > 0.5
        }
        None => true,
    })
}
