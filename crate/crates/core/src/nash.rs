//! Nash collective utility for a government that only knows which cluster
//! each citizen belongs to, and how much splitting a cluster can help.
//!
//! Cluster `i` has `n_i` members; every member of it receives the same
//! bundle `b_i`, subject to `Σ n_i b_i = 1`. The log-welfare is
//! `(1/n) log₂ Π_i Π_j b_i·v_ij`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{mutual_information, Axis, JointPmf};

const SUM_TOL: f64 = 1e-9;
const FEASIBLE_TOL: f64 = 1e-10;
/// Largest acceptable value of the optimality certificate.
pub const CERTIFICATE_TOL: f64 = 1e-6;
const MAX_ITER: usize = 100_000;
/// Certificate slack accepted when the objective has stopped moving.
const STALL_CERTIFICATE: f64 = 1e-7;

/// Citizens' valuations over `items` goods and a partition into clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Society {
    pub items: usize,
    pub members: Vec<Vec<f64>>,
    pub clusters: Vec<Vec<usize>>,
}

impl Society {
    pub fn new(items: usize, members: Vec<Vec<f64>>, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let s = Society { items, members, clusters };
        s.validate()?;
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Society = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.items == 0 {
            return Err(Error::invalid("items", "at least one item is required"));
        }
        if self.members.is_empty() {
            return Err(Error::invalid("members", "empty society"));
        }
        for (j, v) in self.members.iter().enumerate() {
            if v.len() != self.items {
                return Err(Error::invalid(
                    format!("members[{j}]"),
                    format!("expected {} entries, got {}", self.items, v.len()),
                ));
            }
            if let Some(l) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::invalid(format!("members[{j}][{l}]"), "negative valuation"));
            }
            let s: f64 = v.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::invalid(format!("members[{j}]"), format!("valuation sums to {s}, expected 1")));
            }
        }
        let mut seen = vec![false; self.members.len()];
        for (i, c) in self.clusters.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::invalid(format!("clusters[{i}]"), "empty cluster"));
            }
            for &j in c {
                if j >= self.members.len() {
                    return Err(Error::invalid(format!("clusters[{i}]"), format!("member {j} does not exist")));
                }
                if seen[j] {
                    return Err(Error::invalid(format!("clusters[{i}]"), format!("member {j} appears twice")));
                }
                seen[j] = true;
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::invalid("clusters", format!("member {j} is in no cluster")));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// The society with cluster `ci` replaced by `parts`, which must
    /// partition it. The new clusters are appended at the end.
    pub fn refine(&self, ci: usize, parts: &[Vec<usize>]) -> Result<Society> {
        let cluster = self
            .clusters
            .get(ci)
            .ok_or_else(|| Error::invalid("cluster_index", format!("no cluster {ci}")))?;
        let mut flat: Vec<usize> = parts.iter().flatten().copied().collect();
        flat.sort_unstable();
        let mut own = cluster.clone();
        own.sort_unstable();
        if flat != own || parts.iter().any(Vec::is_empty) {
            return Err(Error::invalid("refinement", format!("does not partition cluster {ci}")));
        }
        let mut clusters: Vec<Vec<usize>> =
            self.clusters.iter().enumerate().filter(|(i, _)| *i != ci).map(|(_, c)| c.clone()).collect();
        clusters.extend(parts.iter().cloned());
        Society::new(self.items, self.members.clone(), clusters)
    }
}

/// Per-cluster bundles `b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisionPolicy {
    pub bundles: Vec<Vec<f64>>,
}

impl DivisionPolicy {
    pub fn validate(&self, s: &Society) -> Result<()> {
        if self.bundles.len() != s.clusters.len() {
            return Err(Error::DimensionMismatch {
                context: "policy bundles".into(),
                expected: s.clusters.len(),
                got: self.bundles.len(),
            });
        }
        for (i, b) in self.bundles.iter().enumerate() {
            if b.len() != s.items {
                return Err(Error::invalid(format!("bundles[{i}]"), format!("expected {} entries", s.items)));
            }
            if let Some(l) = b.iter().position(|x| !(*x >= 0.0)) {
                return Err(Error::invalid(format!("bundles[{i}][{l}]"), "negative share"));
            }
        }
        for l in 0..s.items {
            let total: f64 = s.clusters.iter().zip(&self.bundles).map(|(c, b)| c.len() as f64 * b[l]).sum();
            if (total - 1.0).abs() > FEASIBLE_TOL {
                return Err(Error::invalid(format!("item {l}"), format!("allocated {total}, expected 1")));
            }
        }
        Ok(())
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `(1/n) log₂ W` for the given policy; `-∞` if some member gets nothing.
pub fn log_welfare(s: &Society, policy: &DivisionPolicy) -> Result<f64> {
    policy.validate(s)?;
    Ok(log_welfare_unchecked(s, &policy.bundles))
}

fn log_welfare_unchecked(s: &Society, bundles: &[Vec<f64>]) -> f64 {
    let n = s.size() as f64;
    let mut total = 0.0;
    for (c, b) in s.clusters.iter().zip(bundles) {
        for &j in c {
            let g = dot(b, &s.members[j]);
            if g <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += g.log2();
        }
    }
    total / n
}

/// `g[i][l] = Σ_j v_ijl / (n_i·b_i·v_ij)`: the marginal value of item `l`
/// to cluster `i` per unit of the item.
fn gradient(s: &Society, bundles: &[Vec<f64>]) -> Vec<Vec<f64>> {
    s.clusters
        .iter()
        .zip(bundles)
        .map(|(c, b)| {
            let ni = c.len() as f64;
            let mut g = vec![0.0; s.items];
            for &j in c {
                let v = &s.members[j];
                let u = dot(b, v);
                if u > 0.0 {
                    for (gl, vl) in g.iter_mut().zip(v) {
                        *gl += vl / (ni * u);
                    }
                }
            }
            g
        })
        .collect()
}

/// `A(b̃) = Σ_i α_i E_j[b̃_i·v_ij / b_i·v_ij]` for a probe policy `b̃`.
pub fn certificate_value(s: &Society, policy: &DivisionPolicy, probe: &DivisionPolicy) -> f64 {
    let n = s.size() as f64;
    s.clusters
        .iter()
        .zip(policy.bundles.iter().zip(&probe.bundles))
        .map(|(c, (b, bt))| c.iter().map(|&j| dot(bt, &s.members[j]) / dot(b, &s.members[j])).sum::<f64>())
        .sum::<f64>()
        / n
}

/// Largest `A(b̃)` over feasible probes. `A` is linear, so the maximum sits
/// at a vertex of the feasible set, where each item goes wholly to one
/// cluster. A policy is optimal iff this is at most 1.
pub fn certificate(s: &Society, policy: &DivisionPolicy) -> f64 {
    let g = gradient(s, &policy.bundles);
    let n = s.size() as f64;
    (0..s.items).map(|l| g.iter().map(|gi| gi[l]).fold(0.0, f64::max)).sum::<f64>() / n
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    pub policy: DivisionPolicy,
    /// `(1/n) log₂ W`.
    pub log_welfare: f64,
    pub certificate: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Optimum {
    /// `log₂ W`.
    pub fn log2_w(&self, s: &Society) -> f64 {
        self.log_welfare * s.size() as f64
    }
}

/// Maximizes the log-welfare by multiplicative reweighting of each item's
/// split across clusters, starting from the equal split. Stops once the
/// certificate is within `1e-9` of 1, or once an iteration improves the
/// objective by less than `1e-12` with the certificate within `1e-7`.
pub fn optimize_policy(s: &Society) -> Result<Optimum> {
    s.validate()?;
    let n = s.size() as f64;
    let sizes: Vec<f64> = s.clusters.iter().map(|c| c.len() as f64).collect();
    // x[i][l] = n_i b_il: cluster i's fraction of item l.
    let mut x: Vec<Vec<f64>> = sizes.iter().map(|ni| vec![ni / n; s.items]).collect();
    let to_bundles =
        |x: &[Vec<f64>]| -> Vec<Vec<f64>> { x.iter().zip(&sizes).map(|(xi, ni)| xi.iter().map(|v| v / ni).collect()).collect() };

    let mut bundles = to_bundles(&x);
    let mut value = log_welfare_unchecked(s, &bundles);
    let mut cert = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let g = gradient(s, &bundles);
        cert = (0..s.items).map(|l| g.iter().map(|gi| gi[l]).fold(0.0, f64::max)).sum::<f64>() / n;
        if cert <= 1.0 + 1e-9 {
            converged = true;
            break;
        }
        for l in 0..s.items {
            let z: f64 = (0..x.len()).map(|i| x[i][l] * g[i][l]).sum();
            if z > 0.0 {
                for i in 0..x.len() {
                    x[i][l] *= g[i][l] / z;
                }
            }
        }
        iterations += 1;
        bundles = to_bundles(&x);
        let next = log_welfare_unchecked(s, &bundles);
        let gain = next - value;
        value = next;
        if gain.abs() < 1e-12 && cert <= 1.0 + STALL_CERTIFICATE {
            cert = certificate(s, &DivisionPolicy { bundles: bundles.clone() });
            converged = cert <= 1.0 + CERTIFICATE_TOL;
            break;
        }
    }
    if !converged && iterations == MAX_ITER {
        cert = certificate(s, &DivisionPolicy { bundles: bundles.clone() });
    }
    Ok(Optimum { policy: DivisionPolicy { bundles }, log_welfare: value, certificate: cert, iterations, converged })
}

fn valuation_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e12).round() as i64).collect()
}

/// `I(V₁; E)` in bits, for `V₁` the valuation of a uniformly drawn member
/// of cluster `ci` and `E` the part of `refinement` containing them.
pub fn refinement_mi(s: &Society, ci: usize, refinement: &[Vec<usize>]) -> Result<f64> {
    s.refine(ci, refinement)?;
    let members: Vec<usize> = refinement.iter().flatten().copied().collect();
    let mut support: Vec<Vec<i64>> = Vec::new();
    for &j in &members {
        let k = valuation_key(&s.members[j]);
        if !support.contains(&k) {
            support.push(k);
        }
    }
    let total = members.len() as f64;
    let mut table = vec![0.0; support.len() * refinement.len()];
    for (e, part) in refinement.iter().enumerate() {
        for &j in part {
            let v = support.iter().position(|k| *k == valuation_key(&s.members[j])).expect("in support");
            table[v * refinement.len() + e] += 1.0 / total;
        }
    }
    let joint = JointPmf::new(
        vec![Axis::indexed("V", support.len()), Axis::indexed("E", refinement.len())],
        table,
    )?;
    mutual_information(&joint, "V", "E")
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub log2_w: f64,
    pub log2_w_refined: f64,
    pub mutual_information: f64,
    /// `n₁·I(V₁; E)`.
    pub n1_mi: f64,
    pub certificate: f64,
    pub certificate_refined: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub pass: bool,
}

/// Checks `0 <= log₂W' - log₂W <= n₁·I(V₁; E)` within `1e-6`, with both
/// optima certified.
pub fn refinement_bound_check(s: &Society, ci: usize, refinement: &[Vec<usize>]) -> Result<RefinementReport> {
    let refined = s.refine(ci, refinement)?;
    let mi = refinement_mi(s, ci, refinement)?;
    let n1 = s.clusters[ci].len() as f64;
    let base = optimize_policy(s)?;
    let fine = optimize_policy(&refined)?;
    let (w, w2) = (base.log2_w(s), fine.log2_w(&refined));
    let lower_holds = w2 - w >= -1e-6;
    let upper_holds = w2 - w <= n1 * mi + 1e-6;
    let certified = base.certificate <= 1.0 + CERTIFICATE_TOL && fine.certificate <= 1.0 + CERTIFICATE_TOL;
    Ok(RefinementReport {
        log2_w: w,
        log2_w_refined: w2,
        mutual_information: mi,
        n1_mi: n1 * mi,
        certificate: base.certificate,
        certificate_refined: fine.certificate,
        lower_holds,
        upper_holds,
        pass: lower_holds && upper_holds && certified,
    })
}
