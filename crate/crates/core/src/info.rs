//! Shannon information measures over finite probability tables.
//!
//! All quantities are in bits. Probabilities below [`ZERO_PROB`] are treated
//! as exact zeros inside logarithms.

use crate::error::{Error, Result};

/// Probabilities at or below this value contribute nothing to entropy sums.
pub const ZERO_PROB: f64 = 1e-15;

/// Tolerance on the total mass of a pmf or joint table.
pub const MASS_TOL: f64 = 1e-12;
/// Entropy sums below this are rounding residue and read as zero.
const CANCEL_TOL: f64 = 1e-14;

pub(crate) fn plogp(p: f64) -> f64 {
    if p <= ZERO_PROB {
        0.0
    } else {
        -p * p.log2()
    }
}

fn check_mass(path: &str, probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::invalid(path, "no probabilities"));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::invalid(
                format!("{path}[{i}]"),
                format!("probability {p} is negative or not finite"),
            ));
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::invalid(
            path,
            format!("probabilities sum to {total}, expected 1"),
        ));
    }
    Ok(())
}

/// A labelled probability mass function on a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    support: Vec<String>,
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(support: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                context: "pmf support".into(),
                expected: support.len(),
                got: probs.len(),
            });
        }
        check_mass("pmf", &probs)?;
        Ok(Pmf { support, probs })
    }

    /// Pmf with labels `"0"`, `"1"`, ...
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let support = (0..probs.len()).map(|i| i.to_string()).collect();
        Pmf::new(support, probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Pmf::from_probs(vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// H(p) = -Σ p log₂ p.
pub fn entropy(p: &Pmf) -> f64 {
    p.probs.iter().map(|&x| plogp(x)).sum()
}

/// One named dimension of a [`JointPmf`].
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub labels: Vec<String>,
}

impl Axis {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Self {
        Axis {
            name: name.into(),
            labels,
        }
    }

    /// Axis with labels `"0"`, `"1"`, ...
    pub fn indexed(name: impl Into<String>, len: usize) -> Self {
        Axis::new(name, (0..len).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Joint pmf over two or three named finite axes, stored row-major (the
/// last axis varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    axes: Vec<Axis>,
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: Vec<Axis>, table: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&axes.len()) {
            return Err(Error::invalid(
                "joint.axes",
                format!("expected 2 or 3 axes, got {}", axes.len()),
            ));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::invalid(format!("joint.axes[{i}]"), "empty label set"));
            }
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::invalid(
                    format!("joint.axes[{i}]"),
                    format!("duplicate axis name `{}`", a.name),
                ));
            }
        }
        let cells: usize = axes.iter().map(Axis::len).product();
        if cells != table.len() {
            return Err(Error::DimensionMismatch {
                context: "joint table".into(),
                expected: cells,
                got: table.len(),
            });
        }
        check_mass("joint", &table)?;
        Ok(JointPmf { axes, table })
    }

    /// Builds the table by evaluating `f` at every index tuple.
    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let dims: Vec<usize> = axes.iter().map(Axis::len).collect();
        let cells: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut table = Vec::with_capacity(cells);
        for flat in 0..cells {
            unflatten(flat, &dims, &mut idx);
            table.push(f(&idx));
        }
        JointPmf::new(axes, table)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    /// Probability of one cell, addressed by per-axis indices.
    pub fn prob(&self, idx: &[usize]) -> f64 {
        let dims: Vec<usize> = self.axes.iter().map(Axis::len).collect();
        self.table[flatten(idx, &dims)]
    }

    /// Marginal table over the named axes, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<Vec<f64>> {
        let keep: Vec<usize> = names
            .iter()
            .map(|n| self.axis_index(n))
            .collect::<Result<_>>()?;
        Ok(self.marginal_by_index(&keep))
    }

    fn marginal_by_index(&self, keep: &[usize]) -> Vec<f64> {
        let dims: Vec<usize> = self.axes.iter().map(Axis::len).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let mut out = vec![0.0; kept_dims.iter().product()];
        let mut idx = vec![0usize; dims.len()];
        let mut sub = vec![0usize; keep.len()];
        for (flat, &p) in self.table.iter().enumerate() {
            unflatten(flat, &dims, &mut idx);
            for (s, &k) in sub.iter_mut().zip(keep) {
                *s = idx[k];
            }
            out[flatten(&sub, &kept_dims)] += p;
        }
        out
    }

    /// Joint entropy of a subset of axes. The empty set has entropy 0.
    pub fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        let mut keep: Vec<usize> = names
            .iter()
            .map(|n| self.axis_index(n))
            .collect::<Result<_>>()?;
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginal_by_index(&keep).iter().map(|&p| plogp(p)).sum())
    }
}

fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut v: Vec<&str> = a.to_vec();
    for n in b {
        if !v.contains(n) {
            v.push(n);
        }
    }
    v
}

/// H(target | given) = H(target, given) - H(given).
pub fn conditional_entropy(j: &JointPmf, target: &str, given: &str) -> Result<f64> {
    conditional_entropy_sets(j, &[target], &[given])
}

pub fn conditional_entropy_sets(j: &JointPmf, target: &[&str], given: &[&str]) -> Result<f64> {
    let h = j.entropy_of(&union(target, given))? - j.entropy_of(given)?;
    Ok(h.max(0.0))
}

/// I(a; b), symmetric and nonnegative.
pub fn mutual_information(j: &JointPmf, a: &str, b: &str) -> Result<f64> {
    conditional_mutual_information_sets(j, &[a], &[b], &[])
}

/// I(a; b | given).
pub fn conditional_mutual_information(
    j: &JointPmf,
    a: &str,
    b: &str,
    given: &str,
) -> Result<f64> {
    conditional_mutual_information_sets(j, &[a], &[b], &[given])
}

/// I(A; B | C) for sets of axes:
/// H(A,C) + H(B,C) - H(A,B,C) - H(C).
pub fn conditional_mutual_information_sets(
    j: &JointPmf,
    a: &[&str],
    b: &[&str],
    given: &[&str],
) -> Result<f64> {
    let ac = union(a, given);
    let bc = union(b, given);
    let abc = union(&ac, b);
    let i = j.entropy_of(&ac)? + j.entropy_of(&bc)? - j.entropy_of(&abc)? - j.entropy_of(given)?;
    Ok(if i < CANCEL_TOL { 0.0 } else { i })
}
