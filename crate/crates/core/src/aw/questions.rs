use rayon::prelude::*;
use serde::Serialize;

use super::psi::{psi_star, thresholds, AWInterval};
use crate::error::{Error, Result};
use crate::numeric::{golden_section_max, linspace};

const WIDTH_EPS: f64 = 1e-14;
const DIFF_STEP: f64 = 1e-5;
const BOUND_GRID: usize = 64;

/// Dividing points `b_0 <= ... <= b_{2^k}` for `k` binary questions about
/// Bob's valuation, with Alice's best announcement on each piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionPlan {
    pub k: usize,
    pub points: Vec<f64>,
    pub announcements: Vec<f64>,
}

impl QuestionPlan {
    pub fn new(a: f64, k: usize, points: Vec<f64>) -> Result<Self> {
        let expected = (1usize << k) + 1;
        if points.len() != expected {
            return Err(Error::DimensionMismatch { context: "dividing points".into(), expected, got: points.len() });
        }
        if let Some(i) = points.windows(2).position(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid(format!("points[{}]", i + 1), "dividing points must be nondecreasing"));
        }
        if !(points[0] > 0.0 && points[points.len() - 1] <= 1.0) {
            return Err(Error::invalid("points", "dividing points must lie in (0, 1]"));
        }
        let announcements = points
            .windows(2)
            .map(|w| match sub(w[0], w[1]) {
                Some(iv) => psi_star(a, &iv).0,
                None => w[0],
            })
            .collect();
        Ok(QuestionPlan { k, points, announcements })
    }

    pub fn interval(&self) -> AWInterval {
        AWInterval { b_min: self.points[0], b_max: self.points[self.points.len() - 1] }
    }
}

fn sub(x: f64, y: f64) -> Option<AWInterval> {
    (y - x > WIDTH_EPS).then_some(AWInterval { b_min: x, b_max: y })
}

/// `(y - x)·Ψ*(a, [x, y])`, zero on empty pieces.
fn weighted_star(a: f64, x: f64, y: f64) -> f64 {
    sub(x, y).map_or(0.0, |iv| iv.width() * psi_star(a, &iv).1)
}

/// Log-uniform dividing points.
pub fn geometric_partition(iv: &AWInterval, k: usize) -> Vec<f64> {
    let n = 1usize << k;
    let (l0, l1) = (iv.b_min.ln(), iv.b_max.ln());
    let mut pts: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            ((1.0 - t) * l0 + t * l1).exp()
        })
        .collect();
    pts[0] = iv.b_min;
    pts[n] = iv.b_max;
    for i in 1..n {
        pts[i] = pts[i].clamp(pts[i - 1], iv.b_max);
    }
    pts
}

/// Expected gain with the plan's answers minus the gain without them.
pub fn delta_improvement(a: f64, plan: &QuestionPlan) -> f64 {
    let iv = plan.interval();
    let spread: f64 = plan.points.windows(2).map(|w| weighted_star(a, w[0], w[1])).sum();
    spread / iv.width() - psi_star(a, &iv).1
}

/// The plan attaining `Δ*ₖ`. Geometric points are optimal when `½ <= b_min`
/// and `a` lies outside `(τ_l, τ_u)`; otherwise a grid search (`k <= 2`)
/// seeds coordinate ascent over the dividing points.
pub fn optimal_plan(a: f64, iv: &AWInterval, k: usize) -> QuestionPlan {
    let geometric = geometric_partition(iv, k);
    let (tau_l, tau_u) = thresholds(iv);
    if k == 0 || (iv.is_special() && (a <= tau_l || a >= tau_u)) {
        return QuestionPlan::new(a, k, geometric).expect("geometric points form a plan");
    }
    let score = |p: &[f64]| p.windows(2).map(|w| weighted_star(a, w[0], w[1])).sum::<f64>();
    let mut points = geometric;
    let mut best = score(&points);
    if k <= 2 {
        let (grid_pts, grid_val) = grid_search(a, iv, k, 40);
        if grid_val > best {
            points = grid_pts;
            best = grid_val;
        }
    }
    for _ in 0..100 {
        let before = best;
        for i in 1..points.len() - 1 {
            let (lo, hi) = (points[i - 1], points[i + 1]);
            let local = |x: f64| weighted_star(a, lo, x) + weighted_star(a, x, hi);
            let current = local(points[i]);
            let (x, fx) = golden_section_max(local, lo, hi, 1e-10);
            if fx > current {
                points[i] = x;
                best += fx - current;
            }
        }
        if best - before < 1e-12 {
            break;
        }
    }
    QuestionPlan::new(a, k, points).expect("ascent keeps points ordered")
}

/// Exhaustive search over `n + 1` evenly spaced candidates per dividing
/// point, for one or two questions.
fn grid_search(a: f64, iv: &AWInterval, k: usize, n: usize) -> (Vec<f64>, f64) {
    let g = linspace(iv.b_min, iv.b_max, n);
    let table: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|i| (0..=n).map(|j| if j > i { weighted_star(a, g[i], g[j]) } else { 0.0 }).collect())
        .collect();
    let mut best = (vec![], f64::NEG_INFINITY);
    match k {
        1 => {
            for m in 0..=n {
                let v = table[0][m] + table[m][n];
                if v > best.1 {
                    best = (vec![g[0], g[m], g[n]], v);
                }
            }
        }
        _ => {
            for m in 0..=n {
                for l in 0..=m {
                    for r in m..=n {
                        let v = table[0][l] + table[l][m] + table[m][r] + table[r][n];
                        if v > best.1 {
                            best = (vec![g[0], g[l], g[m], g[r], g[n]], v);
                        }
                    }
                }
            }
        }
    }
    best
}

/// `Δ*ₖ`, with `Δ*₀ = 0`.
pub fn delta_star(a: f64, iv: &AWInterval, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    delta_improvement(a, &optimal_plan(a, iv, k))
}

/// `Δ̃`: the steepest growth of `Γ(x, y) = (y - x)·Δ*₁(x, y)` in `y` over
/// nested subintervals. `k·Δ̃` bounds `Δ*ₖ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TildeDelta {
    pub value: f64,
    /// Subinterval where the maximum derivative occurs.
    pub at: (f64, f64),
}

impl TildeDelta {
    /// Bound on the improvement from `k` questions, or from an average rate
    /// of `k` questions per game.
    pub fn budget_bound(&self, k: f64) -> f64 {
        k * self.value
    }
}

fn gamma(a: f64, x: f64, y: f64) -> f64 {
    match sub(x, y) {
        Some(iv) => iv.width() * delta_star(a, &iv, 1),
        None => 0.0,
    }
}

pub fn tilde_delta_bound(a: f64, iv: &AWInterval) -> TildeDelta {
    let g = linspace(iv.b_min, iv.b_max, BOUND_GRID - 1);
    let h = DIFF_STEP;
    let (value, at) = (0..g.len())
        .into_par_iter()
        .flat_map_iter(|i| (i..g.len()).map(move |j| (i, j)))
        .map(|(i, j)| {
            let (x, y) = (g[i], g[j]);
            let d = if y - h >= x && y + h <= iv.b_max {
                (gamma(a, x, y + h) - gamma(a, x, y - h)) / (2.0 * h)
            } else if y - h >= x {
                (gamma(a, x, y) - gamma(a, x, y - h)) / h
            } else if y + h <= iv.b_max {
                (gamma(a, x, y + h) - gamma(a, x, y)) / h
            } else {
                // Γ vanishes quadratically on the diagonal.
                0.0
            };
            (d, (x, y))
        })
        .reduce(|| (f64::NEG_INFINITY, (0.0, 0.0)), |p, q| if q.0 > p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p });
    TildeDelta { value, at }
}

/// Checks `((t-x)/(y-x))·Δ(x,t) + ((y-t)/(y-x))·Δ(t,y) <= Δ(x,y)` for all
/// grid triples `x < t < y`.
pub fn interval_concavity_check(delta: impl Fn(f64, f64) -> f64 + Sync, iv: &AWInterval, grid_n: usize) -> bool {
    let g = linspace(iv.b_min, iv.b_max, grid_n);
    let table: Vec<Vec<f64>> = (0..g.len())
        .into_par_iter()
        .map(|i| (0..g.len()).map(|j| if j > i { delta(g[i], g[j]) } else { 0.0 }).collect())
        .collect();
    (0..g.len()).all(|i| {
        (i + 1..g.len()).all(|l| {
            (i + 1..l).all(|j| {
                let w = g[l] - g[i];
                (g[j] - g[i]) / w * table[i][j] + (g[l] - g[j]) / w * table[j][l] <= table[i][l] + 1e-9
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceCheck {
    /// `Δ*₀ ..= Δ*_K`.
    pub deltas: Vec<f64>,
    /// `None` when `a` lies in `(τ_l, τ_u)` or `b_min < ½`.
    pub concave: Option<bool>,
    pub note: Option<String>,
}

/// Whether the increments of `Δ*ₖ` are nonincreasing for `k = 1..=K`. When
/// they are, spreading a question budget `R` over games as evenly as
/// possible (`⌊R⌋` or `⌈R⌉` each) is optimal.
pub fn sequence_concavity_check(a: f64, iv: &AWInterval, k_max: usize) -> SequenceCheck {
    let deltas: Vec<f64> = (0..=k_max).map(|k| delta_star(a, iv, k)).collect();
    let (tau_l, tau_u) = thresholds(iv);
    if !iv.is_special() || (a > tau_l && a < tau_u) {
        let note = if iv.is_special() {
            format!("a = {a} lies strictly between tau_l = {tau_l} and tau_u = {tau_u}")
        } else {
            format!("b_min = {} is below 1/2", iv.b_min)
        };
        return SequenceCheck { deltas, concave: None, note: Some(note) };
    }
    let inc: Vec<f64> = deltas.windows(2).map(|w| w[1] - w[0]).collect();
    let concave = inc.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    SequenceCheck { deltas, concave: Some(concave), note: None }
}

/// `ln(1 + (s-1)²/(s+1)²) / (s² - 1)`, extended by its limit 0 at `s = 1`.
pub fn f_s(s: f64) -> f64 {
    let u = s - 1.0;
    if u.abs() < 1e-300 {
        return 0.0;
    }
    let r = u / (s + 1.0);
    (r * r).ln_1p() / (u * (s + 1.0))
}

/// Samples `f` at 10⁴ points of `(1, √2]` and checks it never decreases.
pub fn f_s_monotone_check() -> bool {
    let n = 10_000;
    let top = std::f64::consts::SQRT_2;
    let vals: Vec<f64> = (1..=n).map(|i| f_s(1.0 + (top - 1.0) * i as f64 / n as f64)).collect();
    vals.windows(2).all(|w| w[1] >= w[0])
}
