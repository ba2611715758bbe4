use serde::Serialize;

use super::allocation::{aw2, aw2_unchecked};
use crate::error::{Error, Result};
use crate::numeric::{golden_section_max, integrate_piecewise, linspace};

const QUAD_TOL: f64 = 1e-13;
const ARGMAX_TOL: f64 = 1e-9;
const SCAN_POINTS: usize = 100;

/// Support `[b_min, b_max]` of Bob's uniformly distributed valuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AWInterval {
    pub b_min: f64,
    pub b_max: f64,
}

impl AWInterval {
    pub fn new(b_min: f64, b_max: f64) -> Result<Self> {
        if !(b_min > 0.0 && b_min < b_max && b_max <= 1.0) {
            return Err(Error::invalid(
                "interval",
                format!("[{b_min}, {b_max}] must satisfy 0 < b_min < b_max <= 1"),
            ));
        }
        Ok(AWInterval { b_min, b_max })
    }

    pub fn width(&self) -> f64 {
        self.b_max - self.b_min
    }

    /// Bob always prefers the first item: `½ <= b_min`.
    pub fn is_special(&self) -> bool {
        self.b_min >= 0.5
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.b_min..=self.b_max).contains(&x)
    }
}

/// Alice's true gain announcing `ã` against honest `b`.
pub fn psi(a_tilde: f64, a: f64, b: f64) -> Result<f64> {
    let (d1, d2) = aw2(a_tilde, b)?;
    Ok(d1 * a + d2 * (1.0 - a))
}

pub(crate) fn psi_unchecked(a_tilde: f64, a: f64, b: f64) -> f64 {
    let (d1, d2) = aw2_unchecked(a_tilde, b);
    d1 * a + d2 * (1.0 - a)
}

/// Expected `Ψ(ã; a, b)` for `b` uniform on the interval.
pub fn psi_interval(a_tilde: f64, a: f64, iv: &AWInterval) -> f64 {
    if iv.is_special() && iv.contains(a_tilde) {
        psi_interval_closed(a_tilde, a, iv)
    } else {
        psi_interval_quadrature(a_tilde, a, iv)
    }
}

fn psi_interval_closed(t: f64, a: f64, iv: &AWInterval) -> f64 {
    let (lo, hi) = (iv.b_min, iv.b_max);
    (a * (4.0 * t * t / ((t + hi) * (t + lo))).ln() - t + hi) / (hi - lo)
}

/// Adaptive quadrature of `Ψ` over `b`, split where the allocation
/// changes form. The point `b = ã` has measure zero and is never sampled.
pub fn psi_interval_quadrature(a_tilde: f64, a: f64, iv: &AWInterval) -> f64 {
    let breaks = [a_tilde, 1.0 - a_tilde, 0.5];
    integrate_piecewise(|b| psi_unchecked(a_tilde, a, b), iv.b_min, iv.b_max, &breaks, QUAD_TOL) / iv.width()
}

/// `(τ_l, τ_u)`: below `τ_l` the best announcement is `b_min`, above `τ_u`
/// it is `b_max`.
pub fn thresholds(iv: &AWInterval) -> (f64, f64) {
    let (lo, hi) = (iv.b_min, iv.b_max);
    let tau_l = (2.0 * hi * lo + 2.0 * lo * lo) / (3.0 * hi + lo);
    let tau_u = (2.0 * hi * hi + 2.0 * hi * lo) / (hi + 3.0 * lo);
    (tau_l, tau_u)
}

/// `(ã*, Ψ*)`: the best announcement and its expected gain. The maximizer
/// always lies inside the interval.
pub fn psi_star(a: f64, iv: &AWInterval) -> (f64, f64) {
    let w = iv.width();
    if iv.is_special() {
        let (tau_l, tau_u) = thresholds(iv);
        if a >= tau_u {
            return (iv.b_max, a * (2.0 * iv.b_max / (iv.b_max + iv.b_min)).ln() / w);
        }
        if a <= tau_l {
            return (iv.b_min, a * (2.0 * iv.b_min / (iv.b_max + iv.b_min)).ln() / w + 1.0);
        }
        return golden_section_max(|t| psi_interval_closed(t, a, iv), iv.b_min, iv.b_max, ARGMAX_TOL);
    }
    let grid = linspace(iv.b_min, iv.b_max, SCAN_POINTS);
    let vals: Vec<f64> = grid.iter().map(|&t| psi_interval_quadrature(t, a, iv)).collect();
    let best = (0..vals.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx) = golden_section_max(|t| psi_interval_quadrature(t, a, iv), lo, hi, ARGMAX_TOL);
    if fx >= vals[best] { (x, fx) } else { (grid[best], vals[best]) }
}
