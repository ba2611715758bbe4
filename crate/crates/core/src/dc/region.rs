use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{Scenario, AXIS_A, AXIS_B};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, upper_concave_envelope, ConvexPolygon, Point};
use crate::info::{conditional_mutual_information, plogp, Axis, JointPmf};

const ROW_TOL: f64 = 1e-12;
const RATE_SLACK: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;
const SELECT_TOL: f64 = 1e-9;

/// One round of the auxiliary strategy: `table[prefix][v][f]` is the
/// probability of sending `f` given the earlier messages (flattened into
/// `prefix`) and the sender's valuation `v`.
///
/// Bob sends in rounds 1, 3, 5, ...; Alice in rounds 2, 4, ...
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub table: Vec<Vec<Vec<f64>>>,
}

impl Channel {
    pub fn new(table: Vec<Vec<Vec<f64>>>) -> Self {
        Channel { table }
    }

    /// Output alphabet size.
    pub fn outputs(&self) -> usize {
        self.table
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len)
    }
}

/// Messages `F_1..F_r` plus Alice's division policy
/// `policy[v_A][messages][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryStrategy {
    rounds: Vec<Channel>,
    policy: Vec<Vec<Vec<f64>>>,
}

fn check_row(path: String, row: &[f64]) -> Result<()> {
    if let Some(i) = row.iter().position(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::invalid(format!("{path}[{i}]"), "negative or non-finite probability"));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::invalid(path, format!("row sums to {s}, expected 1")));
    }
    Ok(())
}

impl AuxiliaryStrategy {
    pub fn new(rounds: Vec<Channel>, policy: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mut prefixes = 1usize;
        for (r, ch) in rounds.iter().enumerate() {
            if ch.table.len() != prefixes {
                return Err(Error::DimensionMismatch {
                    context: format!("round {} message prefixes", r + 1),
                    expected: prefixes,
                    got: ch.table.len(),
                });
            }
            let nf = ch.outputs();
            if nf == 0 {
                return Err(Error::invalid(format!("rounds[{r}]"), "empty message alphabet"));
            }
            for (p, rows) in ch.table.iter().enumerate() {
                for (v, row) in rows.iter().enumerate() {
                    if row.len() != nf {
                        return Err(Error::DimensionMismatch {
                            context: format!("rounds[{r}][{p}][{v}]"),
                            expected: nf,
                            got: row.len(),
                        });
                    }
                    check_row(format!("rounds[{r}][{p}][{v}]"), row)?;
                }
            }
            prefixes *= nf;
        }
        for (a, per_a) in policy.iter().enumerate() {
            if per_a.len() != prefixes {
                return Err(Error::DimensionMismatch {
                    context: format!("policy[{a}] message sequences"),
                    expected: prefixes,
                    got: per_a.len(),
                });
            }
            for (k, row) in per_a.iter().enumerate() {
                check_row(format!("policy[{a}][{k}]"), row)?;
            }
        }
        Ok(AuxiliaryStrategy { rounds, policy })
    }

    /// Single Bob-to-Alice round: `channel[v_B][f]`, `policy[v_A][f][d]`.
    pub fn one_round(channel: Vec<Vec<f64>>, policy: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        AuxiliaryStrategy::new(vec![Channel::new(vec![channel])], policy)
    }

    /// No messages, Alice picks `policy[v_A][d]`.
    pub fn silent(policy: Vec<Vec<f64>>) -> Result<Self> {
        AuxiliaryStrategy::new(vec![], policy.into_iter().map(|r| vec![r]).collect())
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[Channel] {
        &self.rounds
    }

    fn message_sequences(&self) -> usize {
        self.rounds.iter().map(Channel::outputs).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateGainPoint {
    pub r_ab: f64,
    pub r_ba: f64,
    pub g_a: f64,
    pub g_b: f64,
}

/// Rates and expected gains of a given auxiliary strategy, exactly.
pub fn evaluate_point(s: &Scenario, strat: &AuxiliaryStrategy) -> Result<RateGainPoint> {
    let (na, nb, nd) = (s.num_alice(), s.num_bob(), s.num_divisions());
    let card = na.max(nb);
    let mut prefixes = 1usize;
    for (r, ch) in strat.rounds.iter().enumerate() {
        let senders = if r % 2 == 0 { nb } else { na };
        for (p, rows) in ch.table.iter().enumerate() {
            if rows.len() != senders {
                return Err(Error::DimensionMismatch {
                    context: format!("rounds[{r}][{p}] sender valuations"),
                    expected: senders,
                    got: rows.len(),
                });
            }
        }
        if ch.outputs() > card * prefixes {
            return Err(Error::invalid(
                format!("rounds[{r}]"),
                format!(
                    "message alphabet {} exceeds the cardinality bound {}",
                    ch.outputs(),
                    card * prefixes
                ),
            ));
        }
        prefixes *= ch.outputs();
    }
    if strat.policy.len() != na {
        return Err(Error::DimensionMismatch {
            context: "policy valuations".into(),
            expected: na,
            got: strat.policy.len(),
        });
    }
    if let Some(row) = strat.policy.iter().flatten().find(|r| r.len() != nd) {
        return Err(Error::DimensionMismatch {
            context: "policy divisions".into(),
            expected: nd,
            got: row.len(),
        });
    }

    let k = strat.message_sequences();
    let mut table = vec![0.0; na * nb * k];
    let (mut ga, mut gb) = (0.0, 0.0);
    for a in 0..na {
        for b in 0..nb {
            let mut paths = vec![(0usize, s.p(a, b))];
            for (r, ch) in strat.rounds.iter().enumerate() {
                let v = if r % 2 == 0 { b } else { a };
                let nf = ch.outputs();
                paths = paths
                    .into_iter()
                    .flat_map(|(pre, pr)| {
                        ch.table[pre][v]
                            .iter()
                            .enumerate()
                            .map(move |(f, &q)| (pre * nf + f, pr * q))
                    })
                    .collect();
            }
            for (msg, pr) in paths {
                table[(a * nb + b) * k + msg] += pr;
                for (d, &pd) in strat.policy[a][msg].iter().enumerate() {
                    let (x, y) = s.gain(d, a, b);
                    ga += pr * pd * x;
                    gb += pr * pd * y;
                }
            }
        }
    }
    let axes = vec![
        Axis::new(AXIS_A, s.alice_labels().to_vec()),
        Axis::new(AXIS_B, s.bob_labels().to_vec()),
        Axis::indexed("F", k),
    ];
    let j = JointPmf::new(axes, table)?;
    Ok(RateGainPoint {
        r_ab: conditional_mutual_information(&j, AXIS_A, "F", AXIS_B)?,
        r_ba: conditional_mutual_information(&j, AXIS_B, "F", AXIS_A)?,
        g_a: ga,
        g_b: gb,
    })
}

/// Grid search settings for the single-round region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Simplex grid step for each row `p(f | v_B)`.
    pub step: f64,
    /// Step of the local refinement around envelope vertices.
    pub refine_step: f64,
    /// Upper bound on coarse grid size; the step is coarsened to fit.
    pub max_grid_points: usize,
    /// Message alphabet size; defaults to `|V_B|`.
    pub messages: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            step: 0.01,
            refine_step: 0.001,
            max_grid_points: 2_000_000,
            messages: None,
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative ints.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=rest {
            cur.push(x);
            rec(rest - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

struct Grid {
    units: u32,
    nf: usize,
    nb: usize,
    comps: Vec<Vec<u32>>,
}

impl Grid {
    fn new(s: &Scenario, cfg: &SearchConfig) -> Result<Self> {
        if !(cfg.step > 0.0 && cfg.step <= 1.0) || !(cfg.refine_step > 0.0) {
            return Err(Error::invalid("search", "grid steps must lie in (0, 1]"));
        }
        let nb = s.num_bob();
        let nf = cfg.messages.unwrap_or(nb).max(1);
        let mut units = (1.0 / cfg.step).round().max(1.0) as u32;
        while units > 1
            && binom(units as usize + nf - 1, nf - 1).powi(nb as i32) > cfg.max_grid_points as f64
        {
            units -= 1;
        }
        let comps = compositions(units, nf);
        Ok(Grid { units, nf, nb, comps })
    }

    fn len(&self) -> usize {
        self.comps.len().pow(self.nb as u32)
    }

    fn channel(&self, mut idx: usize) -> Vec<f64> {
        let c = self.comps.len();
        let mut q = Vec::with_capacity(self.nb * self.nf);
        for _ in 0..self.nb {
            q.extend(self.comps[idx % c].iter().map(|&x| x as f64 / self.units as f64));
            idx /= c;
        }
        q
    }
}

/// Per-cell contribution to the expected gains for each division.
fn cell_scores(s: &Scenario, q: &[f64], nf: usize, a: usize, f: usize) -> Vec<(f64, f64)> {
    (0..s.num_divisions())
        .map(|d| {
            (0..s.num_bob()).fold((0.0, 0.0), |acc, b| {
                let w = s.p(a, b) * q[b * nf + f];
                let (x, y) = s.gain(d, a, b);
                (acc.0 + w * x, acc.1 + w * y)
            })
        })
        .collect()
}

/// I(V_B; F | V_A) for a single Bob channel `q[b * nf + f]`.
fn rate_r1(s: &Scenario, q: &[f64], nf: usize) -> f64 {
    let (na, nb) = (s.num_alice(), s.num_bob());
    let mut h_af = 0.0;
    let mut h_a = 0.0;
    for a in 0..na {
        let mut pa = 0.0;
        for f in 0..nf {
            let paf: f64 = (0..nb).map(|b| s.p(a, b) * q[b * nf + f]).sum();
            h_af += plogp(paf);
            pa += paf;
        }
        h_a += plogp(pa);
    }
    let h_f_given_b: f64 = (0..nb)
        .map(|b| {
            let pb: f64 = (0..na).map(|a| s.p(a, b)).sum();
            pb * (0..nf).map(|f| plogp(q[b * nf + f])).sum::<f64>()
        })
        .sum();
    (h_af - h_a - h_f_given_b).max(0.0)
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    rate: f64,
    ga: f64,
    gb: f64,
}

/// Alice's best response to a channel: per (v_A, f) the division with the
/// largest expected Alice gain, ties broken towards Bob.
fn selfish_probe(s: &Scenario, q: &[f64], nf: usize) -> Probe {
    let (mut ga, mut gb) = (0.0, 0.0);
    for a in 0..s.num_alice() {
        for f in 0..nf {
            let best = cell_scores(s, q, nf, a, f).into_iter().fold(
                (f64::NEG_INFINITY, f64::NEG_INFINITY),
                |best, c| {
                    if c.0 > best.0 + TIE_TOL || (c.0 >= best.0 - TIE_TOL && c.1 > best.1) {
                        c
                    } else {
                        best
                    }
                },
            );
            ga += best.0;
            gb += best.1;
        }
    }
    Probe { rate: rate_r1(s, q, nf), ga, gb }
}

fn refine_around(grid: &Grid, center: &[f64], cfg: &SearchConfig) -> Vec<Vec<f64>> {
    let fine = (1.0 / cfg.refine_step).round().max(1.0) as i64;
    let dims = (grid.nf - 1) * grid.nb;
    if dims == 0 {
        return vec![center.to_vec()];
    }
    let coarse_step = 1.0 / grid.units as f64;
    let mut radius = ((coarse_step / cfg.refine_step).round() as i64).max(1);
    while radius > 1 && ((2 * radius + 1) as f64).powi(dims as i32) > 200_000.0 {
        radius -= 1;
    }
    let base: Vec<i64> = center.iter().map(|x| (x * fine as f64).round() as i64).collect();
    let side = (2 * radius + 1) as usize;
    let total = side.pow(dims as u32);
    let mut out = Vec::new();
    'outer: for mut idx in 0..total {
        let mut q = Vec::with_capacity(center.len());
        for b in 0..grid.nb {
            let row = &base[b * grid.nf..(b + 1) * grid.nf];
            let mut last = fine;
            for &x in &row[..grid.nf - 1] {
                let off = (idx % side) as i64 - radius;
                idx /= side;
                let v = x + off;
                if v < 0 || v > fine {
                    continue 'outer;
                }
                last -= v;
                q.push(v as f64 / fine as f64);
            }
            if last < 0 {
                continue 'outer;
            }
            q.push(last as f64 / fine as f64);
        }
        out.push(q);
    }
    out
}

/// One row of a selfish-gain curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfishRow {
    pub rate: f64,
    pub g_sel_a: f64,
    pub g_sel_b: f64,
    pub delta_sel: f64,
}

/// Bob's gain at the Alice-optimal operating point for rate `r`.
fn select_bob_gain(probes: &[Probe], env: &crate::geometry::Envelope, r: f64) -> f64 {
    let on: Vec<&Probe> = probes
        .iter()
        .filter(|p| p.ga >= env.eval(p.rate).unwrap_or(f64::INFINITY) - SELECT_TOL)
        .collect();
    let target = env.eval(r).unwrap_or(f64::NEG_INFINITY);
    let mut best = f64::NEG_INFINITY;
    for p in &on {
        if p.rate <= r + RATE_SLACK && p.ga >= target - SELECT_TOL {
            best = best.max(p.gb);
        }
    }
    if best > f64::NEG_INFINITY {
        return best;
    }
    // Time sharing between a point left of r and one right of r.
    for p in on.iter().filter(|p| p.rate < r) {
        for q in on.iter().filter(|q| q.rate > r) {
            let lam = (q.rate - r) / (q.rate - p.rate);
            let ga = lam * p.ga + (1.0 - lam) * q.ga;
            if ga >= target - SELECT_TOL {
                best = best.max(lam * p.gb + (1.0 - lam) * q.gb);
            }
        }
    }
    best
}

/// `G_sel_A`, `G_sel_B` and their difference over a rate grid for a single
/// Bob-to-Alice round.
pub fn selfish_curve(s: &Scenario, rates: &[f64], cfg: &SearchConfig) -> Result<Vec<SelfishRow>> {
    if rates.is_empty() {
        return Err(Error::Empty("rate grid".into()));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::invalid("rates", format!("rate {r} is negative")));
    }
    let grid = Grid::new(s, cfg)?;
    let nf = grid.nf;
    let mut probes: Vec<(Probe, usize)> = (0..grid.len())
        .into_par_iter()
        .map(|i| (selfish_probe(s, &grid.channel(i), nf), i))
        .collect();
    let pts: Vec<Point> = probes.iter().map(|(p, _)| (p.rate, p.ga)).collect();
    let env = upper_concave_envelope(&pts)?;

    let mut centers: Vec<usize> = probes
        .iter()
        .filter(|(p, _)| {
            env.vertices()
                .iter()
                .any(|v| (v.0 - p.rate).abs() <= RATE_SLACK && (v.1 - p.ga).abs() <= SELECT_TOL)
        })
        .map(|(_, i)| *i)
        .collect();
    centers.sort_unstable();
    centers.dedup();
    let refined: Vec<Probe> = centers
        .par_iter()
        .flat_map_iter(|&i| {
            refine_around(&grid, &grid.channel(i), cfg)
                .into_iter()
                .map(|q| selfish_probe(s, &q, nf))
                .collect::<Vec<_>>()
        })
        .collect();
    probes.extend(refined.into_iter().map(|p| (p, usize::MAX)));
    let probes: Vec<Probe> = probes.into_iter().map(|(p, _)| p).collect();
    let pts: Vec<Point> = probes.iter().map(|p| (p.rate, p.ga)).collect();
    let env = upper_concave_envelope(&pts)?;

    Ok(rates
        .iter()
        .map(|&r| {
            let g_sel_a = env.eval(r).unwrap_or(f64::NAN);
            let g_sel_b = select_bob_gain(&probes, &env, r);
            SelfishRow { rate: r, g_sel_a, g_sel_b, delta_sel: g_sel_b - g_sel_a }
        })
        .collect())
}

fn minkowski(a: &[Point], b: &[Point]) -> Vec<Point> {
    let sums: Vec<Point> = a
        .iter()
        .flat_map(|p| b.iter().map(move |q| (p.0 + q.0, p.1 + q.1)))
        .collect();
    convex_hull(&sums).map(|h| h.vertices().to_vec()).unwrap_or_default()
}

/// Achievable `(G_A, G_B)` pairs with spying rate at most `r`, as a convex
/// polygon (time sharing included).
pub fn gain_region(s: &Scenario, r: f64, cfg: &SearchConfig) -> Result<ConvexPolygon> {
    if !(r >= 0.0) {
        return Err(Error::invalid("rate", format!("rate {r} is negative")));
    }
    let grid = Grid::new(s, cfg)?;
    let nf = grid.nf;
    let verts: Vec<Point> = (0..grid.len())
        .into_par_iter()
        .filter_map(|i| {
            let q = grid.channel(i);
            if rate_r1(s, &q, nf) > r + RATE_SLACK {
                return None;
            }
            let mut acc = vec![(0.0, 0.0)];
            for a in 0..s.num_alice() {
                for f in 0..nf {
                    acc = minkowski(&acc, &cell_scores(s, &q, nf, a, f));
                }
            }
            Some(acc)
        })
        .flatten_iter()
        .collect();
    convex_hull(&verts)
}
