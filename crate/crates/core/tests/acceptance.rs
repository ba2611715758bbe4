//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fairdiv_core::aw::{self, AWInterval};
use fairdiv_core::bundled;
use fairdiv_core::dc::{self, scenario_from_json, SearchConfig, AXIS_A, AXIS_B};
use fairdiv_core::info::conditional_entropy;
use fairdiv_core::nash::{self, Society, CERTIFICATE_TOL};
use fairdiv_core::repeated::{
    alice_posterior_ratio_exact, equilibrium_verify, posterior_ratio, InformationSet,
    RepeatedGameSpec, StageOutcome, VERIFY_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn scenario(name: &str) -> dc::Scenario {
    scenario_from_json(bundled::get(name).expect("bundled")).expect("valid scenario")
}

fn h_binary(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

fn c1_conditional_entropy() -> Check {
    let s = scenario("example1.json");
    let h = conditional_entropy(s.joint(), AXIS_B, AXIS_A).map_err(|e| e.to_string())?;
    // Each row of the joint is (2/3, 1/3) after conditioning.
    let exact = h_binary(2.0 / 3.0);
    ensure((h - exact).abs() <= 1e-4, format!("H = {h}, expected {exact}"))?;
    ensure((h - 0.918296).abs() <= 1e-4, format!("H = {h}"))?;
    Ok(format!("H(V_B|V_A) = {h:.6}"))
}

fn c2_region() -> Check {
    let s = scenario("example1.json");
    let cfg = SearchConfig::default();
    let full = dc::gain_region(&s, 0.918296, &cfg).map_err(|e| e.to_string())?;
    for p in [(2.0 / 3.0, 2.0 / 3.0), (1.0 / 6.0, 5.0 / 6.0)] {
        ensure(full.contains(p, 0.01), format!("full-rate region misses {p:?}"))?;
    }
    let zero = dc::gain_region(&s, 0.0, &cfg).map_err(|e| e.to_string())?;
    ensure(
        zero.contains_segment((0.5, 0.5), (1.0 / 3.0, 1.0), 0.005),
        format!("zero-rate region {:?} misses the time-sharing segment", zero.vertices()),
    )?;
    Ok(format!("{} vertices at full rate", full.vertices().len()))
}

fn c3_selfish() -> Check {
    let cfg = SearchConfig::default();
    let s = scenario("example1.json");
    let h = s.full_information_rate();
    let mut rates: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    rates.push(h);
    let rows = dc::selfish_curve(&s, &rates, &cfg).map_err(|e| e.to_string())?;
    for r in &rows {
        if r.rate == 0.0 || r.rate >= h {
            ensure(r.delta_sel.abs() <= 0.02, format!("delta_sel({}) = {}", r.rate, r.delta_sel))?;
        } else {
            ensure(r.delta_sel > 0.0, format!("delta_sel({}) = {} is not positive", r.rate, r.delta_sel))?;
        }
    }
    let s2 = scenario("setup2.json");
    let rows2 = dc::selfish_curve(&s2, &rates[..21], &cfg).map_err(|e| e.to_string())?;
    let crossing = rows2.windows(2).find(|w| w[0].delta_sel > 0.0 && w[1].delta_sel < 0.0);
    let (lo, hi) = crossing
        .map(|w| (w[0].rate, w[1].rate))
        .ok_or_else(|| "delta_sel on setup 2 never changes sign".to_string())?;
    Ok(format!("setup 2 delta_sel changes sign in ({lo:.2}, {hi:.2})"))
}

fn c4_adjusted_winner() -> Check {
    let mut worst: f64 = 0.0;
    for i in 1..100 {
        for j in 1..100 {
            if i == j {
                continue;
            }
            let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
            let closed = aw::aw2(a, b).map_err(|e| e.to_string())?;
            let general = aw::adjusted_winner(&[a, 1.0 - a], &[b, 1.0 - b]).map_err(|e| e.to_string())?;
            worst = worst.max((closed.0 - general.alice[0]).abs()).max((closed.1 - general.alice[1]).abs());
        }
    }
    ensure(worst <= 1e-10, format!("aw2 deviates by {worst}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut gap: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(2..=8);
        let mut draw = || {
            let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let (a, b) = (draw(), draw());
        let r = aw::adjusted_winner(&a, &b).map_err(|e| e.to_string())?;
        gap = gap.max((r.alice_gain(&a) - r.bob_gain(&b)).abs());
    }
    ensure(gap <= 1e-10, format!("equitability gap {gap}"))?;
    Ok(format!("grid deviation {worst:.1e}, equitability gap {gap:.1e}"))
}

fn c5_psi_jump() -> Check {
    let (a, b) = (0.1, 0.3);
    let left = aw::psi(b - 1e-13, a, b).map_err(|e| e.to_string())?;
    let right = aw::psi(b + 1e-13, a, b).map_err(|e| e.to_string())?;
    // Left of b: Alice gets only part of item 2; right: all of item 1 plus part of item 2.
    let want_left = (1.0 - a) / (2.0 - b - b);
    let want_right = a + (1.0 - a) * (1.0 - b - b) / (2.0 - b - b);
    ensure((left - want_left).abs() <= 1e-9, format!("left limit {left}"))?;
    ensure((right - want_right).abs() <= 1e-9, format!("right limit {right}"))?;
    ensure((left - 0.642857).abs() < 1e-6 && (right - 0.357143).abs() < 1e-6, "limits differ from the figure")?;
    Ok(format!("left {left:.6}, right {right:.6}"))
}

/// `Ψ*` by brute force: midpoint integration on each side of `ã`, and a
/// scan of announcements with step `1e-3`.
fn psi_star_brute(a: f64, x: f64, y: f64) -> f64 {
    let avg = |t: f64| {
        let piece = |lo: f64, hi: f64| {
            if hi <= lo {
                return 0.0;
            }
            let n = 60;
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| aw::psi(t, a, lo + (i as f64 + 0.5) * h).unwrap() * h).sum::<f64>()
        };
        (piece(x, t) + piece(t, y)) / (y - x)
    };
    let steps = ((y - x) / 1e-3).ceil() as usize;
    (0..=steps).map(|i| avg((x + i as f64 * 1e-3).min(y).min(1.0 - 1e-12))).fold(f64::NEG_INFINITY, f64::max)
}

fn c6_delta_star() -> Check {
    let a = 0.4;
    let iv = AWInterval::new(0.5, 1.0).unwrap();
    let (tau_l, _) = aw::thresholds(&iv);
    ensure(a <= tau_l, "a is not below tau_l")?;
    let deltas: Vec<f64> = (0..=5).map(|k| aw::delta_star(a, &iv, k)).collect();
    ensure(deltas.iter().all(|d| (0.0..=1.0).contains(d)), format!("out of [0, 1]: {deltas:?}"))?;
    ensure(deltas.windows(2).all(|w| w[1] >= w[0]), "not nondecreasing")?;
    let inc: Vec<f64> = deltas.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(inc.windows(2).all(|w| w[1] <= w[0] + 1e-9), format!("increments not nonincreasing: {inc:?}"))?;
    let closed = 0.8 * (3.0 / (1.0 + 0.5f64.sqrt()).powi(2)).ln();
    ensure((deltas[1] - closed).abs() <= 1e-5, format!("delta*_1 = {} vs {closed}", deltas[1]))?;
    ensure((deltas[1] - 0.023214).abs() <= 1e-5, format!("delta*_1 = {}", deltas[1]))?;

    let base = psi_star_brute(a, 0.5, 1.0);
    let n = 400;
    let brute = (1..n)
        .map(|i| {
            let b1 = 0.5 + 0.5 * i as f64 / n as f64;
            ((b1 - 0.5) * psi_star_brute(a, 0.5, b1) + (1.0 - b1) * psi_star_brute(a, b1, 1.0)) / 0.5 - base
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ensure((deltas[1] - brute).abs() <= 2e-3, format!("brute force {brute} vs {}", deltas[1]))?;

    let bound = aw::tilde_delta_bound(a, &iv);
    for (k, d) in deltas.iter().enumerate().skip(1) {
        ensure(*d <= bound.budget_bound(k as f64) + 1e-12, format!("delta*_{k} = {d} exceeds k * tilde"))?;
    }
    Ok(format!("delta*_1 = {:.6}, brute {brute:.6}, tilde = {:.6}", deltas[1], bound.value))
}

fn c7_equilibrium() -> Check {
    let spec = RepeatedGameSpec::from_json(bundled::get("sample1p_game.json").unwrap()).map_err(|e| e.to_string())?;
    let report = equilibrium_verify(&spec, 4, &[1e-2, 1e-3]).map_err(|e| e.to_string())?;
    for e in &report.epsilons {
        ensure(e.pass && e.max_violation <= VERIFY_TOL, format!("eps {}: violation {} at {}", e.epsilon, e.max_violation, e.worst_set))?;
    }
    let spec6 = spec.with_stages(6).map_err(|e| e.to_string())?;
    let mut histories = vec![vec![]];
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..=6 {
        let mut next = Vec::new();
        for h in &histories {
            for g_a in spec6.alice_types() {
                let (p0, p1) = spec6.t_posterior(g_a).unwrap();
                let (ng, nl) = InformationSet::alice(g_a, h.clone()).alice_counts();
                for eps in [0.1, 0.01] {
                    let exact = alice_posterior_ratio_exact(&spec6, g_a, h, eps).map_err(|e| e.to_string())?;
                    let formula = posterior_ratio(ng, nl, eps, p1 / p0);
                    worst = worst.max((exact - formula).abs() / exact.max(1.0));
                    checked += 1;
                }
            }
            for o in StageOutcome::ALL {
                let mut h2: Vec<StageOutcome> = h.clone();
                h2.push(o);
                next.push(h2);
            }
        }
        histories = next;
    }
    ensure(worst <= 1e-10, format!("posterior ratio error {worst}"))?;
    let v: Vec<String> = report.epsilons.iter().map(|e| format!("{:.2e}", e.max_violation)).collect();
    Ok(format!("max violations [{}]; {checked} posteriors, error {worst:.1e}", v.join(", ")))
}

fn random_society(rng: &mut ChaCha8Rng) -> (Society, usize, Vec<Vec<usize>>) {
    let n = rng.random_range(2..=12);
    let m = rng.random_range(2..=4);
    let members: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let k = rng.random_range(1..=n.min(4));
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    for j in k..n {
        clusters[rng.random_range(0..k)].push(j);
    }
    let ci = (0..k).max_by_key(|&i| clusters[i].len()).unwrap();
    let target = &clusters[ci];
    let t = rng.random_range(1..=target.len().min(3));
    let mut parts: Vec<Vec<usize>> = (0..t).map(|i| vec![target[i]]).collect();
    for &j in &target[t..] {
        parts[rng.random_range(0..t)].push(j);
    }
    (Society::new(m, members, clusters).unwrap(), ci, parts)
}

fn c8_nash() -> Check {
    let s = Society::from_json(bundled::get("two_members.json").unwrap()).map_err(|e| e.to_string())?;
    let r = nash::refinement_bound_check(&s, 0, &[vec![0], vec![1]]).map_err(|e| e.to_string())?;
    ensure((r.log2_w + 2.0).abs() <= 1e-6, format!("log2 W = {}", r.log2_w))?;
    ensure(r.log2_w_refined.abs() <= 1e-6, format!("log2 W' = {}", r.log2_w_refined))?;
    ensure((r.n1_mi - 2.0).abs() <= 1e-6, format!("n1 I = {}", r.n1_mi))?;
    ensure((r.log2_w_refined - r.log2_w - r.n1_mi).abs() <= 1e-6, "bound is not tight")?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_cert: f64 = 0.0;
    for case in 0..50 {
        let (soc, ci, parts) = random_society(&mut rng);
        let r = nash::refinement_bound_check(&soc, ci, &parts).map_err(|e| e.to_string())?;
        worst_cert = worst_cert.max(r.certificate).max(r.certificate_refined);
        ensure(r.pass, format!("case {case}: {r:?}"))?;
    }
    ensure(worst_cert <= 1.0 + CERTIFICATE_TOL, format!("certificate {worst_cert}"))?;
    Ok(format!("tight example ok; 50 random societies, worst certificate {worst_cert:.9}"))
}

fn c9_curve_shapes() -> Check {
    let cfg = SearchConfig::default();
    let rates: Vec<f64> = (0..=40).map(|i| i as f64 * 0.025).collect();
    for name in bundled::DC_SCENARIOS {
        let rows = dc::selfish_curve(&scenario(name), &rates, &cfg).map_err(|e| e.to_string())?;
        ensure(
            rows.windows(2).all(|w| w[1].g_sel_a >= w[0].g_sel_a - 1e-12),
            format!("G_sel_A decreases on {name}"),
        )?;
    }
    let rows = dc::selfish_curve(&scenario("sample1p.json"), &rates, &cfg).map_err(|e| e.to_string())?;
    let diffs: Vec<f64> = rows.windows(2).map(|w| w[1].g_sel_b - w[0].g_sel_b).collect();
    let first_down = diffs.iter().position(|d| *d < -1e-3).ok_or("G_sel_B never decreases")?;
    let up = diffs[first_down..].iter().position(|d| *d > 1e-3).ok_or("G_sel_B never increases after decreasing")?;
    Ok(format!(
        "G_sel_B on sample 1p falls from R = {:.3} and rises from R = {:.3}",
        rates[first_down],
        rates[first_down + up]
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("conditional entropy of example 1", 1, c1_conditional_entropy),
        ("rate-gain region of example 1", 30, c2_region),
        ("selfish equitability gap", 60, c3_selfish),
        ("adjusted winner closed form and equitability", 5, c4_adjusted_winner),
        ("spying gain discontinuity", 1, c5_psi_jump),
        ("question improvements and bounds", 120, c6_delta_star),
        ("repeated game equilibrium and posteriors", 60, c7_equilibrium),
        ("Nash welfare refinement bound", 60, c8_nash),
        ("selfish curve shapes", 60, c9_curve_shapes),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*limit);
        let (tag, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; exceeded {limit} s")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("[{tag}] {}. {name} ({:.2} s): {detail}", i + 1, took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
