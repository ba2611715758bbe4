use fairdiv_core::aw::{self, AWInterval};
use fairdiv_core::dc::{selfish_curve, SearchConfig};
use fairdiv_core::numeric::linspace;
use proptest::prelude::*;

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// `Ψ*` by scanning announcements (step `1e-3`) and integrating each side
/// of the announcement with the midpoint rule.
fn psi_star_brute(a: f64, x: f64, y: f64) -> f64 {
    let avg = |t: f64| {
        let piece = |lo: f64, hi: f64| {
            if hi <= lo {
                return 0.0;
            }
            let n = 40;
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| aw::psi(t, a, lo + (i as f64 + 0.5) * h).unwrap() * h).sum::<f64>()
        };
        (piece(x, t) + piece(t, y)) / (y - x)
    };
    let steps = ((y - x) / 1e-3).ceil() as usize;
    (0..=steps).map(|i| avg((x + i as f64 * 1e-3).min(y).min(1.0 - 1e-12))).fold(f64::NEG_INFINITY, f64::max)
}

fn brute_delta(a: f64, iv: &AWInterval, k: usize, n: usize) -> f64 {
    let g = linspace(iv.b_min, iv.b_max, n);
    let w = iv.width();
    let mut table = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        for j in i + 1..=n {
            table[i][j] = (g[j] - g[i]) * psi_star_brute(a, g[i], g[j]);
        }
    }
    let base = table[0][n] / w;
    let best = match k {
        1 => (0..=n).map(|m| table[0][m] + table[m][n]).fold(f64::NEG_INFINITY, f64::max),
        _ => {
            let mut best = f64::NEG_INFINITY;
            for m in 0..=n {
                for l in 0..=m {
                    for r in m..=n {
                        best = best.max(table[0][l] + table[l][m] + table[m][r] + table[r][n]);
                    }
                }
            }
            best
        }
    };
    best / w - base
}

/// An interval with `½ <= b_min` and a valuation outside `(τ_l, τ_u)`.
fn special_case() -> impl Strategy<Value = (f64, AWInterval)> {
    (0.5f64..0.9, 0.05f64..0.5, 0.0f64..1.0).prop_filter_map("regime", |(lo, w, u)| {
        let hi = (lo + w).min(1.0);
        let iv = AWInterval::new(lo, hi).ok()?;
        let (tl, tu) = aw::thresholds(&iv);
        if tu < 0.99 && u > 0.5 {
            Some((tu + (0.99 - tu) * (u - 0.5) * 2.0, iv))
        } else {
            Some((0.01 + (tl - 0.01) * u, iv))
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adjusted_winner_is_equitable(
        (a, b) in (2usize..7).prop_flat_map(|m| (
            prop::collection::vec(1e-6f64..1.0, m),
            prop::collection::vec(1e-6f64..1.0, m),
        ))
    ) {
        let (a, b) = (normalized(a), normalized(b));
        let r = aw::adjusted_winner(&a, &b).unwrap();
        prop_assert!((r.alice_gain(&a) - r.bob_gain(&b)).abs() <= 1e-10);
        let split = r.alice.iter().filter(|x| **x > 0.0 && **x < 1.0).count();
        prop_assert!(split <= 1);
        for (x, y) in r.alice.iter().zip(&r.bob) {
            prop_assert!((x + y - 1.0).abs() <= 1e-12 && (0.0..=1.0).contains(x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nested_intervals_nest_thresholds(lo in 0.5f64..0.95, w in 0.01f64..0.5, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let hi = (lo + w).min(1.0);
        let outer = AWInterval::new(lo, hi).unwrap();
        let x = lo + (hi - lo) * s.min(t) * 0.99;
        let y = hi - (hi - lo) * (1.0 - s.max(t)) * 0.99;
        prop_assume!(y > x);
        let inner = AWInterval::new(x, y).unwrap();
        let (ol, ou) = aw::thresholds(&outer);
        let (il, iu) = aw::thresholds(&inner);
        prop_assert!(ol <= il + 1e-12 && il <= iu && iu <= ou + 1e-12);
        prop_assert!(ol <= lo && hi <= ou);
    }

    #[test]
    fn psi_monotone_and_curved(a in 0.01f64..0.99, b in 0.02f64..0.98) {
        let h = 1e-4;
        let grid = linspace(0.01, 0.99, 200);
        for &t in &grid {
            if (t - b).abs() < 3.0 * h || (t - (1.0 - b)).abs() < 3.0 * h {
                continue;
            }
            let f = |x: f64| aw::psi(x, a, b).unwrap();
            let slope = (f(t + h) - f(t - h)) / (2.0 * h);
            let curve = f(t + h) - 2.0 * f(t) + f(t - h);
            if t < b {
                prop_assert!(slope >= -1e-9, "decreasing at {t}");
            } else {
                prop_assert!(slope <= 1e-9, "increasing at {t}");
            }
            if t > b.min(1.0 - b) && t < b.max(1.0 - b) {
                prop_assert!(curve <= 1e-12, "not concave at {t}");
            } else {
                prop_assert!(curve >= -1e-12, "not convex at {t}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn maximizer_inside_interval(a in 0.01f64..0.99, lo in 0.05f64..0.8, w in 0.05f64..0.6) {
        let iv = AWInterval::new(lo, (lo + w).min(0.99)).unwrap();
        let (t, v) = aw::psi_star(a, &iv);
        prop_assert!(iv.contains(t));
        let outside = linspace(0.01, 0.99, 98)
            .into_iter()
            .map(|x| aw::psi_interval(x, a, &iv))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= outside - 1e-6, "{v} < {outside}");
    }

    #[test]
    fn geometric_plan_matches_brute_force((a, iv) in special_case()) {
        for k in 1..=2 {
            let d = aw::delta_star(a, &iv, k);
            let brute = brute_delta(a, &iv, k, if k == 1 { 100 } else { 24 });
            prop_assert!((d - brute).abs() <= 2e-3, "k={k}: {d} vs {brute}");
        }
    }
}

#[test]
fn tilde_bounds_one_question_on_subintervals() {
    let iv = AWInterval::new(0.5, 1.0).unwrap();
    let t = aw::tilde_delta_bound(0.4, &iv);
    let mut state = 17u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..50 {
        let (u, v) = (0.5 + 0.5 * next(), 0.5 + 0.5 * next());
        let (x, y) = (u.min(v), u.max(v));
        if y - x < 1e-6 {
            continue;
        }
        let d = aw::delta_star(0.4, &AWInterval::new(x, y).unwrap(), 1);
        assert!(d <= t.value + 1e-9, "[{x}, {y}]: {d} > {}", t.value);
    }
    for k in 1..=5 {
        assert!(aw::delta_star(0.4, &iv, k) <= t.budget_bound(k as f64));
    }
}

#[test]
fn one_question_gain_vanishes_on_short_intervals() {
    let d = aw::delta_star(0.4, &AWInterval::new(0.7, 0.7 + 1e-6).unwrap(), 1);
    assert!(d.is_finite() && d * 1e-6 < 1e-12);
}

#[test]
fn delta_sequence_bounded() {
    let iv = AWInterval::new(0.5, 1.0).unwrap();
    let c = aw::sequence_concavity_check(0.4, &iv, 5);
    assert_eq!(c.concave, Some(true));
    assert_eq!(c.deltas[0], 0.0);
    assert!(c.deltas.windows(2).all(|w| w[1] >= w[0]) && c.deltas.iter().all(|d| *d <= 1.0));
}

#[test]
fn interval_concavity_of_one_question_gain() {
    let iv = AWInterval::new(0.5, 1.0).unwrap();
    let delta = |x: f64, y: f64| aw::delta_star(0.4, &AWInterval::new(x, y).unwrap(), 1);
    assert!(aw::interval_concavity_check(delta, &iv, 24));
}

#[test]
fn reduction_full_and_zero_rate() {
    let a = 0.2;
    let bob = [0.35, 0.75];
    let announcements: Vec<f64> = (1..200).map(|i| i as f64 * 0.005 + 0.0025).collect();
    let joint = vec![vec![0.5, 0.5]];
    let s = aw::aw_to_dc_scenario(&[a], &bob, &joint, &announcements).unwrap();
    let rows = selfish_curve(&s, &[0.0, 1.0], &SearchConfig::default()).unwrap();

    // Knowing b, the best announcement approaches b from the side of a.
    let sup: f64 = bob
        .iter()
        .map(|&b| {
            let t = if a < b { b - 1e-12 } else { b + 1e-12 };
            0.5 * aw::psi(t, a, b).unwrap()
        })
        .sum();
    assert!(rows[1].g_sel_a <= sup + 1e-12);
    assert!(sup - rows[1].g_sel_a < 0.01, "{} vs {sup}", rows[1].g_sel_a);

    let best_single = announcements
        .iter()
        .map(|&t| bob.iter().map(|&b| 0.5 * aw::psi(t, a, b).unwrap()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((rows[0].g_sel_a - best_single).abs() < 1e-12);
}

#[test]
fn closed_form_matches_procedure_off_diagonal() {
    for i in 1..100 {
        for j in 1..100 {
            if i == j {
                continue;
            }
            let (a, b) = (i as f64 / 100.0, j as f64 / 100.0);
            let (x, y) = aw::aw2(a, b).unwrap();
            let r = aw::adjusted_winner(&[a, 1.0 - a], &[b, 1.0 - b]).unwrap();
            assert!((x - r.alice[0]).abs() <= 1e-10 && (y - r.alice[1]).abs() <= 1e-10, "a={a} b={b}");
        }
    }
    assert!(aw::aw2(0.3, 0.3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn any_plan_improves(a in 0.01f64..0.99, lo in 0.5f64..0.9, w in 0.02f64..0.5, cuts in prop::collection::vec(0.0f64..1.0, 3)) {
        let hi = (lo + w).min(1.0);
        let mut inner: Vec<f64> = cuts.iter().map(|c| lo + c * (hi - lo)).collect();
        inner.sort_by(f64::total_cmp);
        let plan = aw::QuestionPlan::new(a, 2, [vec![lo], inner, vec![hi]].concat()).unwrap();
        prop_assert!(aw::delta_improvement(a, &plan) >= -1e-12);
    }
}
