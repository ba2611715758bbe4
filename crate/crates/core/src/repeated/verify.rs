use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::spec::{risk_condition, GamePair, RepeatedGameSpec};
use super::strategy::{
    alice_counts, builtin_alice_strategy, builtin_bob_strategy, perturb, Action,
    BehavioralStrategy, InformationSet, Player, StageOutcome,
};
use super::tree::{subtree, FULL_TREE_CAP};
use crate::error::{Error, Result};

/// A deviation counts as profitable only above this margin.
pub const VERIFY_TOL: f64 = 1e-9;

/// Outcome of the deviation check at one tremble level.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    /// Largest `value(other action) - value(prescribed action)` over all
    /// information sets of both players. Negative when every prescribed
    /// action is strictly better.
    pub max_violation: f64,
    pub worst_set: String,
    /// Largest violation over Bob's sets, per value of `T` (`[T=0, T=1]`).
    pub bob_max_violation_given_t: [f64; 2],
    pub sets_checked: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub epsilons: Vec<EpsilonReport>,
    pub pass: bool,
}

/// Posterior-weighted action values at one information set.
#[derive(Default, Clone, Copy)]
struct Acc {
    weight: f64,
    /// Weighted value of the primary action (`Risky` / `Left`).
    primary: f64,
    /// Weighted value of the secondary action (`NonRisky` / `Right`).
    secondary: f64,
}

impl Acc {
    fn add(&mut self, w: f64, primary: f64, secondary: f64) {
        self.weight += w;
        self.primary += w * primary;
        self.secondary += w * secondary;
    }

    fn merge(&mut self, o: &Acc) {
        self.weight += o.weight;
        self.primary += o.primary;
        self.secondary += o.secondary;
    }
}

/// `(owner, type index, history length, base-3 history code)`.
type Key = (Player, usize, usize, u64);

fn code(history: &[StageOutcome]) -> u64 {
    history.iter().fold(0, |c, o| {
        3 * c
            + match o {
                StageOutcome::NR => 0,
                StageOutcome::RL => 1,
                StageOutcome::RR => 2,
            }
    })
}

fn decode(mut c: u64, len: usize) -> Vec<StageOutcome> {
    let mut h = vec![StageOutcome::NR; len];
    for slot in h.iter_mut().rev() {
        *slot = StageOutcome::ALL[(c % 3) as usize];
        c /= 3;
    }
    h
}

struct Walker<'a> {
    q: &'a GamePair,
    a_idx: usize,
    b_idx: usize,
    alice: &'a BehavioralStrategy,
    bob: &'a BehavioralStrategy,
    n: usize,
    /// Index 0 holds all sets; Bob's sets are also split by `T` in 1 and 2.
    sets: [HashMap<Key, Acc>; 2],
    bob_by_t: HashMap<Key, Acc>,
}

impl Walker<'_> {
    /// Continuation totals from `history` onward; records action values at
    /// both players' sets along the way. `reach` excludes the type prior.
    fn visit(&mut self, history: &mut Vec<StageOutcome>, reach: f64) -> (f64, f64) {
        if history.len() == self.n {
            return (0.0, 0.0);
        }
        let (ga, gb) = (self.q.g_a, self.q.g_b);
        let a_set = InformationSet::alice(ga, history.clone());
        let b_set = InformationSet::bob(gb, history.clone());
        let p_r = self.alice.prob(&a_set);
        let p_l = self.bob.prob(&b_set);

        let mut child = |me: &mut Self, o: StageOutcome, w: f64| {
            history.push(o);
            let v = me.visit(history, reach * w);
            history.pop();
            v
        };
        let nr = child(self, StageOutcome::NR, 1.0 - p_r);
        let rl = child(self, StageOutcome::RL, p_r * p_l);
        let rr = child(self, StageOutcome::RR, p_r * (1.0 - p_l));

        let key = |owner, idx| (owner, idx, history.len(), code(history));
        let w = self.q.p * reach;
        let alice_r = p_l * (ga + rl.0) + (1.0 - p_l) * (1.0 - ga + rr.0);
        let alice_nr = 0.5 + nr.0;
        self.sets[0].entry(key(Player::Alice, self.a_idx)).or_default().add(w, alice_r, alice_nr);
        let bob_l = gb + rl.1;
        let bob_r = 1.0 - gb + rr.1;
        let kb = key(Player::Bob, self.b_idx);
        self.sets[1].entry(kb).or_default().add(w * p_r, bob_l, bob_r);
        let kt = (Player::Bob, 2 * self.b_idx + self.q.t() as usize, kb.2, kb.3);
        self.bob_by_t.entry(kt).or_default().add(w * p_r, bob_l, bob_r);

        let bob_here = p_l * bob_l + (1.0 - p_l) * bob_r;
        (p_r * alice_r + (1.0 - p_r) * alice_nr, p_r * bob_here + (1.0 - p_r) * (0.5 + nr.1))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("epsilon", format!("{eps} is outside (0, 1/2)")))
    }
}

fn violation(acc: &Acc, prescribed_primary: bool) -> f64 {
    let (p, s) = (acc.primary / acc.weight, acc.secondary / acc.weight);
    if prescribed_primary { s - p } else { p - s }
}

fn verify_one(spec: &RepeatedGameSpec, n: usize, eps: f64) -> Result<EpsilonReport> {
    let base_a = builtin_alice_strategy();
    let base_b = builtin_bob_strategy();
    let alice = perturb(&base_a, eps)?;
    let bob = perturb(&base_b, eps)?;
    let a_types = spec.alice_types();
    let b_types = spec.bob_types();

    let mut all: [HashMap<Key, Acc>; 2] = Default::default();
    let mut by_t: HashMap<Key, Acc> = HashMap::new();
    for q in spec.pairs() {
        let mut w = Walker {
            q,
            a_idx: a_types.iter().position(|&g| g == q.g_a).unwrap_or(0),
            b_idx: b_types.iter().position(|&g| g == q.g_b).unwrap_or(0),
            alice: &alice,
            bob: &bob,
            n,
            sets: Default::default(),
            bob_by_t: HashMap::new(),
        };
        w.visit(&mut Vec::with_capacity(n), 1.0);
        for (dst, src) in all.iter_mut().zip(&w.sets) {
            for (k, a) in src {
                dst.entry(*k).or_default().merge(a);
            }
        }
        for (k, a) in &w.bob_by_t {
            by_t.entry(*k).or_default().merge(a);
        }
    }

    let set_of = |(owner, idx, len, c): Key, t_split: bool| match owner {
        Player::Alice => InformationSet::alice(a_types[idx], decode(c, len)),
        Player::Bob => {
            let i = if t_split { idx / 2 } else { idx };
            InformationSet::bob(b_types[i], decode(c, len))
        }
    };
    let prescribes_primary = |set: &InformationSet| match set.owner {
        Player::Alice => base_a.prescribed(set) == Action::Risky,
        Player::Bob => base_b.prescribed(set) == Action::Left,
    };

    let mut max_violation = f64::NEG_INFINITY;
    let mut worst: Option<Key> = None;
    let mut sets_checked = 0;
    for map in &all {
        let mut keys: Vec<&Key> = map.keys().collect();
        keys.sort_by_key(|k| (k.0 == Player::Bob, k.1, k.2, k.3));
        for k in keys {
            let acc = &map[k];
            if acc.weight <= 0.0 {
                continue;
            }
            sets_checked += 1;
            let v = violation(acc, prescribes_primary(&set_of(*k, false)));
            if v > max_violation {
                max_violation = v;
                worst = Some(*k);
            }
        }
    }
    let mut bob_t = [f64::NEG_INFINITY; 2];
    for (k, acc) in &by_t {
        if acc.weight > 0.0 {
            let v = violation(acc, prescribes_primary(&set_of(*k, true)));
            let t = k.1 % 2;
            bob_t[t] = bob_t[t].max(v);
        }
    }
    let worst_set = worst.map(|k| set_of(k, false).to_string()).unwrap_or_default();
    let pass = max_violation <= VERIFY_TOL && bob_t.iter().all(|&v| v <= VERIFY_TOL);
    Ok(EpsilonReport {
        epsilon: eps,
        max_violation,
        worst_set,
        bob_max_violation_given_t: bob_t,
        sets_checked,
        pass,
    })
}

/// Checks that no information set of either player has a profitable
/// one-shot deviation from the built-in profile when every other set
/// trembles with probability `ε`.
pub fn equilibrium_verify(spec: &RepeatedGameSpec, n: usize, eps_list: &[f64]) -> Result<VerifyReport> {
    if !risk_condition(spec) {
        return Err(Error::Precondition(
            "risk condition fails: some g_A has a zero T-posterior or prefers the safe half".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "at least one stage is required"));
    }
    if n > FULL_TREE_CAP {
        return Err(Error::HorizonTooLong { n, cap: FULL_TREE_CAP, what: "equilibrium verification".into() });
    }
    if eps_list.is_empty() {
        return Err(Error::Empty("epsilon list".into()));
    }
    for &e in eps_list {
        check_eps(e)?;
    }
    let epsilons = eps_list
        .par_iter()
        .map(|&e| verify_one(spec, n, e))
        .collect::<Result<Vec<_>>>()?;
    let pass = epsilons.iter().all(|r| r.pass);
    Ok(VerifyReport { n, epsilons, pass })
}

/// Expected total for `θ`'s owner from `θ`'s stage on, playing `action` at
/// `θ` and the `ε`-perturbed built-ins everywhere else.
pub fn deviation_value(
    spec: &RepeatedGameSpec,
    n: usize,
    eps: f64,
    theta: &InformationSet,
    action: Action,
) -> Result<f64> {
    deviation_value_filtered(spec, n, eps, theta, action, |_| true)
}

/// As [`deviation_value`], with the posterior restricted to pairs whose
/// `T` equals `t`.
pub fn deviation_value_given_t(
    spec: &RepeatedGameSpec,
    n: usize,
    eps: f64,
    theta: &InformationSet,
    action: Action,
    t: bool,
) -> Result<f64> {
    deviation_value_filtered(spec, n, eps, theta, action, |q| q.t() == t)
}

fn deviation_value_filtered(
    spec: &RepeatedGameSpec,
    n: usize,
    eps: f64,
    theta: &InformationSet,
    action: Action,
    keep: impl Fn(&GamePair) -> bool,
) -> Result<f64> {
    check_eps(eps)?;
    if n > FULL_TREE_CAP {
        return Err(Error::HorizonTooLong { n, cap: FULL_TREE_CAP, what: "deviation evaluation".into() });
    }
    if theta.history.len() >= n {
        return Err(Error::invalid("theta", format!("stage {} is beyond n = {n}", theta.stage())));
    }
    if !theta.is_valid_action(action) {
        return Err(Error::invalid("action", format!("{action:?} is not available at {theta}")));
    }
    let alice = perturb(&builtin_alice_strategy(), eps)?;
    let bob = perturb(&builtin_bob_strategy(), eps)?;
    let (mut num, mut den) = (0.0, 0.0);
    for q in spec.pairs().iter().filter(|q| keep(q)) {
        let mine = match theta.owner {
            Player::Alice => q.g_a == theta.private_value,
            Player::Bob => q.g_b == theta.private_value,
        };
        if !mine || q.p == 0.0 {
            continue;
        }
        let mut a_set = InformationSet::alice(q.g_a, Vec::with_capacity(n));
        let mut b_set = InformationSet::bob(q.g_b, Vec::with_capacity(n));
        let mut reach = q.p;
        for &o in &theta.history {
            let p_r = alice.prob(&a_set);
            let p_l = bob.prob(&b_set);
            reach *= match o {
                StageOutcome::NR => 1.0 - p_r,
                StageOutcome::RL => p_r * p_l,
                StageOutcome::RR => p_r * (1.0 - p_l),
            };
            a_set.history.push(o);
            b_set.history.push(o);
        }
        let p_r = alice.prob(&a_set);
        let p_l = bob.prob(&b_set);
        let mut cont = |o: StageOutcome| {
            a_set.history.push(o);
            b_set.history.push(o);
            let v = subtree(q, &alice, &bob, n, &mut a_set, &mut b_set);
            a_set.history.pop();
            b_set.history.pop();
            v
        };
        let value = match action {
            Action::NonRisky => 0.5 + cont(StageOutcome::NR).0,
            Action::Risky => {
                p_l * (q.g_a + cont(StageOutcome::RL).0)
                    + (1.0 - p_l) * (1.0 - q.g_a + cont(StageOutcome::RR).0)
            }
            Action::Left => {
                reach *= p_r;
                q.g_b + cont(StageOutcome::RL).1
            }
            Action::Right => {
                reach *= p_r;
                1.0 - q.g_b + cont(StageOutcome::RR).1
            }
        };
        num += reach * value;
        den += reach;
    }
    if den <= 0.0 {
        return Err(Error::Unreachable(theta.to_string()));
    }
    Ok(num / den)
}

/// `p(T=1 | θ) / p(T=0 | θ)` for Alice after `n_g` gains and `n_l` losses.
pub fn posterior_ratio(n_g: usize, n_l: usize, eps: f64, prior_ratio: f64) -> f64 {
    let d = n_g as f64 - n_l as f64;
    (d * ((1.0 - eps).ln() - eps.ln()) + prior_ratio.ln()).exp()
}

/// The same ratio by summing reach probabilities over the support.
pub fn alice_posterior_ratio_exact(
    spec: &RepeatedGameSpec,
    g_a: f64,
    history: &[StageOutcome],
    eps: f64,
) -> Result<f64> {
    check_eps(eps)?;
    let alice = perturb(&builtin_alice_strategy(), eps)?;
    let bob = perturb(&builtin_bob_strategy(), eps)?;
    let mut w = [0.0; 2];
    for q in spec.pairs().iter().filter(|q| q.g_a == g_a) {
        let mut reach = q.p;
        for k in 0..history.len() {
            let p_r = alice.prob(&InformationSet::alice(g_a, history[..k].to_vec()));
            let p_l = bob.prob(&InformationSet::bob(q.g_b, history[..k].to_vec()));
            reach *= match history[k] {
                StageOutcome::NR => 1.0 - p_r,
                StageOutcome::RL => p_r * p_l,
                StageOutcome::RR => p_r * (1.0 - p_l),
            };
        }
        w[q.t() as usize] += reach;
    }
    if w[0] <= 0.0 {
        return Err(Error::Unreachable(format!("T=0 has no mass for g_A={g_a}")));
    }
    Ok(w[1] / w[0])
}

/// Bob's realized total from stage `k` (1-based) equals
/// `(n-k+1)/2 + (g_B^* - ½)·Δ`, with `Δ` Alice's gain/loss displacement over
/// those stages and `g_B^*` Bob's larger value when `T = 1`, smaller when
/// `T = 0`.
pub fn walk_identity_holds(pair: &GamePair, path: &[StageOutcome], k: usize) -> bool {
    if k == 0 || k > path.len() {
        return false;
    }
    let tail = &path[k - 1..];
    let realized: f64 = tail.iter().map(|o| o.gains(pair.g_a, pair.g_b).1).sum();
    let (g, l) = alice_counts(pair.g_a, tail);
    let displacement = g as f64 - l as f64;
    let g_max = pair.g_b.max(1.0 - pair.g_b);
    let g_star = if pair.t() { g_max } else { 1.0 - g_max };
    let predicted = tail.len() as f64 / 2.0 + (g_star - 0.5) * displacement;
    (realized - predicted).abs() <= 1e-12
}

/// Samples `samples` seeded play paths under the built-ins trembling with
/// `ε = ¼` and checks the walk identity from a random stage of each.
pub fn walk_gain_identity_check(spec: &RepeatedGameSpec, n: usize, samples: usize, seed: u64) -> bool {
    if n == 0 {
        return false;
    }
    let alice = perturb(&builtin_alice_strategy(), 0.25).expect("valid tremble");
    let bob = perturb(&builtin_bob_strategy(), 0.25).expect("valid tremble");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = spec.pairs();
    (0..samples).all(|_| {
        let mut u: f64 = rng.random();
        let q = pairs
            .iter()
            .find(|q| {
                u -= q.p;
                u < 0.0
            })
            .unwrap_or(&pairs[pairs.len() - 1]);
        let mut path = Vec::with_capacity(n);
        for _ in 0..n {
            let risky = rng.random::<f64>() < alice.prob(&InformationSet::alice(q.g_a, path.clone()));
            let left = rng.random::<f64>() < bob.prob(&InformationSet::bob(q.g_b, path.clone()));
            path.push(match (risky, left) {
                (false, _) => StageOutcome::NR,
                (true, true) => StageOutcome::RL,
                (true, false) => StageOutcome::RR,
            });
        }
        let k = rng.random_range(1..=n);
        walk_identity_holds(q, &path, k)
    })
}
