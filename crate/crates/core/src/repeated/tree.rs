use super::spec::{GamePair, RepeatedGameSpec};
use super::strategy::{BehavioralStrategy, InformationSet, Player, Rule, StageOutcome};
use crate::error::{Error, Result};

/// Largest horizon for full-history enumeration.
pub const FULL_TREE_CAP: usize = 12;
/// Largest horizon for the `(stage, n_g - n_l)` recursion.
pub const COLLAPSED_CAP: usize = 30;

/// Expected unnormalized totals `(E[Σ g_A], E[Σ g_B])` over `n` stages.
///
/// Strategies that depend on history only through Alice's gain/loss
/// balance use the collapsed recursion; anything else enumerates the full
/// tree.
pub fn expected_total_gains(
    spec: &RepeatedGameSpec,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    n: usize,
) -> Result<(f64, f64)> {
    if collapsible(alice, Player::Alice) && collapsible(bob, Player::Bob) {
        expected_total_gains_collapsed(spec, alice, bob, n)
    } else {
        expected_total_gains_full(spec, alice, bob, n)
    }
}

fn collapsible(s: &BehavioralStrategy, owner: Player) -> bool {
    !matches!((&s.rule, owner), (Rule::Custom(_), _) | (Rule::AliceThreshold, Player::Bob))
}

/// Full-history enumeration, `n <= FULL_TREE_CAP`.
pub fn expected_total_gains_full(
    spec: &RepeatedGameSpec,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    n: usize,
) -> Result<(f64, f64)> {
    if n > FULL_TREE_CAP {
        return Err(Error::HorizonTooLong { n, cap: FULL_TREE_CAP, what: "full-tree enumeration".into() });
    }
    let mut total = (0.0, 0.0);
    for q in spec.pairs() {
        let mut a_set = InformationSet::alice(q.g_a, Vec::with_capacity(n));
        let mut b_set = InformationSet::bob(q.g_b, Vec::with_capacity(n));
        let (ga, gb) = subtree(q, alice, bob, n, &mut a_set, &mut b_set);
        total.0 += q.p * ga;
        total.1 += q.p * gb;
    }
    Ok(total)
}

pub(crate) fn subtree(
    q: &GamePair,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    n: usize,
    a_set: &mut InformationSet,
    b_set: &mut InformationSet,
) -> (f64, f64) {
    if a_set.history.len() == n {
        return (0.0, 0.0);
    }
    let p_r = alice.prob(a_set);
    let p_l = bob.prob(b_set);
    let mut acc = (0.0, 0.0);
    for (o, w) in [
        (StageOutcome::NR, 1.0 - p_r),
        (StageOutcome::RL, p_r * p_l),
        (StageOutcome::RR, p_r * (1.0 - p_l)),
    ] {
        if w == 0.0 {
            continue;
        }
        let (sa, sb) = o.gains(q.g_a, q.g_b);
        a_set.history.push(o);
        b_set.history.push(o);
        let (ra, rb) = subtree(q, alice, bob, n, a_set, b_set);
        a_set.history.pop();
        b_set.history.pop();
        acc.0 += w * (sa + ra);
        acc.1 += w * (sb + rb);
    }
    acc
}

/// Synthetic history with the given gain/loss balance for Alice.
fn balance_history(g_a: f64, delta: i64) -> Vec<StageOutcome> {
    let (gain, loss) = if g_a > 0.5 {
        (StageOutcome::RL, StageOutcome::RR)
    } else {
        (StageOutcome::RR, StageOutcome::RL)
    };
    let o = if delta >= 0 { gain } else { loss };
    vec![o; delta.unsigned_abs() as usize]
}

/// Recursion over `(stage, n_g - n_l)` per type pair, `n <= COLLAPSED_CAP`.
/// Exact whenever both strategies see history only through that balance.
pub fn expected_total_gains_collapsed(
    spec: &RepeatedGameSpec,
    alice: &BehavioralStrategy,
    bob: &BehavioralStrategy,
    n: usize,
) -> Result<(f64, f64)> {
    if n > COLLAPSED_CAP {
        return Err(Error::HorizonTooLong { n, cap: COLLAPSED_CAP, what: "collapsed recursion".into() });
    }
    if !collapsible(alice, Player::Alice) || !collapsible(bob, Player::Bob) {
        return Err(Error::Precondition(
            "collapsed recursion needs strategies that depend only on the gain/loss balance".into(),
        ));
    }
    let mut total = (0.0, 0.0);
    for q in spec.pairs() {
        let p_l = bob.prob(&InformationSet::bob(q.g_b, vec![]));
        let gain_is_left = q.g_a > 0.5;
        // next[δ + n] holds continuation values from the following stage.
        let width = 2 * n + 1;
        let mut next = vec![(0.0, 0.0); width];
        for k in (0..n).rev() {
            let mut cur = vec![(0.0, 0.0); width];
            for delta in -(k as i64)..=(k as i64) {
                let set = InformationSet::alice(q.g_a, balance_history(q.g_a, delta));
                let p_r = alice.prob(&set);
                let at = |d: i64| next[(d + n as i64) as usize];
                let (up, down) = if gain_is_left {
                    ((p_r * p_l, StageOutcome::RL), (p_r * (1.0 - p_l), StageOutcome::RR))
                } else {
                    ((p_r * (1.0 - p_l), StageOutcome::RR), (p_r * p_l, StageOutcome::RL))
                };
                let mut v = (0.0, 0.0);
                for (w, o, d) in [
                    (1.0 - p_r, StageOutcome::NR, delta),
                    (up.0, up.1, delta + 1),
                    (down.0, down.1, delta - 1),
                ] {
                    let (sa, sb) = o.gains(q.g_a, q.g_b);
                    let (ra, rb) = at(d);
                    v.0 += w * (sa + ra);
                    v.1 += w * (sb + rb);
                }
                cur[(delta + n as i64) as usize] = v;
            }
            next = cur;
        }
        let (ga, gb) = next[n];
        total.0 += q.p * ga;
        total.1 += q.p * gb;
    }
    Ok(total)
}
