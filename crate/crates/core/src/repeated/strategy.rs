use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Alice,
    Bob,
}

/// What happened in one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StageOutcome {
    /// Alice played non-risky.
    NR,
    /// Alice risked, Bob took the left piece.
    RL,
    /// Alice risked, Bob took the right piece.
    RR,
}

impl StageOutcome {
    pub const ALL: [StageOutcome; 3] = [StageOutcome::NR, StageOutcome::RL, StageOutcome::RR];

    /// Stage gains for the given types.
    pub fn gains(self, g_a: f64, g_b: f64) -> (f64, f64) {
        match self {
            StageOutcome::NR => (0.5, 0.5),
            StageOutcome::RL => (g_a, g_b),
            StageOutcome::RR => (1.0 - g_a, 1.0 - g_b),
        }
    }
}

impl fmt::Display for StageOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageOutcome::NR => "NR",
            StageOutcome::RL => "RL",
            StageOutcome::RR => "RR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Action {
    Risky,
    NonRisky,
    Left,
    Right,
}

impl Action {
    /// Bob's selfish choice for his type.
    pub fn selfish(g_b: f64) -> Action {
        if g_b > 0.5 { Action::Left } else { Action::Right }
    }

    pub fn other(self) -> Action {
        match self {
            Action::Risky => Action::NonRisky,
            Action::NonRisky => Action::Risky,
            Action::Left => Action::Right,
            Action::Right => Action::Left,
        }
    }

    fn owner(self) -> Player {
        match self {
            Action::Risky | Action::NonRisky => Player::Alice,
            Action::Left | Action::Right => Player::Bob,
        }
    }
}

/// A point where `owner` must move. Alice's sets sit at the start of stage
/// `history.len() + 1`; Bob's sets additionally imply Alice just risked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationSet {
    pub owner: Player,
    pub private_value: f64,
    pub history: Vec<StageOutcome>,
}

impl InformationSet {
    pub fn alice(g_a: f64, history: Vec<StageOutcome>) -> Self {
        InformationSet { owner: Player::Alice, private_value: g_a, history }
    }

    pub fn bob(g_b: f64, history: Vec<StageOutcome>) -> Self {
        InformationSet { owner: Player::Bob, private_value: g_b, history }
    }

    /// 1-based stage index.
    pub fn stage(&self) -> usize {
        self.history.len() + 1
    }

    /// `(n_g, n_l)`: Alice's past stages with gain above and below ½.
    /// Only meaningful for Alice's sets.
    pub fn alice_counts(&self) -> (usize, usize) {
        alice_counts(self.private_value, &self.history)
    }

    /// Whether `a` is one of the owner's actions.
    pub fn is_valid_action(&self, a: Action) -> bool {
        a.owner() == self.owner
    }
}

impl fmt::Display for InformationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.history.iter().map(|o| o.to_string()).collect();
        let (who, g) = match self.owner {
            Player::Alice => ("Alice", "g_A"),
            Player::Bob => ("Bob", "g_B"),
        };
        write!(f, "{who} {g}={} history=[{}]", self.private_value, h.join(","))
    }
}

pub(crate) fn alice_counts(g_a: f64, history: &[StageOutcome]) -> (usize, usize) {
    history.iter().fold((0, 0), |(g, l), o| {
        let (x, _) = o.gains(g_a, 0.0);
        if *o == StageOutcome::NR {
            (g, l)
        } else if x > 0.5 {
            (g + 1, l)
        } else {
            (g, l + 1)
        }
    })
}

pub type RuleFn = dyn Fn(&InformationSet) -> f64 + Send + Sync;

/// How a strategy chooses at each set. The returned number is the
/// probability of `Risky` for Alice and of `Left` for Bob.
#[derive(Clone)]
pub enum Rule {
    /// Risk iff `n_g >= n_l`.
    AliceThreshold,
    /// Take the piece worth more to Bob.
    BobSelfish,
    /// History-independent probability.
    Constant(f64),
    Custom(Arc<RuleFn>),
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::AliceThreshold => f.write_str("AliceThreshold"),
            Rule::BobSelfish => f.write_str("BobSelfish"),
            Rule::Constant(p) => write!(f, "Constant({p})"),
            Rule::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A behavioral strategy with an optional uniform tremble: the prescribed
/// action keeps `1 - ε`, the other gets `ε` (for mixed rules,
/// `p ↦ p(1 - 2ε) + ε`).
#[derive(Debug, Clone)]
pub struct BehavioralStrategy {
    pub rule: Rule,
    tremble: f64,
}

impl BehavioralStrategy {
    pub fn new(rule: Rule) -> Self {
        BehavioralStrategy { rule, tremble: 0.0 }
    }

    pub fn tremble(&self) -> f64 {
        self.tremble
    }

    /// Probability of the primary action (`Risky` / `Left`) before trembling.
    pub fn base_prob(&self, set: &InformationSet) -> f64 {
        match &self.rule {
            Rule::AliceThreshold => {
                let (g, l) = set.alice_counts();
                if g >= l { 1.0 } else { 0.0 }
            }
            Rule::BobSelfish => {
                if set.private_value > 0.5 { 1.0 } else { 0.0 }
            }
            Rule::Constant(p) => *p,
            Rule::Custom(f) => f(set),
        }
    }

    /// Probability of the primary action at `set`.
    pub fn prob(&self, set: &InformationSet) -> f64 {
        let p = self.base_prob(set);
        p * (1.0 - 2.0 * self.tremble) + self.tremble
    }

    /// Probability of `action` at `set`.
    pub fn action_prob(&self, set: &InformationSet, action: Action) -> f64 {
        let p = self.prob(set);
        match action {
            Action::Risky | Action::Left => p,
            Action::NonRisky | Action::Right => 1.0 - p,
        }
    }

    /// The action the untrembled rule plays with probability at least ½.
    pub fn prescribed(&self, set: &InformationSet) -> Action {
        let p = self.base_prob(set);
        match set.owner {
            Player::Alice => if p >= 0.5 { Action::Risky } else { Action::NonRisky },
            Player::Bob => if p >= 0.5 { Action::Left } else { Action::Right },
        }
    }
}

/// Alice risks at stage `k` iff she has gained at least as often as lost.
pub fn builtin_alice_strategy() -> BehavioralStrategy {
    BehavioralStrategy::new(Rule::AliceThreshold)
}

/// Bob always takes the piece he values more.
pub fn builtin_bob_strategy() -> BehavioralStrategy {
    BehavioralStrategy::new(Rule::BobSelfish)
}

/// Trembling version of `strat`. Trembles compose, so perturbing by `ε`
/// and then by 0 gives the `ε`-perturbed strategy.
pub fn perturb(strat: &BehavioralStrategy, eps: f64) -> Result<BehavioralStrategy> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::invalid("epsilon", format!("{eps} is outside [0, 1/2)")));
    }
    let keep = (1.0 - 2.0 * strat.tremble) * (1.0 - 2.0 * eps);
    Ok(BehavioralStrategy { rule: strat.rule.clone(), tremble: (1.0 - keep) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use StageOutcome::*;

    #[test]
    fn alice_builtin() {
        let s = builtin_alice_strategy();
        assert_eq!(s.prob(&InformationSet::alice(0.0, vec![])), 1.0);
        // g_A = 0: RR is a gain, RL a loss.
        assert_eq!(s.prob(&InformationSet::alice(0.0, vec![RR, RL, RR])), 1.0);
        assert_eq!(s.prob(&InformationSet::alice(0.0, vec![RL])), 0.0);
        assert_eq!(s.prob(&InformationSet::alice(0.0, vec![RL, NR, RR])), 1.0);
    }

    #[test]
    fn bob_builtin() {
        let s = builtin_bob_strategy();
        assert_eq!(s.prescribed(&InformationSet::bob(0.8, vec![])), Action::Left);
        assert_eq!(s.prescribed(&InformationSet::bob(0.2, vec![])), Action::Right);
        assert_eq!(Action::selfish(0.8), Action::Left);
    }

    #[test]
    fn trembles() {
        let s = builtin_alice_strategy();
        let set = InformationSet::alice(0.0, vec![]);
        assert_eq!(perturb(&s, 0.0).unwrap().prob(&set), 1.0);
        let p = perturb(&s, 0.1).unwrap();
        assert!((p.prob(&set) - 0.9).abs() < 1e-15);
        let pp = perturb(&p, 0.0).unwrap();
        assert_eq!(pp.tremble(), p.tremble());
        assert!(perturb(&s, 0.5).is_err());
        assert!(perturb(&s, -0.1).is_err());
        let mixed = perturb(&BehavioralStrategy::new(Rule::Constant(0.3)), 0.1).unwrap();
        assert!((mixed.prob(&set) - (0.3 * 0.8 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn display() {
        let s = InformationSet::alice(0.0, vec![RL, NR]);
        assert_eq!(s.to_string(), "Alice g_A=0 history=[RL,NR]");
        assert_eq!(s.stage(), 3);
    }
}
