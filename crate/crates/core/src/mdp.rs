//! Finite tabular MDPs with absorbing terminal states.
//!
//! Rewards are stored per `(s, a, s')` triple so that augmentations can
//! depend on the successor state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MdpError;

pub type StateId = usize;
pub type ActionId = usize;

/// Probability mass must sum to one within this tolerance.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub next: StateId,
    pub probability: f64,
    pub reward: f64,
}

/// A finite MDP `<S, A, T, r, gamma>` with a terminal set and an initial state.
///
/// Construction does not validate; call [`validate_mdp`] (the solvers do so
/// themselves and refuse invalid input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    gamma: f64,
    initial_state: StateId,
    terminal: Vec<bool>,
    /// Indexed `[state * num_actions + action]`.
    transitions: Vec<Vec<Transition>>,
}

impl TabularMdp {
    pub fn new(num_states: usize, num_actions: usize, gamma: f64, initial_state: StateId) -> Self {
        TabularMdp {
            num_states,
            num_actions,
            gamma,
            initial_state,
            terminal: vec![false; num_states],
            transitions: vec![Vec::new(); num_states * num_actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn initial_state(&self) -> StateId {
        self.initial_state
    }

    pub fn is_terminal(&self, s: StateId) -> bool {
        self.terminal.get(s).copied().unwrap_or(false)
    }

    pub fn terminal_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.terminal.iter().enumerate().filter_map(|(s, &t)| t.then_some(s))
    }

    pub fn has_terminal(&self) -> bool {
        self.terminal.iter().any(|&t| t)
    }

    pub fn transitions(&self, s: StateId, a: ActionId) -> &[Transition] {
        &self.transitions[s * self.num_actions + a]
    }

    pub fn set_gamma(&mut self, gamma: f64) {
        self.gamma = gamma;
    }

    pub fn set_initial_state(&mut self, s: StateId) {
        self.initial_state = s;
    }

    pub fn add_transition(&mut self, s: StateId, a: ActionId, next: StateId, probability: f64, reward: f64) {
        self.transitions[s * self.num_actions + a].push(Transition {
            next,
            probability,
            reward,
        });
    }

    /// Marks `s` terminal without touching its transitions.
    pub fn mark_terminal(&mut self, s: StateId) {
        self.terminal[s] = true;
    }

    /// Marks `s` terminal and replaces every action with a zero-reward self-loop.
    pub fn make_absorbing(&mut self, s: StateId) {
        self.terminal[s] = true;
        for a in 0..self.num_actions {
            self.transitions[s * self.num_actions + a] = vec![Transition {
                next: s,
                probability: 1.0,
                reward: 0.0,
            }];
        }
    }

    /// Expected one-step backup `sum_{s'} T(s'|s,a) [r + gamma * v(s')]`.
    pub fn backup(&self, s: StateId, a: ActionId, v: &[f64]) -> f64 {
        self.transitions(s, a)
            .iter()
            .map(|t| t.probability * (t.reward + self.gamma * v[t.next]))
            .sum()
    }

    /// Returns a copy whose rewards are rewritten by `f(s, a, transition)`.
    pub fn map_rewards<F>(&self, mut f: F) -> Result<TabularMdp, MdpError>
    where
        F: FnMut(StateId, ActionId, &Transition) -> Result<f64, MdpError>,
    {
        let mut out = self.clone();
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                for t in out.transitions[s * self.num_actions + a].iter_mut() {
                    t.reward = f(s, a, t)?;
                }
            }
        }
        Ok(out)
    }

    /// Scales every reward by `alpha1` and adds `bonus(s')` on transitions
    /// that enter a terminal state from a non-terminal one.
    ///
    /// Terminal self-loops are left untouched so that the result keeps its
    /// absorbing zero-reward terminals.
    pub fn reshape_terminal_entry<F>(&self, alpha1: f64, mut bonus: F) -> Result<TabularMdp, MdpError>
    where
        F: FnMut(StateId) -> Result<f64, MdpError>,
    {
        let mut cache: Vec<Option<f64>> = vec![None; self.num_states];
        self.map_rewards(|s, _a, t| {
            if self.is_terminal(s) {
                return Ok(t.reward);
            }
            let base = alpha1 * t.reward;
            if !self.is_terminal(t.next) {
                return Ok(base);
            }
            let extra = match cache[t.next] {
                Some(b) => b,
                None => {
                    let b = bonus(t.next)?;
                    cache[t.next] = Some(b);
                    b
                }
            };
            Ok(base + extra)
        })
    }
}

/// One broken invariant found by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyStateSpace,
    EmptyActionSpace,
    GammaOutOfRange(f64),
    InitialStateOutOfRange(StateId),
    InitialStateTerminal(StateId),
    NoTransitions {
        state: StateId,
        action: ActionId,
    },
    NextStateOutOfRange {
        state: StateId,
        action: ActionId,
        next: StateId,
    },
    ProbabilityOutOfRange {
        state: StateId,
        action: ActionId,
        next: StateId,
        probability: f64,
    },
    ProbabilitySum {
        state: StateId,
        action: ActionId,
        sum: f64,
    },
    NonFiniteReward {
        state: StateId,
        action: ActionId,
        next: StateId,
    },
    TerminalExits {
        state: StateId,
        action: ActionId,
    },
    TerminalRewardNonzero {
        state: StateId,
        action: ActionId,
        reward: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyStateSpace => write!(f, "state space is empty"),
            EmptyActionSpace => write!(f, "action space is empty"),
            GammaOutOfRange(g) => write!(f, "gamma {g} is outside (0, 1]"),
            InitialStateOutOfRange(s) => write!(f, "initial state {s} is out of range"),
            InitialStateTerminal(s) => write!(f, "initial state {s} is terminal"),
            NoTransitions { state, action } => {
                write!(f, "state {state} action {action}: no transitions")
            }
            NextStateOutOfRange { state, action, next } => {
                write!(f, "state {state} action {action}: next state {next} out of range")
            }
            ProbabilityOutOfRange {
                state,
                action,
                next,
                probability,
            } => write!(
                f,
                "state {state} action {action}: probability {probability} to {next} outside [0, 1]"
            ),
            ProbabilitySum { state, action, sum } => write!(
                f,
                "state {state} action {action}: probabilities do not sum to 1 (sum = {sum})"
            ),
            NonFiniteReward { state, action, next } => {
                write!(f, "state {state} action {action}: non-finite reward to {next}")
            }
            TerminalExits { state, action } => write!(
                f,
                "terminal state {state} action {action}: terminal state can be exited"
            ),
            TerminalRewardNonzero { state, action, reward } => write!(
                f,
                "terminal state {state} action {action}: terminal reward nonzero ({reward})"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_mdp(mdp: &TabularMdp) -> ValidationReport {
    let mut out = Vec::new();
    if mdp.num_states == 0 {
        out.push(Violation::EmptyStateSpace);
    }
    if mdp.num_actions == 0 {
        out.push(Violation::EmptyActionSpace);
    }
    if !(mdp.gamma > 0.0 && mdp.gamma <= 1.0) {
        out.push(Violation::GammaOutOfRange(mdp.gamma));
    }
    if mdp.initial_state >= mdp.num_states {
        out.push(Violation::InitialStateOutOfRange(mdp.initial_state));
    } else if mdp.is_terminal(mdp.initial_state) && mdp.num_states > 1 {
        // A one-state MDP is the degenerate terminal-only instance.
        out.push(Violation::InitialStateTerminal(mdp.initial_state));
    }

    for s in 0..mdp.num_states {
        for a in 0..mdp.num_actions {
            let ts = mdp.transitions(s, a);
            if ts.is_empty() {
                out.push(Violation::NoTransitions { state: s, action: a });
                continue;
            }
            let mut sum = 0.0;
            for t in ts {
                if t.next >= mdp.num_states {
                    out.push(Violation::NextStateOutOfRange {
                        state: s,
                        action: a,
                        next: t.next,
                    });
                }
                if !(0.0..=1.0).contains(&t.probability) {
                    out.push(Violation::ProbabilityOutOfRange {
                        state: s,
                        action: a,
                        next: t.next,
                        probability: t.probability,
                    });
                }
                if !t.reward.is_finite() {
                    out.push(Violation::NonFiniteReward {
                        state: s,
                        action: a,
                        next: t.next,
                    });
                }
                sum += t.probability;
            }
            if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                out.push(Violation::ProbabilitySum {
                    state: s,
                    action: a,
                    sum,
                });
            }
            if mdp.is_terminal(s) {
                let self_mass: f64 = ts
                    .iter()
                    .filter(|t| t.next == s && t.probability > 0.0)
                    .map(|t| t.probability)
                    .sum();
                if (self_mass - 1.0).abs() > PROBABILITY_TOLERANCE
                    || ts.iter().any(|t| t.next != s && t.probability > 0.0)
                {
                    out.push(Violation::TerminalExits { state: s, action: a });
                }
                for t in ts.iter().filter(|t| t.next == s && t.reward != 0.0) {
                    out.push(Violation::TerminalRewardNonzero {
                        state: s,
                        action: a,
                        reward: t.reward,
                    });
                }
            }
        }
    }
    ValidationReport { violations: out }
}

pub(crate) fn ensure_valid(mdp: &TabularMdp) -> Result<(), MdpError> {
    let report = validate_mdp(mdp);
    if report.is_valid() {
        Ok(())
    } else {
        Err(MdpError::Invalid(report))
    }
}
