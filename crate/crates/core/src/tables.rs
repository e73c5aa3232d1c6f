use serde::{Deserialize, Serialize};

use crate::error::MdpError;
use crate::mdp::{ActionId, StateId, TabularMdp};

/// One value per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub values: Vec<f64>,
}

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Self {
        ValueTable { values }
    }

    pub fn zeros(num_states: usize) -> Self {
        ValueTable {
            values: vec![0.0; num_states],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: StateId) -> Result<f64, MdpError> {
        self.values.get(s).copied().ok_or(MdpError::StateOutOfRange(s))
    }

    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<StateId> for ValueTable {
    type Output = f64;

    fn index(&self, s: StateId) -> &f64 {
        &self.values[s]
    }
}

/// Deterministic policy: one action per state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub actions: Vec<ActionId>,
}

impl Policy {
    pub fn new(actions: Vec<ActionId>) -> Self {
        Policy { actions }
    }

    pub fn uniform(num_states: usize, action: ActionId) -> Self {
        Policy {
            actions: vec![action; num_states],
        }
    }

    pub fn action(&self, s: StateId) -> ActionId {
        self.actions[s]
    }

    pub fn check(&self, mdp: &TabularMdp) -> Result<(), MdpError> {
        if self.actions.len() != mdp.num_states() {
            return Err(MdpError::SizeMismatch {
                expected: mdp.num_states(),
                got: self.actions.len(),
            });
        }
        match self.actions.iter().find(|&&a| a >= mdp.num_actions()) {
            Some(&action) => Err(MdpError::ActionOutOfRange {
                action,
                num_actions: mdp.num_actions(),
            }),
            None => Ok(()),
        }
    }
}

/// State-action values, row-major by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    num_actions: usize,
    q: Vec<f64>,
}

impl QTable {
    pub fn zeros(num_states: usize, num_actions: usize) -> Self {
        QTable {
            num_actions,
            q: vec![0.0; num_states * num_actions],
        }
    }

    pub fn num_states(&self) -> usize {
        self.q.len().checked_div(self.num_actions).unwrap_or(0)
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, s: StateId, a: ActionId) -> f64 {
        self.q[s * self.num_actions + a]
    }

    pub fn set(&mut self, s: StateId, a: ActionId, value: f64) {
        self.q[s * self.num_actions + a] = value;
    }

    pub fn row(&self, s: StateId) -> &[f64] {
        &self.q[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// Highest-valued action, lowest id on ties.
    pub fn best_action(&self, s: StateId) -> ActionId {
        argmax_lowest(self.row(s))
    }

    pub fn max(&self, s: StateId) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy policy; terminal states map to action 0.
    pub fn greedy_policy(&self, mdp: &TabularMdp) -> Policy {
        Policy::new(
            (0..self.num_states())
                .map(|s| if mdp.is_terminal(s) { 0 } else { self.best_action(s) })
                .collect(),
        )
    }

    pub fn raw(&self) -> &[f64] {
        &self.q
    }
}

pub(crate) fn argmax_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
