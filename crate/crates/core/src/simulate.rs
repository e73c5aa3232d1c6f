use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MdpError;
use crate::mdp::{ensure_valid, ActionId, StateId, TabularMdp, Transition};
use crate::tables::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: StateId,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: StateId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub discounted_return: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Visited states, starting state first.
    pub fn states(&self) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.steps.first().map(|s| s.state).into_iter().collect();
        out.extend(self.steps.iter().map(|s| s.next_state));
        out
    }

    pub fn final_state(&self) -> Option<StateId> {
        self.steps.last().map(|s| s.next_state)
    }
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples a successor of `(s, a)`.
pub fn sample_next<R: Rng + ?Sized>(mdp: &TabularMdp, s: StateId, a: ActionId, rng: &mut R) -> Transition {
    let ts = mdp.transitions(s, a);
    if ts.len() == 1 {
        return ts[0];
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for t in ts {
        acc += t.probability;
        if u < acc {
            return *t;
        }
    }
    // Rounding left a sliver of mass at the top; give it to the last
    // transition with positive probability.
    *ts.iter()
        .rev()
        .find(|t| t.probability > 0.0)
        .unwrap_or(&ts[ts.len() - 1])
}

/// Rolls out `policy` from the initial state until a terminal is entered or
/// `max_steps` transitions have been taken.
pub fn simulate(mdp: &TabularMdp, policy: &Policy, max_steps: usize, seed: u64) -> Result<Trajectory, MdpError> {
    simulate_from(mdp, policy, mdp.initial_state(), max_steps, seed)
}

/// As [`simulate`] but from an arbitrary start; a terminal start yields an
/// empty trajectory.
pub fn simulate_from(
    mdp: &TabularMdp,
    policy: &Policy,
    start: StateId,
    max_steps: usize,
    seed: u64,
) -> Result<Trajectory, MdpError> {
    ensure_valid(mdp)?;
    policy.check(mdp)?;
    if start >= mdp.num_states() {
        return Err(MdpError::StateOutOfRange(start));
    }
    let mut rng = rng_from_seed(seed);
    let mut steps = Vec::new();
    let mut discounted_return = 0.0;
    let mut discount = 1.0;
    let mut s = start;
    while steps.len() < max_steps && !mdp.is_terminal(s) {
        let a = policy.action(s);
        let t = sample_next(mdp, s, a, &mut rng);
        discounted_return += discount * t.reward;
        discount *= mdp.gamma();
        steps.push(Step {
            state: s,
            action: a,
            reward: t.reward,
            next_state: t.next,
        });
        s = t.next;
    }
    Ok(Trajectory {
        steps,
        discounted_return,
    })
}
