//! Other agents' skills as options, and rewards that keep them startable.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::check_probabilities;
use crate::error::MdpError;
use crate::mdp::{ensure_valid, StateId, TabularMdp};
use crate::simulate::{rng_from_seed, sample_next, Step, Trajectory};
use crate::tables::{Policy, ValueTable};

pub type InitiationSet = BTreeSet<StateId>;

/// An option `<I, pi, beta>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    initiation_set: InitiationSet,
    policy: Policy,
    termination: Vec<f64>,
}

impl OptionSpec {
    pub fn new(initiation_set: InitiationSet, policy: Policy, termination: Vec<f64>) -> Result<Self, MdpError> {
        if initiation_set.is_empty() {
            return Err(MdpError::EmptyInitiationSet);
        }
        if let Some(&b) = termination.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(MdpError::BadTermination(b));
        }
        Ok(OptionSpec {
            initiation_set,
            policy,
            termination,
        })
    }

    pub fn initiation_set(&self) -> &InitiationSet {
        &self.initiation_set
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn termination(&self, s: StateId) -> f64 {
        self.termination[s]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitiationDistribution {
    entries: Vec<(InitiationSet, f64)>,
}

impl InitiationDistribution {
    pub fn new(entries: Vec<(InitiationSet, f64)>) -> Result<Self, MdpError> {
        check_probabilities(entries.iter().map(|e| e.1))?;
        Ok(InitiationDistribution { entries })
    }

    pub fn uniform(sets: Vec<InitiationSet>) -> Result<Self, MdpError> {
        let n = sets.len() as f64;
        Self::new(sets.into_iter().map(|s| (s, 1.0 / n)).collect())
    }

    pub fn entries(&self) -> &[(InitiationSet, f64)] {
        &self.entries
    }
}

/// Distribution over `(initiation set, value table)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionValueDistribution {
    entries: Vec<((InitiationSet, ValueTable), f64)>,
}

impl OptionValueDistribution {
    pub fn new(entries: Vec<((InitiationSet, ValueTable), f64)>) -> Result<Self, MdpError> {
        check_probabilities(entries.iter().map(|e| e.1))?;
        Ok(OptionValueDistribution { entries })
    }

    pub fn entries(&self) -> &[((InitiationSet, ValueTable), f64)] {
        &self.entries
    }
}

pub fn initiation_indicator(set: &InitiationSet, state: StateId) -> f64 {
    if set.contains(&state) {
        1.0
    } else {
        0.0
    }
}

/// `sum_I P(I) * 1_I(state)`: the probability that the anticipated option can
/// be started from `state`.
pub fn option_agency_bonus(dist: &InitiationDistribution, state: StateId) -> f64 {
    dist.entries
        .iter()
        .map(|(set, p)| p * initiation_indicator(set, state))
        .sum()
}

/// `sum P(I, V) * 1_I(state) * V(state)`.
pub fn option_value_bonus(dist: &OptionValueDistribution, state: StateId) -> Result<f64, MdpError> {
    dist.entries.iter().try_fold(0.0, |acc, ((set, v), p)| {
        if set.contains(&state) {
            Ok(acc + p * v.get(state)?)
        } else {
            Ok(acc)
        }
    })
}

fn check_sets<'a, I: IntoIterator<Item = &'a InitiationSet>>(mdp: &TabularMdp, sets: I) -> Result<(), MdpError> {
    for set in sets {
        if let Some(&s) = set.iter().find(|&&s| s >= mdp.num_states()) {
            return Err(MdpError::StateOutOfRange(s));
        }
    }
    Ok(())
}

/// `alpha1 * r1`, plus `gamma * alpha2 * option_agency_bonus(s')` on entry to
/// a terminal state.
pub fn augment_mdp_options(
    base: &TabularMdp,
    dist: &InitiationDistribution,
    alpha1: f64,
    alpha2: f64,
) -> Result<TabularMdp, MdpError> {
    ensure_valid(base)?;
    check_sets(base, dist.entries.iter().map(|e| &e.0))?;
    let scale = base.gamma() * alpha2;
    base.reshape_terminal_entry(alpha1, |s| Ok(scale * option_agency_bonus(dist, s)))
}

/// `alpha1 * r1`, plus `alpha2 * option_value_bonus(s')` on entry to a
/// terminal state. Unlike [`augment_mdp_options`] the bonus is not
/// discounted; see [`augment_mdp_option_values_with`] for the discounted form.
pub fn augment_mdp_option_values(
    base: &TabularMdp,
    dist: &OptionValueDistribution,
    alpha1: f64,
    alpha2: f64,
) -> Result<TabularMdp, MdpError> {
    augment_mdp_option_values_with(base, dist, alpha1, alpha2, false)
}

/// As [`augment_mdp_option_values`], optionally multiplying the bonus by gamma.
pub fn augment_mdp_option_values_with(
    base: &TabularMdp,
    dist: &OptionValueDistribution,
    alpha1: f64,
    alpha2: f64,
    discount_bonus: bool,
) -> Result<TabularMdp, MdpError> {
    ensure_valid(base)?;
    check_sets(base, dist.entries.iter().map(|e| &e.0 .0))?;
    for ((_, v), _) in &dist.entries {
        if v.len() != base.num_states() {
            return Err(MdpError::SizeMismatch {
                expected: base.num_states(),
                got: v.len(),
            });
        }
    }
    let scale = if discount_bonus { base.gamma() * alpha2 } else { alpha2 };
    base.reshape_terminal_entry(alpha1, |s| Ok(scale * option_value_bonus(dist, s)?))
}

/// Runs `option` from `start`: follow its policy, and after arriving at each
/// `s'` stop with probability `beta(s')`. Always stops after `max_steps`.
pub fn execute_option(
    mdp: &TabularMdp,
    option: &OptionSpec,
    start: StateId,
    max_steps: usize,
    seed: u64,
) -> Result<Trajectory, MdpError> {
    ensure_valid(mdp)?;
    option.policy.check(mdp)?;
    if option.termination.len() != mdp.num_states() {
        return Err(MdpError::SizeMismatch {
            expected: mdp.num_states(),
            got: option.termination.len(),
        });
    }
    if !option.initiation_set.contains(&start) {
        return Err(MdpError::NotInInitiationSet(start));
    }
    let mut rng = rng_from_seed(seed);
    let mut steps = Vec::new();
    let mut ret = 0.0;
    let mut discount = 1.0;
    let mut s = start;
    while steps.len() < max_steps {
        let a = option.policy.action(s);
        let t = sample_next(mdp, s, a, &mut rng);
        ret += discount * t.reward;
        discount *= mdp.gamma();
        steps.push(Step {
            state: s,
            action: a,
            reward: t.reward,
            next_state: t.next,
        });
        s = t.next;
        if rng.gen::<f64>() < option.termination[s] {
            break;
        }
    }
    Ok(Trajectory {
        steps,
        discounted_return: ret,
    })
}
