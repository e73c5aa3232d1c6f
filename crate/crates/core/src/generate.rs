//! Seeded random instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mdp::TabularMdp;
use crate::simulate::rng_from_seed;
use crate::tables::ValueTable;

/// A random MDP with `num_states >= 2` states. The last state is absorbing,
/// state 0 is initial, and every `(s, a)` has one to three successors with
/// rewards in `[-1, 1]`.
pub fn random_mdp(seed: u64, num_states: usize, num_actions: usize, gamma: f64) -> TabularMdp {
    assert!(num_states >= 2, "need a start and a terminal state");
    let mut rng = rng_from_seed(seed);
    let terminal = num_states - 1;
    let mut mdp = TabularMdp::new(num_states, num_actions, gamma, 0);
    let all: Vec<usize> = (0..num_states).collect();
    for s in 0..terminal {
        for a in 0..num_actions {
            let k = rng.gen_range(1..=num_states.min(3));
            let succ: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut assigned = 0.0;
            for (i, (&next, w)) in succ.iter().zip(&weights).enumerate() {
                let p = if i + 1 == k { 1.0 - assigned } else { w / total };
                assigned += p;
                mdp.add_transition(s, a, next, p, rng.gen_range(-1.0..=1.0));
            }
        }
    }
    mdp.make_absorbing(terminal);
    mdp
}

/// Uniform random values in `[low, high]`.
pub fn random_value_table<R: Rng + ?Sized>(rng: &mut R, num_states: usize, low: f64, high: f64) -> ValueTable {
    ValueTable::new((0..num_states).map(|_| rng.gen_range(low..=high)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::validate_mdp;

    #[test]
    fn random_instances_are_valid() {
        for seed in 0..200 {
            let m = random_mdp(seed, 2 + (seed as usize % 4), 1 + (seed as usize % 3), 0.9);
            assert!(validate_mdp(&m).is_valid(), "seed {seed}: {}", validate_mdp(&m));
        }
    }
}
