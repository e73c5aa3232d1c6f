//! Exact planners: value iteration, policy evaluation, greedy extraction and
//! the brute-force policy enumerator used as a test oracle.

use crate::error::MdpError;
use crate::mdp::{ensure_valid, StateId, TabularMdp};
use crate::tables::{argmax_lowest, Policy, QTable, ValueTable};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 100_000;
/// Largest `num_actions^num_states` that [`brute_force_optimal`] will enumerate.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIterationResult {
    pub values: ValueTable,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm change of each sweep, in order.
    pub deltas: Vec<f64>,
}

/// Synchronous value iteration, stopping once a sweep changes no value by
/// `tol` or more.
pub fn value_iteration(mdp: &TabularMdp, tol: f64, max_iters: usize) -> Result<ValueIterationResult, MdpError> {
    ensure_valid(mdp)?;
    let n = mdp.num_states();
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut deltas = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            next[s] = if mdp.is_terminal(s) {
                0.0
            } else {
                (0..mdp.num_actions())
                    .map(|a| mdp.backup(s, a, &v))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            delta = delta.max((next[s] - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        deltas.push(delta);
        if delta < tol {
            converged = true;
            break;
        }
        if !delta.is_finite() {
            break;
        }
    }

    Ok(ValueIterationResult {
        values: ValueTable::new(v),
        converged,
        iterations: deltas.len(),
        deltas,
    })
}

/// Argmax of the one-step backup, lowest action id on ties; terminals map to 0.
pub fn greedy_policy(mdp: &TabularMdp, v: &ValueTable) -> Result<Policy, MdpError> {
    check_len(mdp, v)?;
    let actions = (0..mdp.num_states())
        .map(|s| {
            if mdp.is_terminal(s) {
                0
            } else {
                let backed: Vec<f64> = (0..mdp.num_actions()).map(|a| mdp.backup(s, a, &v.values)).collect();
                argmax_lowest(&backed)
            }
        })
        .collect();
    Ok(Policy::new(actions))
}

pub fn q_from_v(mdp: &TabularMdp, v: &ValueTable) -> Result<QTable, MdpError> {
    ensure_valid(mdp)?;
    check_len(mdp, v)?;
    let mut q = QTable::zeros(mdp.num_states(), mdp.num_actions());
    for s in (0..mdp.num_states()).filter(|&s| !mdp.is_terminal(s)) {
        for a in 0..mdp.num_actions() {
            q.set(s, a, mdp.backup(s, a, &v.values));
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluation {
    pub values: ValueTable,
    pub converged: bool,
    pub iterations: usize,
}

/// Iterative evaluation of a fixed policy's Bellman operator.
pub fn policy_evaluation(
    mdp: &TabularMdp,
    policy: &Policy,
    tol: f64,
    max_iters: usize,
) -> Result<PolicyEvaluation, MdpError> {
    ensure_valid(mdp)?;
    policy.check(mdp)?;
    let n = mdp.num_states();
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for s in 0..n {
            next[s] = if mdp.is_terminal(s) {
                0.0
            } else {
                mdp.backup(s, policy.action(s), &v)
            };
            delta = delta.max((next[s] - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        if delta < tol {
            converged = true;
            break;
        }
        if !delta.is_finite() {
            break;
        }
    }
    Ok(PolicyEvaluation {
        values: ValueTable::new(v),
        converged,
        iterations,
    })
}

/// Solves `(I - gamma P_pi) v = r_pi` over the non-terminal states by
/// Gaussian elimination. Returns `None` when the system is singular, which
/// for `gamma = 1` means the policy never reaches a terminal from some state.
pub fn policy_evaluation_exact(mdp: &TabularMdp, policy: &Policy) -> Result<Option<ValueTable>, MdpError> {
    ensure_valid(mdp)?;
    policy.check(mdp)?;
    let n = mdp.num_states();
    let free: Vec<StateId> = (0..n).filter(|&s| !mdp.is_terminal(s)).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &s) in free.iter().enumerate() {
        index[s] = i;
    }
    let m = free.len();
    // Augmented matrix [A | b], row-major with m + 1 columns.
    let mut a = vec![0.0; m * (m + 1)];
    for (i, &s) in free.iter().enumerate() {
        a[i * (m + 1) + i] += 1.0;
        for t in mdp.transitions(s, policy.action(s)) {
            a[i * (m + 1) + m] += t.probability * t.reward;
            if !mdp.is_terminal(t.next) {
                a[i * (m + 1) + index[t.next]] -= mdp.gamma() * t.probability;
            }
        }
    }

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * (m + 1) + col].abs().total_cmp(&a[y * (m + 1) + col].abs()))
            .unwrap();
        if a[pivot * (m + 1) + col].abs() < 1e-12 {
            return Ok(None);
        }
        if pivot != col {
            for k in 0..=m {
                a.swap(pivot * (m + 1) + k, col * (m + 1) + k);
            }
        }
        let p = a[col * (m + 1) + col];
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = a[row * (m + 1) + col] / p;
            if factor != 0.0 {
                for k in col..=m {
                    a[row * (m + 1) + k] -= factor * a[col * (m + 1) + k];
                }
            }
        }
    }

    let mut values = vec![0.0; n];
    for (i, &s) in free.iter().enumerate() {
        values[s] = a[i * (m + 1) + m] / a[i * (m + 1) + i];
    }
    Ok(Some(ValueTable::new(values)))
}

/// Enumerates every deterministic policy and keeps the one with the highest
/// initial-state value (first found on ties).
///
/// Each candidate is evaluated by a direct linear solve; singular systems
/// (improper policies under `gamma = 1`) fall back to iterative evaluation
/// and are skipped if that does not converge.
pub fn brute_force_optimal(mdp: &TabularMdp) -> Result<(Policy, ValueTable), MdpError> {
    ensure_valid(mdp)?;
    let n = mdp.num_states();
    let k = mdp.num_actions();
    let too_large = MdpError::EnumerationTooLarge {
        states: n,
        actions: k,
        limit: ENUMERATION_LIMIT,
    };
    u32::try_from(n)
        .ok()
        .and_then(|e| (k as u64).checked_pow(e))
        .filter(|&c| c <= ENUMERATION_LIMIT)
        .ok_or(too_large)?;

    let free: Vec<StateId> = (0..n).filter(|&s| !mdp.is_terminal(s)).collect();
    let mut digits = vec![0usize; free.len()];
    let mut best: Option<(Policy, ValueTable)> = None;
    let s0 = mdp.initial_state();

    loop {
        let mut actions = vec![0; n];
        for (&s, &a) in free.iter().zip(&digits) {
            actions[s] = a;
        }
        let policy = Policy::new(actions);
        let values = match policy_evaluation_exact(mdp, &policy)? {
            Some(v) => Some(v),
            None => {
                let eval = policy_evaluation(mdp, &policy, 1e-12, DEFAULT_MAX_ITERS)?;
                eval.converged.then_some(eval.values)
            }
        };
        if let Some(values) = values {
            let better = match &best {
                None => true,
                Some((_, b)) => values[s0] > b[s0],
            };
            if better {
                best = Some((policy, values));
            }
        }

        // Odometer increment over the non-terminal action choices.
        let mut i = 0;
        loop {
            if i == digits.len() {
                return best.ok_or(MdpError::Invalid(Default::default()));
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

fn check_len(mdp: &TabularMdp, v: &ValueTable) -> Result<(), MdpError> {
    if v.len() != mdp.num_states() {
        return Err(MdpError::SizeMismatch {
            expected: mdp.num_states(),
            got: v.len(),
        });
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::fixtures::chain;
    use super::*;

    #[test]
    fn chain_value_is_the_undiscounted_immediate_reward() {
        let r = value_iteration(&chain(0.9), DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS).unwrap();
        assert!(r.converged);
        assert_eq!(r.values.values, vec![1.0, 0.0]);
    }

    #[test]
    fn two_step_undiscounted_loop() {
        let mut m = TabularMdp::new(3, 1, 1.0, 0);
        m.add_transition(0, 0, 1, 1.0, -1.0);
        m.add_transition(1, 0, 2, 1.0, -1.0);
        m.make_absorbing(2);
        let r = value_iteration(&m, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS).unwrap();
        assert!(r.converged);
        assert_eq!(r.values[0], -2.0);
        assert_eq!(r.values[2], 0.0);
    }

    #[test]
    fn undiscounted_divergence_is_flagged() {
        // Only action loops between two non-terminal states forever.
        let mut m = TabularMdp::new(3, 1, 1.0, 0);
        m.add_transition(0, 0, 1, 1.0, -1.0);
        m.add_transition(1, 0, 0, 1.0, -1.0);
        m.make_absorbing(2);
        let r = value_iteration(&m, 1e-9, 500).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 500);

        let eval = policy_evaluation(&m, &Policy::uniform(3, 0), 1e-9, 500).unwrap();
        assert!(!eval.converged);
        assert_eq!(policy_evaluation_exact(&m, &Policy::uniform(3, 0)).unwrap(), None);
    }

    #[test]
    fn greedy_ties_go_to_lowest_action() {
        let mut m = TabularMdp::new(2, 2, 0.9, 0);
        m.add_transition(0, 0, 1, 1.0, 1.0);
        m.add_transition(0, 1, 1, 1.0, 1.0);
        m.make_absorbing(1);
        let p = greedy_policy(&m, &ValueTable::zeros(2)).unwrap();
        assert_eq!(p.actions, vec![0, 0]);
    }

    #[test]
    fn greedy_picks_argmax() {
        let mut m = TabularMdp::new(2, 3, 0.9, 0);
        for (a, r) in [-1.0, 0.0, -2.0].into_iter().enumerate() {
            m.add_transition(0, a, 1, 1.0, r);
        }
        m.make_absorbing(1);
        assert_eq!(greedy_policy(&m, &ValueTable::zeros(2)).unwrap().action(0), 1);
        let v = value_iteration(&chain(0.9), 1e-9, 100).unwrap().values;
        assert_eq!(greedy_policy(&chain(0.9), &v).unwrap().action(0), 0);
    }

    #[test]
    fn policy_evaluation_on_chain() {
        let m = chain(0.9);
        let e = policy_evaluation(&m, &Policy::uniform(2, 0), 1e-9, 100).unwrap();
        assert!(e.converged);
        assert_eq!(e.values.values, vec![1.0, 0.0]);
        let exact = policy_evaluation_exact(&m, &Policy::uniform(2, 0)).unwrap().unwrap();
        assert_eq!(exact.values, vec![1.0, 0.0]);
    }

    #[test]
    fn q_backups() {
        let m = chain(0.9);
        let v = value_iteration(&m, 1e-9, 100).unwrap().values;
        let q = q_from_v(&m, &v).unwrap();
        assert_eq!(q.get(0, 0), 1.0);
        assert_eq!(q.row(1), &[0.0]);

        let mut m = TabularMdp::new(3, 1, 0.5, 0);
        m.add_transition(0, 0, 1, 1.0, 2.0);
        m.add_transition(1, 0, 2, 1.0, 0.0);
        m.make_absorbing(2);
        let q = q_from_v(&m, &ValueTable::new(vec![0.0, 3.0, 0.0])).unwrap();
        assert_eq!(q.get(0, 0), 3.5);
    }

    #[test]
    fn brute_force_matches_chain_and_trivial() {
        let (p, v) = brute_force_optimal(&chain(0.9)).unwrap();
        assert_eq!(p.actions, vec![0, 0]);
        assert_eq!(v[0], 1.0);

        let mut one = TabularMdp::new(1, 1, 0.9, 0);
        one.make_absorbing(0);
        let (_, v) = brute_force_optimal(&one).unwrap();
        assert_eq!(v.values, vec![0.0]);
    }

    #[test]
    fn brute_force_guard() {
        let mut m = TabularMdp::new(13, 3, 0.9, 0);
        for s in 0..12 {
            for a in 0..3 {
                m.add_transition(s, a, 12, 1.0, 0.0);
            }
        }
        m.make_absorbing(12);
        // 3^13 > 10^6
        assert!(matches!(
            brute_force_optimal(&m),
            Err(MdpError::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn solvers_refuse_invalid_input() {
        let mut m = TabularMdp::new(2, 1, 0.9, 0);
        m.add_transition(0, 0, 1, 0.5, 0.0);
        m.make_absorbing(1);
        assert!(matches!(value_iteration(&m, 1e-9, 10), Err(MdpError::Invalid(_))));
    }
}
