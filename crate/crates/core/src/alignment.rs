//! Reward augmentation from distributions over other agents' value functions.
//!
//! The acting agent's reward is scaled by `alpha1`; on entering a terminal
//! state `s'` it additionally receives `gamma * alpha2 * F(s')`, where `F`
//! aggregates the candidate value functions at `s'`. The per-agent variant
//! replaces `alpha2 * F` with a social welfare function over each agent's
//! expected value.

use serde::{Deserialize, Serialize};

use crate::error::MdpError;
use crate::mdp::{StateId, TabularMdp, PROBABILITY_TOLERANCE};
use crate::tables::ValueTable;

/// A finite set of candidate value tables with probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctionDistribution {
    entries: Vec<(ValueTable, f64)>,
}

pub(crate) fn check_probabilities<I: IntoIterator<Item = f64>>(probs: I) -> Result<(), MdpError> {
    let mut sum = 0.0;
    let mut any = false;
    for p in probs {
        any = true;
        if !(0.0..=1.0).contains(&p) {
            return Err(MdpError::BadProbability(p));
        }
        sum += p;
    }
    if !any {
        return Err(MdpError::EmptyDistribution);
    }
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(MdpError::NotADistribution(sum));
    }
    Ok(())
}

impl ValueFunctionDistribution {
    pub fn new(entries: Vec<(ValueTable, f64)>) -> Result<Self, MdpError> {
        check_probabilities(entries.iter().map(|e| e.1))?;
        let n = entries[0].0.len();
        if let Some((t, _)) = entries.iter().find(|(t, _)| t.len() != n) {
            return Err(MdpError::SizeMismatch {
                expected: n,
                got: t.len(),
            });
        }
        Ok(ValueFunctionDistribution { entries })
    }

    pub fn singleton(table: ValueTable) -> Self {
        ValueFunctionDistribution {
            entries: vec![(table, 1.0)],
        }
    }

    /// Equal probability on every table.
    pub fn uniform(tables: Vec<ValueTable>) -> Result<Self, MdpError> {
        let n = tables.len() as f64;
        Self::new(tables.into_iter().map(|t| (t, 1.0 / n)).collect())
    }

    pub fn entries(&self) -> &[(ValueTable, f64)] {
        &self.entries
    }

    pub fn num_states(&self) -> usize {
        self.entries[0].0.len()
    }
}

/// Probability-weighted mean of `V(state)`.
pub fn f_expected(dist: &ValueFunctionDistribution, state: StateId) -> Result<f64, MdpError> {
    dist.entries
        .iter()
        .try_fold(0.0, |acc, (v, p)| Ok(acc + p * v.get(state)?))
}

/// Smallest `V(state)` among tables with positive probability.
pub fn f_worst_case(dist: &ValueFunctionDistribution, state: StateId) -> Result<f64, MdpError> {
    let mut worst: Option<f64> = None;
    for (v, p) in &dist.entries {
        if *p > 0.0 {
            let x = v.get(state)?;
            worst = Some(worst.map_or(x, |w| w.min(x)));
        }
    }
    worst.ok_or(MdpError::NoPositiveMass)
}

/// Expected `min(V(state), V(initial))`: losses relative to the initial
/// state count, gains do not.
pub fn f_penalize_negative(
    dist: &ValueFunctionDistribution,
    state: StateId,
    initial: StateId,
) -> Result<f64, MdpError> {
    dist.entries
        .iter()
        .try_fold(0.0, |acc, (v, p)| Ok(acc + p * v.get(state)?.min(v.get(initial)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Expected,
    WorstCase,
    PenalizeNegativeChange,
}

impl Aggregator {
    pub fn evaluate(self, dist: &ValueFunctionDistribution, state: StateId, initial: StateId) -> Result<f64, MdpError> {
        match self {
            Aggregator::Expected => f_expected(dist, state),
            Aggregator::WorstCase => f_worst_case(dist, state),
            Aggregator::PenalizeNegativeChange => f_penalize_negative(dist, state, initial),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedRewardSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub aggregator: Aggregator,
}

/// One agent (or subgroup) with its own value-function distribution and
/// caring coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentValueModel {
    pub agent_id: usize,
    pub name: String,
    distribution: ValueFunctionDistribution,
    caring_coefficient: f64,
}

impl AgentValueModel {
    pub fn new(
        agent_id: usize,
        name: impl Into<String>,
        distribution: ValueFunctionDistribution,
        caring_coefficient: f64,
    ) -> Result<Self, MdpError> {
        if !caring_coefficient.is_finite() || caring_coefficient < 0.0 {
            return Err(MdpError::BadCaringCoefficient(caring_coefficient));
        }
        Ok(AgentValueModel {
            agent_id,
            name: name.into(),
            distribution,
            caring_coefficient,
        })
    }

    pub fn distribution(&self) -> &ValueFunctionDistribution {
        &self.distribution
    }

    pub fn caring_coefficient(&self) -> f64 {
        self.caring_coefficient
    }

    pub fn with_caring_coefficient(&self, alpha: f64) -> Result<Self, MdpError> {
        Self::new(self.agent_id, self.name.clone(), self.distribution.clone(), alpha)
    }

    /// `sum_j P(V_ij) V_j(state)`.
    pub fn expected_value(&self, state: StateId) -> Result<f64, MdpError> {
        f_expected(&self.distribution, state)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SocialWelfareSpec {
    /// `sum_i alpha_i e_i`.
    WeightedSum,
    /// `min_i e_i`.
    Maximin,
    /// `sum_k w_k x_(k)` over the ascending-sorted expected values.
    GeneralizedGini { weights: Vec<f64> },
}

impl SocialWelfareSpec {
    /// Generalized Gini with `w_k = (2(n - k) + 1) / n^2`, `k = 1..=n`.
    pub fn classic_gini(n: usize) -> Self {
        SocialWelfareSpec::GeneralizedGini {
            weights: classic_gini_weights(n),
        }
    }
}

pub fn classic_gini_weights(n: usize) -> Vec<f64> {
    let n2 = (n * n) as f64;
    (1..=n).map(|k| (2 * (n - k) + 1) as f64 / n2).collect()
}

fn check_gini_weights(weights: &[f64], n: usize) -> Result<(), MdpError> {
    if weights.len() != n {
        return Err(MdpError::GiniWeightCount {
            expected: n,
            got: weights.len(),
        });
    }
    let ok = weights.iter().all(|w| w.is_finite() && *w >= 0.0) && weights.windows(2).all(|w| w[0] >= w[1]);
    if ok {
        Ok(())
    } else {
        Err(MdpError::GiniWeightsNotDecreasing)
    }
}

/// Social welfare of already-computed per-agent expected values.
pub fn social_welfare(expected: &[f64], caring: &[f64], spec: &SocialWelfareSpec) -> Result<f64, MdpError> {
    if expected.is_empty() {
        return Err(MdpError::NoAgents);
    }
    match spec {
        SocialWelfareSpec::WeightedSum => Ok(expected.iter().zip(caring).map(|(e, a)| a * e).sum()),
        SocialWelfareSpec::Maximin => Ok(expected.iter().copied().fold(f64::INFINITY, f64::min)),
        SocialWelfareSpec::GeneralizedGini { weights } => {
            check_gini_weights(weights, expected.len())?;
            let mut sorted = expected.to_vec();
            sorted.sort_by(f64::total_cmp);
            Ok(sorted.iter().zip(weights).map(|(x, w)| w * x).sum())
        }
    }
}

pub fn swf_value(models: &[AgentValueModel], spec: &SocialWelfareSpec, state: StateId) -> Result<f64, MdpError> {
    let expected = models
        .iter()
        .map(|m| m.expected_value(state))
        .collect::<Result<Vec<_>, _>>()?;
    let caring: Vec<f64> = models.iter().map(|m| m.caring_coefficient).collect();
    social_welfare(&expected, &caring, spec)
}

fn check_states(base: &TabularMdp, n: usize) -> Result<(), MdpError> {
    if n != base.num_states() {
        return Err(MdpError::SizeMismatch {
            expected: base.num_states(),
            got: n,
        });
    }
    Ok(())
}

/// Builds the MDP whose reward is `alpha1 * r1`, plus
/// `gamma * alpha2 * F(s')` on entry to a terminal state `s'`.
pub fn augment_mdp(
    base: &TabularMdp,
    dist: &ValueFunctionDistribution,
    spec: &AlignedRewardSpec,
) -> Result<TabularMdp, MdpError> {
    crate::mdp::ensure_valid(base)?;
    check_states(base, dist.num_states())?;
    let s0 = base.initial_state();
    let scale = base.gamma() * spec.alpha2;
    base.reshape_terminal_entry(spec.alpha1, |s| Ok(scale * spec.aggregator.evaluate(dist, s, s0)?))
}

/// Builds the MDP whose reward is `alpha1 * r1`, plus
/// `gamma * SWF(e_1(s'), ..., e_n(s'))` on entry to a terminal state `s'`.
pub fn augment_mdp_per_agent(
    base: &TabularMdp,
    models: &[AgentValueModel],
    swf: &SocialWelfareSpec,
    alpha1: f64,
) -> Result<TabularMdp, MdpError> {
    crate::mdp::ensure_valid(base)?;
    if models.is_empty() {
        return Err(MdpError::NoAgents);
    }
    for m in models {
        check_states(base, m.distribution.num_states())?;
    }
    if let SocialWelfareSpec::GeneralizedGini { weights } = swf {
        check_gini_weights(weights, models.len())?;
    }
    let gamma = base.gamma();
    base.reshape_terminal_entry(alpha1, |s| Ok(gamma * swf_value(models, swf, s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::validate_mdp;
    use crate::solve::fixtures::chain;

    fn at(value: f64) -> ValueTable {
        ValueTable::new(vec![value])
    }

    fn dist(entries: &[(f64, f64)]) -> ValueFunctionDistribution {
        ValueFunctionDistribution::new(entries.iter().map(|&(v, p)| (at(v), p)).collect()).unwrap()
    }

    #[test]
    fn expectation() {
        assert_eq!(f_expected(&dist(&[(2.0, 0.5), (4.0, 0.5)]), 0).unwrap(), 3.0);
        assert_eq!(f_expected(&dist(&[(-7.0, 1.0)]), 0).unwrap(), -7.0);
        assert_eq!(f_expected(&dist(&[(0.0, 0.25), (8.0, 0.75)]), 0).unwrap(), 6.0);
    }

    #[test]
    fn worst_case_skips_impossible_tables() {
        let d = dist(&[(5.0, 0.7), (-1.0, 0.3), (-100.0, 0.0)]);
        assert_eq!(f_worst_case(&d, 0).unwrap(), -1.0);
        assert_eq!(f_worst_case(&dist(&[(3.5, 1.0)]), 0).unwrap(), 3.5);
        assert_eq!(f_worst_case(&dist(&[(2.0, 0.5), (2.0, 0.5)]), 0).unwrap(), 2.0);
    }

    #[test]
    fn worst_case_needs_positive_mass() {
        // Construction rejects a zero-mass distribution, so build one by hand.
        let d = ValueFunctionDistribution {
            entries: vec![(at(1.0), 0.0)],
        };
        assert!(matches!(f_worst_case(&d, 0), Err(MdpError::NoPositiveMass)));
    }

    #[test]
    fn penalize_negative_change() {
        let two = |a: f64, b: f64| ValueTable::new(vec![a, b]);
        // state 0 = s', state 1 = s0
        let single = |s_prime, s0| ValueFunctionDistribution::singleton(two(s_prime, s0));
        assert_eq!(f_penalize_negative(&single(5.0, 3.0), 0, 1).unwrap(), 3.0);
        assert_eq!(f_penalize_negative(&single(1.0, 3.0), 0, 1).unwrap(), 1.0);
        let d = ValueFunctionDistribution::new(vec![(two(0.0, 2.0), 0.5), (two(4.0, 1.0), 0.5)]).unwrap();
        assert_eq!(f_penalize_negative(&d, 0, 1).unwrap(), 0.5);
    }

    #[test]
    fn distribution_checks() {
        assert!(matches!(
            ValueFunctionDistribution::new(vec![(at(1.0), 0.5)]),
            Err(MdpError::NotADistribution(_))
        ));
        assert!(matches!(
            ValueFunctionDistribution::new(vec![]),
            Err(MdpError::EmptyDistribution)
        ));
        assert!(matches!(
            ValueFunctionDistribution::new(vec![(at(1.0), 0.5), (ValueTable::zeros(2), 0.5)]),
            Err(MdpError::SizeMismatch { .. })
        ));
        assert!(matches!(
            AgentValueModel::new(0, "x", dist(&[(1.0, 1.0)]), -1.0),
            Err(MdpError::BadCaringCoefficient(_))
        ));
    }

    fn agents(values: &[f64], alphas: &[f64]) -> Vec<AgentValueModel> {
        values
            .iter()
            .zip(alphas)
            .enumerate()
            .map(|(i, (&v, &a))| AgentValueModel::new(i, format!("a{i}"), dist(&[(v, 1.0)]), a).unwrap())
            .collect()
    }

    #[test]
    fn welfare_functions() {
        let ws = swf_value(&agents(&[2.0, 5.0], &[1.0, 1.0]), &SocialWelfareSpec::WeightedSum, 0);
        assert_eq!(ws.unwrap(), 7.0);
        let mm = swf_value(&agents(&[2.0, 5.0, 1.0], &[1.0; 3]), &SocialWelfareSpec::Maximin, 0);
        assert_eq!(mm.unwrap(), 1.0);
        assert_eq!(classic_gini_weights(2), vec![0.75, 0.25]);
        let g = swf_value(&agents(&[10.0, 0.0], &[1.0; 2]), &SocialWelfareSpec::classic_gini(2), 0);
        assert_eq!(g.unwrap(), 2.5);
    }

    #[test]
    fn gini_weight_errors() {
        let models = agents(&[1.0, 2.0], &[1.0; 2]);
        let three = SocialWelfareSpec::GeneralizedGini {
            weights: vec![0.5, 0.3, 0.2],
        };
        assert!(matches!(
            swf_value(&models, &three, 0),
            Err(MdpError::GiniWeightCount { .. })
        ));
        let rising = SocialWelfareSpec::GeneralizedGini {
            weights: vec![0.2, 0.8],
        };
        assert!(matches!(
            swf_value(&models, &rising, 0),
            Err(MdpError::GiniWeightsNotDecreasing)
        ));
    }

    #[test]
    fn augmentation_into_terminal() {
        let base = chain(0.9);
        let f = ValueFunctionDistribution::singleton(ValueTable::new(vec![0.0, 10.0]));
        let spec = AlignedRewardSpec {
            alpha1: 0.0,
            alpha2: 1.0,
            aggregator: Aggregator::Expected,
        };
        let aug = augment_mdp(&base, &f, &spec).unwrap();
        assert!((aug.transitions(0, 0)[0].reward - 9.0).abs() < 1e-12);
        assert!(validate_mdp(&aug).is_valid());

        let spec = AlignedRewardSpec {
            alpha1: 1.0,
            alpha2: 0.0,
            aggregator: Aggregator::WorstCase,
        };
        assert_eq!(augment_mdp(&base, &f, &spec).unwrap(), base);
    }

    #[test]
    fn non_terminal_transitions_only_scale() {
        let mut m = TabularMdp::new(3, 1, 0.9, 0);
        m.add_transition(0, 0, 1, 1.0, -1.0);
        m.add_transition(1, 0, 2, 1.0, 0.0);
        m.make_absorbing(2);
        let f = ValueFunctionDistribution::singleton(ValueTable::new(vec![100.0, 100.0, 100.0]));
        let spec = AlignedRewardSpec {
            alpha1: 2.0,
            alpha2: 5.0,
            aggregator: Aggregator::Expected,
        };
        let aug = augment_mdp(&m, &f, &spec).unwrap();
        assert_eq!(aug.transitions(0, 0)[0].reward, -2.0);
    }

    #[test]
    fn per_agent_terminal_bonus() {
        let mut m = TabularMdp::new(2, 1, 1.0, 0);
        m.add_transition(0, 0, 1, 1.0, -1.0);
        m.make_absorbing(1);
        let table = |v: f64| ValueFunctionDistribution::singleton(ValueTable::new(vec![0.0, v]));
        let models = vec![
            AgentValueModel::new(2, "alice", table(-20.0), 1.0).unwrap(),
            AgentValueModel::new(3, "bob", table(0.0), 1.0).unwrap(),
        ];
        for swf in [SocialWelfareSpec::WeightedSum, SocialWelfareSpec::Maximin] {
            let aug = augment_mdp_per_agent(&m, &models, &swf, 1.0).unwrap();
            assert_eq!(aug.transitions(0, 0)[0].reward, -1.0 - 20.0);
        }
        let zeroed: Vec<_> = models.iter().map(|m| m.with_caring_coefficient(0.0).unwrap()).collect();
        let aug = augment_mdp_per_agent(&m, &zeroed, &SocialWelfareSpec::WeightedSum, 3.0).unwrap();
        assert_eq!(aug.transitions(0, 0)[0].reward, -3.0);
    }
}
