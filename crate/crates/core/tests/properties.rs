use considerate_core::generate::random_mdp;
use considerate_core::gridworld::{flower_garden_map, ACTION_NAMES};
use considerate_core::simulate::sample_next;
use considerate_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = TabularMdp> {
    (any::<u64>(), 2usize..=5, 1usize..=3, 0.3f64..0.95).prop_map(|(seed, n, k, g)| random_mdp(seed, n, k, g))
}

fn table(n: usize) -> impl Strategy<Value = ValueTable> {
    prop::collection::vec(-50.0f64..50.0, n).prop_map(ValueTable::new)
}

fn distribution(n: usize) -> impl Strategy<Value = ValueFunctionDistribution> {
    prop::collection::vec((table(n), 0.01f64..1.0), 1..5).prop_map(|entries| {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        let k = entries.len();
        let mut assigned = 0.0;
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, (t, w))| {
                let p = if i + 1 == k { 1.0 - assigned } else { w / total };
                assigned += p;
                (t, p)
            })
            .collect();
        ValueFunctionDistribution::new(entries).unwrap()
    })
}

proptest! {
    #[test]
    fn value_iteration_matches_enumeration(mdp in instance()) {
        let vi = value_iteration(&mdp, 1e-10, 100_000).unwrap();
        prop_assert!(vi.converged);
        let (_, oracle) = brute_force_optimal(&mdp).unwrap();
        let s0 = mdp.initial_state();
        prop_assert!((vi.values[s0] - oracle[s0]).abs() <= 1e-6);
    }

    #[test]
    fn sweep_deltas_never_grow(mdp in instance()) {
        let vi = value_iteration(&mdp, 1e-12, 100_000).unwrap();
        for w in vi.deltas[1..].windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15, "deltas {:?}", vi.deltas);
        }
    }

    #[test]
    fn greedy_policy_evaluates_to_the_optimum(mdp in instance()) {
        let tol = 1e-9;
        let vi = value_iteration(&mdp, tol, 100_000).unwrap();
        let pi = greedy_policy(&mdp, &vi.values).unwrap();
        let eval = policy_evaluation(&mdp, &pi, tol, 100_000).unwrap();
        prop_assert!(eval.converged);
        // Both tables sit within gamma/(1-gamma) * tol of the fixed point.
        let slack = 10.0 * tol / (1.0 - mdp.gamma());
        prop_assert!(eval.values.sup_distance(&vi.values) <= slack);
    }

    #[test]
    fn terminals_absorb(mdp in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in mdp.terminal_states() {
            for a in 0..mdp.num_actions() {
                let next = sample_next(&mdp, t, a, &mut rng);
                prop_assert_eq!(next.next, t);
                prop_assert_eq!(next.reward, 0.0);
            }
        }
        let policy = Policy::new((0..mdp.num_states()).map(|s| (s * 7 + seed as usize) % mdp.num_actions()).collect());
        let traj = simulate(&mdp, &policy, 50, seed).unwrap();
        if let Some(pos) = traj.steps.iter().position(|s| mdp.is_terminal(s.next_state)) {
            prop_assert_eq!(pos + 1, traj.len());
        }
    }

    #[test]
    fn aggregators_are_dominated_by_expectation(dist in distribution(4), s in 0usize..4, s0 in 0usize..4) {
        let e = f_expected(&dist, s).unwrap();
        // Rounding in the weighted sum can shave an ulp off the mean.
        let slack = 1e-12 * (1.0 + e.abs());
        prop_assert!(f_worst_case(&dist, s).unwrap() <= e + slack);
        prop_assert!(f_penalize_negative(&dist, s, s0).unwrap() <= e + slack);
        prop_assert_eq!(f_penalize_negative(&dist, s0, s0).unwrap(), f_expected(&dist, s0).unwrap());
    }

    #[test]
    fn weighted_sum_scales(values in prop::collection::vec(-10.0f64..10.0, 1..6), c in 0.1f64..10.0) {
        let caring: Vec<f64> = (0..values.len()).map(|i| 0.5 + i as f64).collect();
        let scaled: Vec<f64> = caring.iter().map(|a| a * c).collect();
        let base = social_welfare(&values, &caring, &SocialWelfareSpec::WeightedSum).unwrap();
        let up = social_welfare(&values, &scaled, &SocialWelfareSpec::WeightedSum).unwrap();
        prop_assert!((up - c * base).abs() <= 1e-9 * (1.0 + up.abs()));
    }

    #[test]
    fn adding_a_state_never_lowers_the_agency_bonus(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..10, 0..10), 1..6),
        which in any::<prop::sample::Index>(),
        s in 0usize..10,
    ) {
        let before = InitiationDistribution::uniform(sets.clone()).unwrap();
        let mut grown = sets.clone();
        let i = which.index(grown.len());
        grown[i].insert(s);
        let after = InitiationDistribution::uniform(grown).unwrap();
        prop_assert!(option_agency_bonus(&after, s) >= option_agency_bonus(&before, s));
    }

    #[test]
    fn unit_values_reduce_to_the_agency_bonus(
        sets in prop::collection::vec(prop::collection::btree_set(0usize..8, 0..8), 1..6),
        s in 0usize..8,
    ) {
        let indicator = InitiationDistribution::uniform(sets.clone()).unwrap();
        let p = 1.0 / sets.len() as f64;
        let ones = OptionValueDistribution::new(
            sets.into_iter().map(|set| ((set, ValueTable::new(vec![1.0; 8])), p)).collect(),
        ).unwrap();
        prop_assert_eq!(option_value_bonus(&ones, s).unwrap(), option_agency_bonus(&indicator, s));
    }

    #[test]
    fn garden_flags_are_monotone(actions in prop::collection::vec(0usize..ACTION_NAMES.len(), 1..60)) {
        let map = flower_garden_map();
        let world = FlowerWorld::new(map.clone());
        let mdp = compile_flower_world(&map, &ScenarioConfig::default()).unwrap();
        let mut s = mdp.initial_state();
        for a in actions {
            if mdp.is_terminal(s) {
                break;
            }
            let next = mdp.transitions(s, a)[0].next;
            let (from, to) = (world.decode(s).unwrap(), world.decode(next).unwrap());
            prop_assert!(from.flowers_intact || !to.flowers_intact);
            prop_assert!(!from.fence_built || to.fence_built);
            s = next;
        }
    }
}

#[test]
fn argmax_is_invariant_to_positive_scaling_of_all_weights() {
    let map = flower_garden_map();
    for alpha_alice in [0.0, 1.0, 10.0] {
        let cfg = ScenarioConfig {
            alpha_alice,
            ..ScenarioConfig::default()
        };
        let sc = build_scenario(&map, &cfg).unwrap();
        let solve = |c: f64| {
            let agents: Vec<_> = sc
                .agents
                .iter()
                .map(|a| a.with_caring_coefficient(a.caring_coefficient() * c).unwrap())
                .collect();
            let aug = augment_mdp_per_agent(&sc.mdp, &agents, &SocialWelfareSpec::WeightedSum, c).unwrap();
            let vi = value_iteration(&aug, 1e-9, 100_000).unwrap();
            let pi = greedy_policy(&aug, &vi.values).unwrap();
            simulate(&aug, &pi, 500, 0).unwrap().states()
        };
        assert_eq!(solve(1.0), solve(3.0));
    }
}
