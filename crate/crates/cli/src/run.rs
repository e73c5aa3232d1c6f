//! Builds, augments, solves and rolls out one configured experiment.

use std::collections::BTreeMap;
use std::time::Instant;

use considerate_core::gridworld::{parse_map, GridLayout};
use considerate_core::kitchen::build_kitchen;
use considerate_core::solve::{value_iteration, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use considerate_core::{
    augment_mdp, augment_mdp_option_values_with, augment_mdp_options, augment_mdp_per_agent, build_scenario,
    greedy_policy, q_learning, simulate, validate_mdp, AgentValueModel, AlignedRewardSpec, InitiationDistribution,
    InitiationSet, OptionValueDistribution, Policy, QLearningConfig, SocialWelfareSpec, TabularMdp,
    ValueFunctionDistribution, ValueTable,
};
use log::{debug, info};
use rayon::prelude::*;

use crate::config::{AugmentationConfig, ExperimentConfig, SolverConfig, SwfConfig, World, SCHEMA_VERSION};
use crate::error::CliError;
use crate::result::{AgentValue, RunResult, SweepResult, SweepRow, TerminalInfo, TrajectoryStep};

/// A compiled world: the base MDP plus what the augmentations and the
/// renderer need from it.
pub struct PreparedWorld {
    pub base: TabularMdp,
    pub layout: Box<dyn GridLayout + Send + Sync>,
    pub agents: Vec<AgentValueModel>,
    pub initiation_sets: Vec<InitiationSet>,
}

pub fn prepare_world(config: &ExperimentConfig) -> Result<PreparedWorld, CliError> {
    let sc = &config.scenario;
    match config.world {
        World::FlowerGarden => {
            let path = config
                .map_path
                .as_ref()
                .ok_or_else(|| CliError::Parse("missing map_path".into()))?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let map = parse_map(&text)?;
            let scenario = build_scenario(&map, sc)?;
            let initiation_sets = scenario.world.initiation_sets().into_iter().map(|(_, s)| s).collect();
            Ok(PreparedWorld {
                base: scenario.mdp,
                layout: Box::new(scenario.world),
                agents: scenario.agents,
                initiation_sets,
            })
        }
        World::Kitchen => {
            let demo = build_kitchen(sc.step_reward, sc.gamma);
            let initiation_sets = demo.initiation.entries().iter().map(|(s, _)| s.clone()).collect();
            Ok(PreparedWorld {
                base: demo.mdp.clone(),
                layout: Box::new(demo),
                agents: Vec::new(),
                initiation_sets,
            })
        }
    }
}

fn expected_table(mdp: &TabularMdp, agent: &AgentValueModel) -> Result<ValueTable, CliError> {
    let values = (0..mdp.num_states())
        .map(|s| agent.expected_value(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ValueTable::new(values))
}

/// Applies the configured augmentation to the world's base MDP.
pub fn augment(config: &ExperimentConfig, world: &PreparedWorld) -> Result<TabularMdp, CliError> {
    let alpha1 = config.scenario.alpha_self;
    let base = &world.base;
    let mdp = match &config.augmentation {
        AugmentationConfig::None => base.map_rewards(|_, _, t| Ok(alpha1 * t.reward))?,
        AugmentationConfig::Aligned { aggregator, alpha2 } => {
            // Each agent's expected-value table is one equally likely hypothesis.
            let tables = world
                .agents
                .iter()
                .map(|a| expected_table(base, a))
                .collect::<Result<Vec<_>, _>>()?;
            if tables.is_empty() {
                return Err(CliError::Domain("aligned augmentation needs at least one agent".into()));
            }
            let dist = ValueFunctionDistribution::uniform(tables)?;
            augment_mdp(
                base,
                &dist,
                &AlignedRewardSpec {
                    alpha1,
                    alpha2: *alpha2,
                    aggregator: *aggregator,
                },
            )?
        }
        AugmentationConfig::PerAgent { swf } => {
            let spec = match swf {
                SwfConfig::WeightedSum => SocialWelfareSpec::WeightedSum,
                SwfConfig::Maximin => SocialWelfareSpec::Maximin,
                SwfConfig::GeneralizedGini { weights: Some(w) } => {
                    SocialWelfareSpec::GeneralizedGini { weights: w.clone() }
                }
                SwfConfig::GeneralizedGini { weights: None } => SocialWelfareSpec::classic_gini(world.agents.len()),
            };
            augment_mdp_per_agent(base, &world.agents, &spec, alpha1)?
        }
        AugmentationConfig::Options { alpha2 } => {
            let dist = InitiationDistribution::uniform(world.initiation_sets.clone())?;
            augment_mdp_options(base, &dist, alpha1, *alpha2)?
        }
        AugmentationConfig::OptionValues {
            alpha2,
            option_value,
            discount_bonus,
        } => {
            let p = 1.0 / world.initiation_sets.len() as f64;
            let table = ValueTable::new(vec![*option_value; base.num_states()]);
            let entries = world
                .initiation_sets
                .iter()
                .map(|s| ((s.clone(), table.clone()), p))
                .collect();
            let dist = OptionValueDistribution::new(entries)?;
            augment_mdp_option_values_with(base, &dist, alpha1, *alpha2, *discount_bonus)?
        }
    };
    let report = validate_mdp(&mdp);
    if !report.is_valid() {
        return Err(CliError::Domain(format!("augmented MDP is invalid: {report}")));
    }
    Ok(mdp)
}

/// Iterative evaluation of `policy` restricted to the states it can reach
/// from the initial state. States the policy never visits may loop forever
/// without affecting the start value.
fn evaluate_reachable(mdp: &TabularMdp, policy: &Policy) -> (f64, bool) {
    let n = mdp.num_states();
    let mut reachable = vec![false; n];
    let mut stack = vec![mdp.initial_state()];
    while let Some(s) = stack.pop() {
        if std::mem::replace(&mut reachable[s], true) {
            continue;
        }
        for t in mdp.transitions(s, policy.action(s)) {
            if t.probability > 0.0 && !reachable[t.next] {
                stack.push(t.next);
            }
        }
    }
    let states: Vec<usize> = (0..n).filter(|&s| reachable[s]).collect();
    let mut v = vec![0.0; n];
    for _ in 0..DEFAULT_MAX_ITERS {
        let mut delta = 0.0f64;
        let next: Vec<f64> = states.iter().map(|&s| mdp.backup(s, policy.action(s), &v)).collect();
        for (&s, x) in states.iter().zip(next) {
            delta = delta.max((x - v[s]).abs());
            v[s] = x;
        }
        if delta < DEFAULT_TOLERANCE {
            return (v[mdp.initial_state()], true);
        }
    }
    (v[mdp.initial_state()], false)
}

struct Solution {
    policy: Policy,
    converged: bool,
    iterations: usize,
    initial_value: f64,
    rollout_seed: u64,
}

fn solve(config: &ExperimentConfig, mdp: &TabularMdp) -> Result<Solution, CliError> {
    let s0 = mdp.initial_state();
    match &config.solver {
        SolverConfig::ValueIteration { tol, max_iters } => {
            let vi = value_iteration(mdp, *tol, *max_iters)?;
            let policy = greedy_policy(mdp, &vi.values)?;
            Ok(Solution {
                policy,
                converged: vi.converged,
                iterations: vi.iterations,
                initial_value: vi.values[s0],
                rollout_seed: 0,
            })
        }
        SolverConfig::QLearning {
            episodes,
            learning_rate,
            epsilon,
            seed,
            max_steps,
        } => {
            let q = q_learning(
                mdp,
                &QLearningConfig {
                    episodes: *episodes,
                    learning_rate: *learning_rate,
                    epsilon: *epsilon,
                    seed: *seed,
                    max_steps: *max_steps,
                },
            )?;
            let policy = q.greedy_policy(mdp);
            // Report what the learned policy actually earns, not its Q estimate.
            let (initial_value, converged) = evaluate_reachable(mdp, &policy);
            Ok(Solution {
                policy,
                converged,
                iterations: *episodes,
                initial_value,
                rollout_seed: *seed,
            })
        }
    }
}

/// Runs one experiment. A solver that fails to converge still yields a
/// result, with `converged = false`.
pub fn run(config: &ExperimentConfig) -> Result<RunResult, CliError> {
    let started = Instant::now();
    let world = prepare_world(config)?;
    let mdp = augment(config, &world)?;
    debug!(
        "augmented MDP: {} states, {} actions",
        mdp.num_states(),
        mdp.num_actions()
    );
    let sol = solve(config, &mdp)?;
    let traj = simulate(&mdp, &sol.policy, mdp.num_states(), sol.rollout_seed)?;

    let layout = &world.layout;
    let cell = |s: usize| {
        let (r, c) = layout.position(s);
        [r, c]
    };
    let trajectory = traj
        .steps
        .iter()
        .map(|st| TrajectoryStep {
            state: st.state,
            action: st.action,
            action_name: layout.action_name(st.action).to_string(),
            reward: st.reward,
            next_state: st.next_state,
            from: cell(st.state),
            to: cell(st.next_state),
        })
        .collect();
    let end = traj.final_state().unwrap_or(mdp.initial_state());
    let flags: BTreeMap<String, bool> = layout.flags(end).into_iter().collect();
    let agent_values = world
        .agents
        .iter()
        .map(|a| {
            Ok(AgentValue {
                agent_id: a.agent_id,
                name: a.name.clone(),
                caring_coefficient: a.caring_coefficient(),
                expected_value: a.expected_value(end)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    info!(
        "solved in {} iterations, value(s0) = {}, {} steps",
        sol.iterations,
        sol.initial_value,
        traj.len()
    );
    Ok(RunResult {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        grid: layout.grid_rows(),
        start: cell(mdp.initial_state()),
        converged: sol.converged,
        iterations: sol.iterations,
        initial_value: sol.initial_value,
        policy: sol.policy.actions.clone(),
        trajectory,
        discounted_return: traj.discounted_return,
        terminal: TerminalInfo {
            reached: mdp.is_terminal(end),
            state: end,
            flags,
        },
        agent_values,
        duration_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every sweep value in parallel. Rows come back sorted by value; a
/// failing row records its error and does not stop the others.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult, CliError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Parse("config has no [sweep] table".into()))?;
    let mut values = spec.values.clone();
    if values.iter().any(|v| v.is_nan()) {
        return Err(CliError::Parse("sweep values must not be NaN".into()));
    }
    values.sort_by(f64::total_cmp);
    let rows = values
        .par_iter()
        .map(|&value| {
            let outcome = config.with_parameter(&spec.parameter, value).and_then(|c| run(&c));
            match outcome {
                Ok(result) => SweepRow {
                    value,
                    result: Some(result),
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepResult {
        schema_version: SCHEMA_VERSION,
        parameter: spec.parameter.clone(),
        rows,
    })
}
