//! Considerate planning on tabular MDPs.
//!
//! An acting agent's reward is augmented on entry to terminal states with
//! an aggregate of other agents' value functions (their future welfare) or
//! of option initiation sets (their future agency). The crate provides the
//! MDP substrate and solvers, the augmentations, and gridworld scenarios
//! that exercise them.

pub mod alignment;
pub mod error;
pub mod generate;
pub mod gridworld;
pub mod kitchen;
pub mod learn;
pub mod mdp;
pub mod options;
pub mod simulate;
pub mod solve;
pub mod tables;

pub use alignment::{
    augment_mdp, augment_mdp_per_agent, f_expected, f_penalize_negative, f_worst_case, social_welfare, swf_value,
    AgentValueModel, Aggregator, AlignedRewardSpec, SocialWelfareSpec, ValueFunctionDistribution,
};
pub use error::{MapError, MdpError, ScenarioError};
pub use gridworld::{
    bob_predicted_path, build_agent_value_models, build_scenario, compile_flower_world, parse_map, FlowerScenario,
    FlowerWorld, FlowerWorldState, GridLayout, GridMap, ScenarioConfig,
};
pub use kitchen::{build_kitchen_options_demo, KitchenDemo};
pub use learn::{q_learning, QLearningConfig, Schedule};
pub use mdp::{validate_mdp, ActionId, StateId, TabularMdp, Transition, ValidationReport, Violation};
pub use options::{
    augment_mdp_option_values, augment_mdp_option_values_with, augment_mdp_options, execute_option,
    initiation_indicator, option_agency_bonus, option_value_bonus, InitiationDistribution, InitiationSet, OptionSpec,
    OptionValueDistribution,
};
pub use simulate::{simulate, simulate_from, Step, Trajectory};
pub use solve::{
    brute_force_optimal, greedy_policy, policy_evaluation, policy_evaluation_exact, q_from_v, value_iteration,
    ValueIterationResult,
};
pub use tables::{Policy, QTable, ValueTable};
