use thiserror::Error;

use crate::mdp::{StateId, ValidationReport};

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("invalid MDP:\n{0}")]
    Invalid(ValidationReport),
    #[error("table has {got} entries, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("state {0} is out of range")]
    StateOutOfRange(StateId),
    #[error("action {action} is out of range (MDP has {num_actions} actions)")]
    ActionOutOfRange { action: usize, num_actions: usize },
    #[error("brute-force enumeration of {actions}^{states} policies exceeds the limit of {limit}")]
    EnumerationTooLarge { states: usize, actions: usize, limit: u64 },
    #[error("gamma = 1 with no terminal state gives unbounded episodes")]
    UnboundedEpisodes,
    #[error("probabilities sum to {0}, expected 1")]
    NotADistribution(f64),
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("no entry has positive probability")]
    NoPositiveMass,
    #[error("caring coefficient {0} must be finite and non-negative")]
    BadCaringCoefficient(f64),
    #[error("expected {expected} Gini weights, got {got}")]
    GiniWeightCount { expected: usize, got: usize },
    #[error("Gini weights must be non-negative and non-increasing")]
    GiniWeightsNotDecreasing,
    #[error("no agent value models given")]
    NoAgents,
    #[error("start state {0} is not in the option's initiation set")]
    NotInInitiationSet(StateId),
    #[error("initiation set is empty")]
    EmptyInitiationSet,
    #[error("termination probability {0} is outside [0, 1]")]
    BadTermination(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("unknown character {ch:?} at ({row}, {col})")]
    UnknownCharacter { ch: char, row: usize, col: usize },
    #[error("map is empty")]
    Empty,
    #[error("row {row} has width {got}, expected {expected} (map must be rectangular)")]
    NotRectangular { row: usize, expected: usize, got: usize },
    #[error("map must contain exactly one '{glyph}', found {count}")]
    GlyphCount { glyph: char, count: usize },
    #[error("map must contain at most one '{glyph}', found {count}")]
    TooMany { glyph: char, count: usize },
    #[error("map has no flower cells")]
    NoFlowers,
    #[error("a fence was requested but the map has no fence site 'f'")]
    NoFenceSite,
    #[error("map has no bob start 'B'")]
    NoBob,
    #[error("exit is unreachable for bob")]
    ExitUnreachable,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}
