//! Tabular Q-learning with epsilon-greedy exploration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::MdpError;
use crate::mdp::{ensure_valid, TabularMdp};
use crate::simulate::{rng_from_seed, sample_next};
use crate::tables::QTable;

/// A scalar that may change over the course of training, indexed by episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    /// Linear interpolation from `start` at the first episode to `end` at the last.
    Linear {
        start: f64,
        end: f64,
    },
    /// `max(start * decay^episode, min)`.
    Exponential {
        start: f64,
        decay: f64,
        min: f64,
    },
}

impl Schedule {
    pub fn at(&self, episode: usize, episodes: usize) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Linear { start, end } => {
                if episodes <= 1 {
                    start
                } else {
                    let frac = episode as f64 / (episodes - 1) as f64;
                    start + (end - start) * frac
                }
            }
            Schedule::Exponential { start, decay, min } => {
                (start * decay.powi(episode.min(i32::MAX as usize) as i32)).max(min)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    pub episodes: usize,
    pub learning_rate: Schedule,
    pub epsilon: Schedule,
    pub seed: u64,
    /// Episode step cap.
    pub max_steps: usize,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig {
            episodes: 5_000,
            learning_rate: Schedule::Constant { value: 0.5 },
            epsilon: Schedule::Linear { start: 1.0, end: 0.05 },
            seed: 0,
            max_steps: 1_000,
        }
    }
}

/// Runs Q-learning from the initial state for `config.episodes` episodes.
///
/// Each episode ends on entry to a terminal state or after `max_steps`
/// transitions. Greedy choices break ties toward the lowest action id.
pub fn q_learning(mdp: &TabularMdp, config: &QLearningConfig) -> Result<QTable, MdpError> {
    ensure_valid(mdp)?;
    if mdp.gamma() >= 1.0 && !mdp.has_terminal() {
        return Err(MdpError::UnboundedEpisodes);
    }
    let mut q = QTable::zeros(mdp.num_states(), mdp.num_actions());
    let mut rng = rng_from_seed(config.seed);
    let k = mdp.num_actions();

    for episode in 0..config.episodes {
        let lr = config.learning_rate.at(episode, config.episodes);
        let eps = config.epsilon.at(episode, config.episodes);
        let mut s = mdp.initial_state();
        let mut steps = 0;
        while !mdp.is_terminal(s) && steps < config.max_steps {
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..k)
            } else {
                q.best_action(s)
            };
            let t = sample_next(mdp, s, a, &mut rng);
            let future = if mdp.is_terminal(t.next) { 0.0 } else { q.max(t.next) };
            let target = t.reward + mdp.gamma() * future;
            let old = q.get(s, a);
            q.set(s, a, old + lr * (target - old));
            s = t.next;
            steps += 1;
        }
    }
    Ok(q)
}
