//! Plain-text rendering of a run. Depends only on the stored result, so a
//! result file re-renders byte for byte.

use std::fmt::Write;

use crate::config::{SolverConfig, World};
use crate::result::{RunResult, SweepResult};

fn world_name(w: World) -> &'static str {
    match w {
        World::FlowerGarden => "flower_garden",
        World::Kitchen => "kitchen",
    }
}

fn solver_label(s: &SolverConfig) -> String {
    match s {
        SolverConfig::ValueIteration { tol, .. } => format!("value_iteration(tol={tol:e})"),
        SolverConfig::QLearning { episodes, seed, .. } => format!("q_learning(episodes={episodes}, seed={seed})"),
    }
}

/// Draws the trajectory onto the grid: `*` for visited cells, `x` for
/// trampled flowers, `m`/`d` for used fridge and bench, `=` for a built fence.
pub fn overlay(result: &RunResult) -> Vec<String> {
    let mut grid: Vec<Vec<char>> = result.grid.iter().map(|r| r.chars().collect()).collect();
    let mut visited = vec![result.start];
    visited.extend(result.trajectory.iter().map(|s| s.to));
    for [r, c] in visited {
        let Some(ch) = grid.get_mut(r).and_then(|row| row.get_mut(c)) else {
            continue;
        };
        *ch = match *ch {
            '.' | 'B' | 'f' => '*',
            'F' => 'x',
            'M' => 'm',
            'D' => 'd',
            other => other,
        };
    }
    if result.flag("fence_built") == Some(true) {
        for (r, row) in result.grid.iter().enumerate() {
            for (c, ch) in row.chars().enumerate() {
                if ch == 'f' {
                    grid[r][c] = '=';
                }
            }
        }
    }
    grid.into_iter().map(|r| r.into_iter().collect()).collect()
}

pub fn render(result: &RunResult) -> String {
    let cfg = &result.config;
    let sc = &cfg.scenario;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "world: {}  gamma: {}  solver: {}",
        world_name(cfg.world),
        sc.gamma,
        solver_label(&cfg.solver)
    );
    match cfg.world {
        World::FlowerGarden => {
            let _ = writeln!(
                out,
                "caring: self={} alice={} bob={}",
                sc.alpha_self, sc.alpha_alice, sc.alpha_bob
            );
        }
        World::Kitchen => {
            let _ = writeln!(out, "caring: self={}", sc.alpha_self);
        }
    }
    let _ = writeln!(out, "augmentation: {}", cfg.augmentation.label());
    out.push('\n');
    for row in overlay(result) {
        let _ = writeln!(out, "{row}");
    }
    out.push('\n');
    let actions: Vec<&str> = result.trajectory.iter().map(|s| s.action_name.as_str()).collect();
    let _ = writeln!(out, "actions ({}): {}", actions.len(), actions.join(" "));
    let flags: Vec<String> = result.terminal.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(
        out,
        "terminal: {}  {}",
        if result.terminal.reached {
            "reached"
        } else {
            "not reached"
        },
        flags.join(" ")
    );
    for a in &result.agent_values {
        let _ = writeln!(
            out,
            "agent {} ({}): expected value {}",
            a.agent_id, a.name, a.expected_value
        );
    }
    let _ = writeln!(
        out,
        "value(s0): {}  return: {}  converged: {}  iterations: {}",
        result.initial_value, result.discounted_return, result.converged, result.iterations
    );
    out
}

/// One line per sweep row.
pub fn render_sweep(sweep: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>12}  {:>12}  {:>5}  {:<9}  flags",
        sweep.parameter, "value(s0)", "steps", "converged"
    );
    for row in &sweep.rows {
        match (&row.result, &row.error) {
            (Some(r), _) => {
                let flags: Vec<String> = r.terminal.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(
                    out,
                    "{:>12}  {:>12.4}  {:>5}  {:<9}  {}",
                    row.value,
                    r.initial_value,
                    r.trajectory.len(),
                    r.converged,
                    flags.join(" ")
                );
            }
            (None, err) => {
                let _ = writeln!(out, "{:>12}  error: {}", row.value, err.as_deref().unwrap_or("unknown"));
            }
        }
    }
    out
}
