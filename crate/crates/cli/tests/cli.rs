use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use considerate_cli::render::render;
use considerate_cli::run::{augment, prepare_world, run, sweep};
use considerate_cli::{ExperimentConfig, RunResult};
use considerate_core::gridworld::FLOWER_GARDEN_MAP;
use considerate_core::{policy_evaluation, Policy};
use tempfile::TempDir;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn flower_sweep() -> ExperimentConfig {
    ExperimentConfig::load(&scenarios().join("flower_sweep.toml")).unwrap()
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_considerate"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Writes `config` next to a copy of `map` in a fresh directory.
fn workspace(config: &str, map: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("garden.map"), map).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, config).unwrap();
    (dir, path)
}

const GARDEN_CONFIG: &str = r#"
schema_version = 1
world = "flower_garden"
map_path = "garden.map"

[augmentation]
kind = "per_agent"
swf = { kind = "weighted_sum" }
"#;

#[test]
fn bundled_map_file_matches_the_library_copy() {
    let text = std::fs::read_to_string(scenarios().join("flower_garden.map")).unwrap();
    assert_eq!(text, FLOWER_GARDEN_MAP);
}

#[test]
fn validate_exit_codes() {
    let ok = cli(&["validate", scenarios().join("flower_sweep.toml").to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));

    let (_d, missing) = workspace(&GARDEN_CONFIG.replace("garden.map", "nowhere.map"), FLOWER_GARDEN_MAP);
    assert_eq!(code(&cli(&["validate", missing.to_str().unwrap()])), 2);

    let two_starts = FLOWER_GARDEN_MAP.replace("B......", "BS.....");
    let (_d, bad_map) = workspace(GARDEN_CONFIG, &two_starts);
    let out = cli(&["validate", bad_map.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("'S'"));

    let (_d, typo) = workspace(
        &GARDEN_CONFIG.replace("[augmentation]", "colour = 1\n[augmentation]"),
        FLOWER_GARDEN_MAP,
    );
    assert_eq!(code(&cli(&["validate", typo.to_str().unwrap()])), 2);
    assert_eq!(code(&cli(&["validate", "/no/such/config.toml"])), 2);
}

#[test]
fn solve_reproduces_the_three_behaviours() {
    let cfg = flower_sweep();
    let at = |a: f64| run(&cfg.with_parameter("alpha_alice", a).unwrap()).unwrap();

    let careless = at(0.0);
    assert_eq!(careless.flag("flowers_intact"), Some(false));
    assert!(render(&careless).contains('x'));

    let detour = at(1.0);
    assert_eq!(detour.flag("flowers_intact"), Some(true));
    assert_eq!(detour.flag("fence_built"), Some(false));
    assert!(detour.trajectory.iter().all(|s| s.action_name != "build"));

    let fence = at(10.0);
    assert_eq!(fence.flag("fence_built"), Some(true));
    assert!(render(&fence).contains('='));
    for r in [&careless, &detour, &fence] {
        assert!(r.converged && r.terminal.reached);
    }
}

#[test]
fn sweep_rows_are_sorted_and_match_single_runs() {
    let mut cfg = flower_sweep();
    cfg.sweep.as_mut().unwrap().values = vec![10.0, 0.0, 1.0];
    let s = sweep(&cfg).unwrap();
    let values: Vec<f64> = s.rows.iter().map(|r| r.value).collect();
    assert_eq!(values, vec![0.0, 1.0, 10.0]);
    for row in &s.rows {
        let single = run(&cfg.with_parameter("alpha_alice", row.value).unwrap()).unwrap();
        assert_eq!(row.result.as_ref().unwrap().without_timing(), single.without_timing());
    }

    cfg.sweep.as_mut().unwrap().values = vec![0.0, 0.0];
    let s = sweep(&cfg).unwrap();
    let (a, b) = (s.rows[0].result.as_ref().unwrap(), s.rows[1].result.as_ref().unwrap());
    assert_eq!(a.without_timing(), b.without_timing());
}

#[test]
fn failing_sweep_rows_do_not_stop_the_others() {
    let mut cfg = flower_sweep();
    // A negative caring coefficient is rejected by the model.
    cfg.sweep.as_mut().unwrap().values = vec![-1.0, 1.0];
    let s = sweep(&cfg).unwrap();
    assert!(s.rows[0].error.is_some() && s.rows[0].result.is_none());
    assert!(s.rows[1].result.is_some());
}

#[test]
fn sweep_command_writes_json_and_exits_cleanly() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("sweep.json");
    let out = cli(&[
        "sweep",
        scenarios().join("flower_sweep.toml").to_str().unwrap(),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 4);
    let parsed = considerate_cli::SweepResult::from_json(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(parsed.rows.len(), 3);
}

#[test]
fn render_replays_a_stored_result_exactly() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("run.json");
    let cfg_path = scenarios().join("flower_sweep.toml");
    let solved = cli(&["solve", cfg_path.to_str().unwrap(), "-o", json.to_str().unwrap()]);
    assert_eq!(code(&solved), 0);
    let replay = cli(&["render", json.to_str().unwrap()]);
    assert_eq!(code(&replay), 0);
    assert_eq!(solved.stdout, replay.stdout);

    let text = std::fs::read_to_string(&json).unwrap();
    let truncated = dir.path().join("cut.json");
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&cli(&["render", truncated.to_str().unwrap()])), 2);
}

#[test]
fn reported_value_matches_an_independent_evaluation() {
    let cfg = flower_sweep();
    for a in [0.0, 1.0, 10.0] {
        let c = cfg.with_parameter("alpha_alice", a).unwrap();
        let result = run(&c).unwrap();
        let world = prepare_world(&c).unwrap();
        let mdp = augment(&c, &world).unwrap();
        let eval = policy_evaluation(&mdp, &Policy::new(result.policy.clone()), 1e-10, 1_000_000).unwrap();
        assert!((eval.values[mdp.initial_state()] - result.initial_value).abs() <= 1e-6);
    }
}

#[test]
fn trajectory_return_is_the_discounted_reward_sum() {
    for gamma in [1.0, 0.9] {
        let c = flower_sweep().with_parameter("gamma", gamma).unwrap();
        let r = run(&c).unwrap();
        let sum: f64 = r
            .trajectory
            .iter()
            .enumerate()
            .map(|(t, s)| gamma.powi(t as i32) * s.reward)
            .sum();
        assert!((sum - r.discounted_return).abs() <= 1e-9);
    }
}

#[test]
fn kitchen_options_keep_the_milk_for_large_weights() {
    let cfg = ExperimentConfig::load(&scenarios().join("kitchen.toml")).unwrap();
    let s = sweep(&cfg).unwrap();
    let kept: Vec<Option<bool>> = s
        .rows
        .iter()
        .map(|r| r.result.as_ref().unwrap().flag("milk_left"))
        .collect();
    assert_eq!(kept, vec![Some(false), Some(false), Some(true)]);
}

#[test]
fn q_learning_config_finds_the_fence() {
    let cfg = ExperimentConfig::load(&scenarios().join("flower_qlearning.toml")).unwrap();
    let r = run(&cfg).unwrap();
    assert!(r.converged);
    assert_eq!(r.flag("fence_built"), Some(true));
    assert_eq!(r, RunResult::from_json(&r.to_json()).unwrap());
}
