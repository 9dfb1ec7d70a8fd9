use std::fs;
use std::path::Path;

use smfe::corpus::{RandomGame, SpaceSize};
use smfe::io::save_json;
use smfe::model::{GameSpec, Horizon, Kernel, PlayerSpace, Reward, RewardFunctions, TransitionKernels};
use smfe_cli::main_with_args;

fn single_action_spec() -> GameSpec {
    GameSpec {
        name: "single".into(),
        horizon: Horizon::Finite(2),
        discount: 0.9,
        reward_bound: None,
        leaders: vec![PlayerSpace::indexed(1, 1)],
        majors: vec![],
        minor: PlayerSpace::indexed(1, 1),
        initial_leader_major_dist: vec![1.0],
        initial_mean_field: vec![1.0],
        kernels: TransitionKernels {
            leaders: vec![Kernel::Table(vec![vec![1.0]])],
            majors: vec![],
            minor: Kernel::Table(vec![vec![1.0]]),
        },
        rewards: RewardFunctions {
            leaders: vec![Reward::Table(vec![1.0])],
            majors: vec![],
            minor: Reward::Table(vec![0.5]),
        },
    }
}

/// A random game with a grid fixed point.
fn solvable_spec() -> GameSpec {
    let g = RandomGame {
        leaders: vec![SpaceSize::new(2, 2)],
        horizon: 2,
        ..RandomGame::default()
    };
    (0..)
        .map(|s| g.generate(s))
        .find(|spec| {
            let game = spec.clone().validate().unwrap();
            smfe::solver::solve_game(&game, &Default::default()).is_ok()
        })
        .unwrap()
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.join("out");
    let mut all = vec!["smfe".to_string()];
    all.extend(args.iter().map(|s| s.to_string()));
    all.push("--out".into());
    all.push(out.display().to_string());
    main_with_args(all)
}

fn write_game(dir: &Path, spec: &GameSpec) -> String {
    let path = dir.join("game.json");
    save_json(&path, spec).unwrap();
    path.display().to_string()
}

#[test]
fn solve_single_action_game() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &single_action_spec());
    assert_eq!(run(dir.path(), &["solve", "--game", &game]), 0);
    let text = fs::read_to_string(dir.path().join("out/solution.json")).unwrap();
    assert!(text.contains("\"spec_sha256\""));
    assert!(text.contains("\"run_config\""));
    assert_eq!(run(dir.path(), &["verify", "--game", &game]), 0);
}

#[test]
fn tampered_solution_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &solvable_spec());
    assert_eq!(run(dir.path(), &["solve", "--game", &game]), 0);
    assert_eq!(run(dir.path(), &["verify", "--game", &game]), 0);
    let path = dir.path().join("out/solution.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    for entry in v["solution"]["stage_table"].as_array_mut().unwrap() {
        for row in entry["solution"]["prescriptions"]["minor"].as_array_mut().unwrap() {
            row.as_array_mut().unwrap().reverse();
        }
    }
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    assert_eq!(run(dir.path(), &["verify", "--game", &game]), 1);
}

#[test]
fn empty_population_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &solvable_spec());
    assert_eq!(run(dir.path(), &["simulate", "--game", &game, "--population", "0"]), 2);
    assert_eq!(run(dir.path(), &["simulate", "--game", &game, "--population", "200"]), 0);
    let csv = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(csv.contains("# spec_sha256="));
    assert!(csv.contains("period,class,h0,h1"));
}

#[test]
fn invalid_game_and_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = single_action_spec();
    spec.kernels.minor = Kernel::Table(vec![vec![0.5]]);
    let bad = write_game(dir.path(), &spec);
    assert_eq!(run(dir.path(), &["solve", "--game", &bad]), 2);
    let good = write_game(dir.path(), &single_action_spec());
    assert_eq!(run(dir.path(), &["solve", "--game", &good, "--tol", "1e-9,1e-7"]), 2);
    assert_eq!(run(dir.path(), &["solve", "--game", &good, "--grid", "0"]), 2);
    assert_eq!(run(dir.path(), &["solve", "--game", &good, "--selection", "best"]), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &solvable_spec());
    let snapshot = |cmd: &[&str], file: &str| {
        assert_eq!(run(dir.path(), cmd), 0);
        fs::read(dir.path().join("out").join(file)).unwrap()
    };
    let s1 = snapshot(&["solve", "--game", &game], "solution.json");
    let r1 = snapshot(&["verify", "--game", &game, "--samples", "2000"], "report.json");
    let t1 = snapshot(&["simulate", "--game", &game, "--population", "100", "--seed", "4"], "trace.csv");
    let s2 = snapshot(&["solve", "--game", &game], "solution.json");
    let r2 = snapshot(&["verify", "--game", &game, "--samples", "2000"], "report.json");
    let t2 = snapshot(&["simulate", "--game", &game, "--population", "100", "--seed", "4"], "trace.csv");
    assert_eq!(s1, s2);
    assert_eq!(r1, r2);
    assert_eq!(t1, t2);
}

#[test]
fn brute_force_writes_its_survivors() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &single_action_spec());
    assert_eq!(run(dir.path(), &["brute-force", "--game", &game]), 0);
    let text = fs::read_to_string(dir.path().join("out/brute_force.json")).unwrap();
    assert!(text.contains("\"on_path_survivors\": 1"));
    assert_eq!(run(dir.path(), &["brute-force", "--game", &game, "--budget", "0"]), 2);
}

#[test]
fn verify_rejects_a_solution_for_another_game() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &single_action_spec());
    assert_eq!(run(dir.path(), &["solve", "--game", &game]), 0);
    let mut other = single_action_spec();
    other.rewards.minor = Reward::Table(vec![0.25]);
    let other = write_game(dir.path(), &other);
    assert_eq!(run(dir.path(), &["verify", "--game", &other]), 2);
}

#[test]
fn social_welfare_leader_solves() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path(), &single_action_spec());
    assert_eq!(run(dir.path(), &["solve", "--game", &game, "--social-welfare", "0"]), 0);
    assert_eq!(run(dir.path(), &["solve", "--game", &game, "--social-welfare", "3"]), 2);
}
