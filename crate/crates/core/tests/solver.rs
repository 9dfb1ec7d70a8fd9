mod common;

use common::frozen_game;
use smfe::belief::BeliefProfile;
use smfe::corpus::{RandomGame, SpaceSize};
use smfe::model::Horizon;
use smfe::solver::{
    solve_game, solve_infinite_horizon, solve_infinite_leaders, solve_public_majors,
    value_iteration, EquilibriumSolution, SolverConfig,
};
use smfe::Error;

fn max_gap(a: &EquilibriumSolution, b: &EquilibriumSolution) -> f64 {
    assert_eq!(a.trajectory.len(), b.trajectory.len());
    a.trajectory
        .iter()
        .zip(&b.trajectory)
        .map(|(x, y)| x.values.max_abs_diff(&y.values))
        .fold(0.0, f64::max)
}

#[test]
fn constant_reward_is_a_geometric_series() {
    let game = frozen_game(Horizon::Infinite, 1, 2, 1, 0.7);
    let (view, residuals) = value_iteration(&game, &SolverConfig::default()).unwrap();
    let v = view.value(&BeliefProfile::initial(&game), &game.spec().initial_mean_field);
    for x in &v.minor {
        assert!((x - 0.7 / (1.0 - 0.9)).abs() < 1e-8, "{x}");
    }
    assert!(*residuals.last().unwrap() < 1e-10);
}

#[test]
fn zero_rewards_converge_immediately() {
    let game = frozen_game(Horizon::Infinite, 1, 2, 2, 0.0);
    let (view, residuals) = value_iteration(&game, &SolverConfig::default()).unwrap();
    assert_eq!(residuals, vec![0.0]);
    let v = view.value(&BeliefProfile::initial(&game), &game.spec().initial_mean_field);
    assert!(v.iter().all(|x| *x == 0.0));
}

#[test]
fn value_iteration_needs_an_infinite_horizon() {
    let game = frozen_game(Horizon::Finite(2), 1, 2, 1, 1.0);
    assert!(matches!(value_iteration(&game, &SolverConfig::default()), Err(Error::Mode(_))));
}

#[test]
fn stationary_solution_reports_periods() {
    let game = frozen_game(Horizon::Infinite, 1, 2, 2, 1.0);
    let config = SolverConfig::default();
    let sol = solve_infinite_horizon(&game, &config).unwrap();
    assert_eq!(sol.horizon, None);
    assert_eq!(sol.trajectory.len(), config.report_periods as usize);
}

fn public(leaders: usize, majors: usize, horizon: u32) -> RandomGame {
    RandomGame {
        leaders: vec![SpaceSize::new(1, 2); leaders],
        majors: vec![SpaceSize::new(1, 2); majors],
        horizon,
        ..RandomGame::default()
    }
}

#[test]
fn public_majors_matches_the_general_solver() {
    let config = SolverConfig::default();
    let mut compared = 0;
    for seed in 0..15 {
        let game = public(2, 1, 3).generate(seed).validate().unwrap();
        match (solve_game(&game, &config), solve_public_majors(&game, &config)) {
            (Ok(a), Ok(b)) => {
                compared += 1;
                assert!(max_gap(&a, &b) <= 1e-12, "seed {seed}");
                assert!(a.trajectory.iter().zip(&b.trajectory).all(|(x, y)| x.prescriptions == y.prescriptions));
            }
            (Err(Error::NoEquilibrium { .. }), Err(Error::NoEquilibrium { .. })) => {}
            (a, b) => panic!("seed {seed}: {:?} vs {:?}", a.err(), b.err()),
        }
    }
    assert!(compared > 0);
}

#[test]
fn single_state_leader_population_matches_public_majors() {
    let config = SolverConfig::default();
    for seed in 0..15 {
        let game = public(1, 0, 3).generate(seed).validate().unwrap();
        let a = solve_infinite_leaders(&game, &config).unwrap();
        let b = solve_public_majors(&game, &config).unwrap();
        assert!(max_gap(&a, &b) <= 1e-12, "seed {seed}");
    }
}

#[test]
fn public_majors_rejects_private_states() {
    let game = RandomGame::default().generate(0).validate().unwrap();
    assert!(matches!(
        solve_public_majors(&game, &SolverConfig::default()),
        Err(Error::Mode(_))
    ));
}
