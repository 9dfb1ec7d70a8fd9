#![allow(dead_code)]

use smfe::corpus::{zero_rewards, RandomGame, SpaceSize};
use smfe::model::{Game, GameSpec, Horizon, Kernel, PlayerSpace, Reward, RewardFunctions, TransitionKernels};
use smfe::solver::{solve_game, EquilibriumSolution, SolverConfig};

pub fn binary(leaders: usize, majors: usize, horizon: u32) -> RandomGame {
    RandomGame {
        leaders: vec![SpaceSize::new(2, 2); leaders],
        majors: vec![SpaceSize::new(2, 2); majors],
        horizon,
        ..RandomGame::default()
    }
}

/// First seed at or after `from` whose game has a grid fixed point.
pub fn solved(g: &RandomGame, from: u64) -> (u64, Game, EquilibriumSolution) {
    (from..from + 500)
        .find_map(|s| {
            let game = g.generate(s).validate().unwrap();
            solve_game(&game, &SolverConfig::default())
                .ok()
                .map(|sol| (s, game, sol))
        })
        .expect("no solvable seed")
}

pub fn zero_reward_game(g: &RandomGame, seed: u64) -> Game {
    let mut spec = g.generate(seed);
    zero_rewards(&mut spec);
    spec.validate().unwrap()
}

fn identity(rows: usize, n: usize, state: impl Fn(usize) -> usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|r| {
            let mut v = vec![0.0; n];
            v[state(r)] = 1.0;
            v
        })
        .collect()
}

/// One leader with `leader_states` states and one action, a minor with
/// `minor_states` states and `minor_actions` actions. Every state is
/// absorbing and the minor earns `minor_reward` per period.
pub fn frozen_game(
    horizon: Horizon,
    leader_states: usize,
    minor_states: usize,
    minor_actions: usize,
    minor_reward: f64,
) -> Game {
    let lm_rows = leader_states;
    let minor_rows = lm_rows * minor_states * minor_actions;
    let z0: Vec<f64> = vec![1.0 / minor_states as f64; minor_states];
    GameSpec {
        name: "frozen".into(),
        horizon,
        discount: 0.9,
        reward_bound: None,
        leaders: vec![PlayerSpace::indexed(leader_states, 1)],
        majors: vec![],
        minor: PlayerSpace::indexed(minor_states, minor_actions),
        initial_leader_major_dist: vec![1.0 / leader_states as f64; leader_states],
        initial_mean_field: z0,
        kernels: TransitionKernels {
            leaders: vec![Kernel::Table(identity(lm_rows, leader_states, |r| r))],
            majors: vec![],
            minor: Kernel::Table(identity(minor_rows, minor_states, |r| (r / minor_actions) % minor_states)),
        },
        rewards: RewardFunctions {
            leaders: vec![Reward::Table(vec![0.0; lm_rows])],
            majors: vec![],
            minor: Reward::Table(vec![minor_reward; minor_rows]),
        },
    }
    .validate()
    .unwrap()
}
