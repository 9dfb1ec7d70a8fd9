mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{binary, frozen_game, solved, zero_reward_game};
use smfe::corpus::Coupling;
use smfe::grid::Candidates;
use smfe::model::Horizon;
use smfe::solver::{
    enumerate_recursive_equilibria, on_path, reachable_domain, solve_game, EquilibriumSolution,
    SolverConfig,
};
use smfe::verify::{
    brute_force_smfe, check_conditional_independence, verify_follower_global,
    verify_one_shot_deviations, Status,
};

/// Every variant of `sol` with one stored minor prescription replaced by
/// another grid candidate.
fn tampered(game: &smfe::model::Game, sol: &EquilibriumSolution) -> Vec<EquilibriumSolution> {
    let cands = Candidates::new(game, sol.config.grid);
    let mut out = Vec::new();
    for (i, entry) in sol.stage_table.iter().enumerate() {
        for c in &cands.minor {
            if *c == entry.solution.prescriptions.minor {
                continue;
            }
            let mut s = sol.clone();
            let mut e = (*s.stage_table[i]).clone();
            e.solution.prescriptions.minor = c.clone();
            s.stage_table[i] = Arc::new(e);
            out.push(s);
        }
    }
    out
}

#[test]
fn solved_games_certify() {
    for (k, t) in [(1, 1), (1, 2), (1, 3)] {
        let (seed, game, sol) = solved(&binary(k, 0, t), 0);
        let r = verify_one_shot_deviations(&game, &sol).unwrap();
        assert_eq!(r.status, Status::Passed, "seed {seed}: {r:?}");
        assert!(r.max_violation <= 1e-7);
        assert!(r.value_mismatch < 1e-12);
        assert!(r.checked_deviations > 0);
        let g = verify_follower_global(&game, &sol, 1_000_000).unwrap();
        assert_eq!(g.status, Status::Passed, "seed {seed}");
    }
}

#[test]
fn zero_rewards_certify_with_zero_margins() {
    let game = zero_reward_game(&binary(1, 0, 2), 3);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let r = verify_one_shot_deviations(&game, &sol).unwrap();
    assert!(r.passed);
    assert!(r.margins.iter().all(|m| m.margin == 0.0));
}

#[test]
fn tampering_is_detected() {
    let (_, game, sol) = solved(&binary(1, 0, 2), 0);
    let variants = tampered(&game, &sol);
    assert!(!variants.is_empty());
    let mut flagged = 0;
    for s in &variants {
        let r = verify_one_shot_deviations(&game, s).unwrap();
        if r.status == Status::Failed {
            flagged += 1;
        }
    }
    assert!(flagged > 0);
}

#[test]
fn one_shot_pass_implies_global_pass() {
    for seed in [0, 10, 20] {
        let (_, game, sol) = solved(&binary(1, 0, 2), seed);
        let mut all = tampered(&game, &sol);
        all.push(sol);
        for s in &all {
            let one = verify_one_shot_deviations(&game, s).unwrap();
            let global = verify_follower_global(&game, s, 1_000_000).unwrap();
            if one.passed {
                assert!(global.passed);
            }
        }
    }
}

#[test]
fn global_check_refuses_over_budget() {
    let (_, game, sol) = solved(&binary(1, 0, 3), 0);
    let r = verify_follower_global(&game, &sol, 3).unwrap();
    assert_eq!(r.status, Status::NotChecked);
    assert_eq!(r.status.exit_code(), 2);
}

#[test]
fn brute_force_keeps_everything_without_rewards() {
    let game = zero_reward_game(&binary(1, 0, 1), 5);
    let config = SolverConfig::default();
    let r = brute_force_smfe(&game, &config, 10_000).unwrap();
    assert_eq!(r.status, Status::Passed);
    let cands = Candidates::new(&game, config.grid);
    assert_eq!(r.survivors.len(), cands.all_profiles().len());
}

#[test]
fn brute_force_single_action_has_one_survivor() {
    let game = frozen_game(Horizon::Finite(2), 2, 2, 1, 1.0);
    let r = brute_force_smfe(&game, &SolverConfig::default(), 10_000).unwrap();
    assert_eq!(r.survivors.len(), 1);
}

#[test]
fn brute_force_matches_enumeration_on_path() {
    let config = SolverConfig::default();
    for from in [0, 8] {
        let (seed, game, _) = solved(&binary(1, 0, 2), from);
        let brute = brute_force_smfe(&game, &config, 100_000).unwrap();
        let domain = reachable_domain(&game, &config).unwrap();
        let all = enumerate_recursive_equilibria(&game, &config, &domain, 100_000).unwrap();
        let project = |v: &[smfe::solver::Assignment]| -> BTreeSet<_> {
            v.iter().map(|a| on_path(&game, &config, a).unwrap()).collect()
        };
        assert_eq!(project(&brute.survivors), project(&all), "seed {seed}");
    }
}

#[test]
fn brute_force_refuses_over_budget() {
    let game = zero_reward_game(&binary(1, 0, 2), 1);
    let r = brute_force_smfe(&game, &SolverConfig::default(), 2).unwrap();
    assert_eq!(r.status, Status::NotChecked);
    assert!(r.survivors.is_empty());
}

#[test]
fn independence_without_samples_is_inconclusive() {
    let (_, game, sol) = solved(&binary(1, 0, 2), 0);
    let r = check_conditional_independence(&game, &mut sol.view(&game), 0, 1).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
}

#[test]
fn independence_holds_for_frozen_states() {
    let game = frozen_game(Horizon::Finite(3), 2, 3, 2, 0.5);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let r = check_conditional_independence(&game, &mut sol.view(&game), 20_000, 3).unwrap();
    assert_eq!(r.status, Status::Passed);
}

#[test]
fn independence_holds_with_own_state_kernels() {
    let game = zero_reward_game(&binary(2, 0, 2), 0);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let r = check_conditional_independence(&game, &mut sol.view(&game), 50_000, 1).unwrap();
    assert_eq!(r.status, Status::Passed, "{r:?}");
}

#[test]
fn independence_flags_fully_coupled_kernels() {
    let mut g = binary(2, 0, 2);
    g.coupling = Coupling::Full;
    let game = zero_reward_game(&g, 0);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let r = check_conditional_independence(&game, &mut sol.view(&game), 100_000, 1).unwrap();
    assert_eq!(r.status, Status::Failed);
}

#[test]
fn reports_are_deterministic() {
    let (_, game, sol) = solved(&binary(1, 0, 2), 0);
    let a = serde_json::to_string(&verify_one_shot_deviations(&game, &sol).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_one_shot_deviations(&game, &sol).unwrap()).unwrap();
    assert_eq!(a, b);
    let a = check_conditional_independence(&game, &mut sol.view(&game), 5_000, 9).unwrap();
    let b = check_conditional_independence(&game, &mut sol.view(&game), 5_000, 9).unwrap();
    assert_eq!(a, b);
}
