mod common;

use common::{binary, frozen_game, solved};
use smfe::corpus::Coupling;
use smfe::model::Horizon;
use smfe::simulate::{
    empirical_mean_field, simulate_population, tv_distance, write_trace_csv, CouplingMode,
};
use smfe::solver::{solve_game, FiniteSolver, SolverConfig};
use smfe::Error;

#[test]
fn empty_population_is_rejected() {
    let (_, game, sol) = solved(&binary(1, 0, 2), 0);
    let r = simulate_population(&game, &mut sol.view(&game), 0, 1, CouplingMode::Limit, None);
    assert!(matches!(r, Err(Error::Argument(_))));
}

#[test]
fn frozen_population_stays_put() {
    let game = frozen_game(Horizon::Finite(4), 1, 3, 2, 1.0);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let trace = simulate_population(&game, &mut sol.view(&game), 500, 4, CouplingMode::Limit, None).unwrap();
    let z = empirical_mean_field(&trace);
    assert_eq!(z.len(), 4);
    assert!(z.iter().all(|zt| *zt == z[0]));
}

#[test]
fn single_agent_with_frozen_states_is_constant() {
    let game = frozen_game(Horizon::Finite(3), 1, 2, 1, 0.0);
    let sol = solve_game(&game, &SolverConfig::default()).unwrap();
    let trace = simulate_population(&game, &mut sol.view(&game), 1, 11, CouplingMode::Limit, None).unwrap();
    let first = &trace.periods[0];
    assert!(trace.periods.iter().all(|p| p.counts == first.counts && p.lm_states == first.lm_states));
    assert_eq!(first.counts.iter().sum::<usize>(), 1);
}

#[test]
fn counts_are_a_population() {
    let (_, game, sol) = solved(&binary(1, 0, 3), 0);
    let trace = simulate_population(&game, &mut sol.view(&game), 777, 2, CouplingMode::Limit, None).unwrap();
    for z in empirical_mean_field(&trace) {
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(z.iter().all(|p| (p * 777.0 - (p * 777.0).round()).abs() < 1e-9));
    }
}

#[test]
fn same_seed_same_trace_and_csv() {
    let (_, game, sol) = solved(&binary(1, 0, 3), 0);
    let run = || {
        let trace = simulate_population(&game, &mut sol.view(&game), 300, 5, CouplingMode::Limit, None).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &[("game", "demo".into())], &mut buf).unwrap();
        (trace, String::from_utf8(buf).unwrap())
    };
    let (a, ca) = run();
    let (b, cb) = run();
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    assert!(ca.starts_with("# seed=5\n# n=300\n# coupling=limit\n# game=demo\nperiod,class,h0,h1\n"));
    assert!(ca.contains("\n1,leader0,"));
    let other = simulate_population(&game, &mut sol.view(&game), 300, 6, CouplingMode::Limit, None).unwrap();
    assert_ne!(a, other);
}

#[test]
fn empirical_coupling_runs_on_demand() {
    let (_, game, _) = solved(&binary(1, 0, 2), 0);
    let mut solver = FiniteSolver::new(&game, SolverConfig::default()).unwrap();
    match simulate_population(&game, &mut solver, 50, 3, CouplingMode::Empirical, None) {
        Ok(trace) => {
            assert_eq!(trace.periods.len(), 2);
            assert_eq!(trace.coupling, CouplingMode::Empirical);
        }
        Err(Error::NoEquilibrium { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn limit_coupling_tightens_with_population() {
    let mut g = binary(1, 0, 3);
    g.coupling = Coupling::MinorIsolated;
    let (_, game, sol) = solved(&g, 0);
    let median = |n: usize| {
        let mut tv: Vec<f64> = (0..30)
            .map(|s| {
                simulate_population(&game, &mut sol.view(&game), n, s, CouplingMode::Limit, None)
                    .unwrap()
                    .max_tv()
            })
            .collect();
        tv.sort_by(f64::total_cmp);
        tv[15]
    };
    assert!(median(100) > median(10_000));
    assert!(median(10_000) < 0.05);
}

#[test]
fn tv_distance_rejects_mismatched_lengths() {
    assert!(matches!(tv_distance(&[1.0], &[0.5, 0.5]), Err(Error::Dimension(_))));
}
