//! Batch front end: load a game file, solve, certify, simulate or brute-force
//! it, and write JSON/CSV artifacts that embed the run configuration and a
//! digest of the game file.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use smfe::belief::BeliefDynamics;
use smfe::grid::CandidateGrid;
use smfe::io::{file_sha256, load_game, read_json, save_json};
use smfe::model::{Game, Horizon};
use smfe::simulate::{simulate_population, write_trace_csv, CouplingMode, PopulationTrace};
use smfe::solver::{
    on_path, solve_game, solve_infinite_horizon, solve_infinite_leaders, solve_public_majors,
    value_iteration, EquilibriumSolution, FiniteSolver, SolveMode, SolverConfig, StrategyView,
};
use smfe::stage::{Selection, Tolerances};
use smfe::verify::{
    brute_force_smfe, check_conditional_independence, verify_follower_global,
    verify_one_shot_deviations, BruteForceResult, CertificationReport, IndependenceReport, Status,
};
use smfe::welfare::social_welfare_reward;
use smfe::Error;

#[derive(Parser, Debug)]
#[command(name = "smfe", version, about = "Stackelberg mean-field equilibria with multiple leaders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a game and write solution.json.
    Solve(Common),
    /// Certify a stored solution and write report.json.
    Verify(Common),
    /// Simulate a finite population and write trace.csv.
    Simulate(Common),
    /// Enumerate every equilibrium of a tiny game and write brute_force.json.
    BruteForce(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Game file (JSON).
    #[arg(long)]
    pub game: PathBuf,
    /// Recursion to use; defaults to `finite` or `infinite-horizon` by the game's horizon.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Grid granularity G: candidate probabilities are multiples of 1/G.
    #[arg(long, default_value_t = 1)]
    pub grid: u32,
    /// Finite games: overrides the horizon. Infinite games: periods to simulate.
    #[arg(long)]
    pub horizon: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of minor followers simulated.
    #[arg(long, default_value_t = 10_000)]
    pub population: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "lex", value_parser = ["lex", "pessimistic", "optimistic"])]
    pub selection: String,
    /// Tie, certification and value-iteration tolerances.
    #[arg(long, default_value = "1e-9,1e-7,1e-10")]
    pub tol: String,
    /// Solution file to verify; defaults to OUT/solution.json.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Replace this leader's reward by social welfare.
    #[arg(long)]
    pub social_welfare: Option<usize>,
    /// Monte Carlo samples for the independence check (verify); 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    /// Mean field fed to kernels and strategies during simulation.
    #[arg(long, value_enum, default_value_t = CouplingArg::Limit)]
    pub coupling: CouplingArg,
    /// Node or assignment budget for exhaustive checks.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Finite,
    InfiniteLeaders,
    PublicMajors,
    InfiniteHorizon,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingArg {
    Limit,
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Solve,
    Verify,
    Simulate,
    BruteForce,
}

/// Everything a run depends on, embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub game: PathBuf,
    pub mode: SolveMode,
    pub grid: u32,
    pub tolerances: Tolerances,
    pub selection: Selection,
    pub horizon: Option<u32>,
    pub seed: u64,
    pub population: usize,
    pub coupling: CouplingMode,
    pub out: PathBuf,
    pub solution: Option<PathBuf>,
    pub social_welfare: Option<usize>,
    pub samples: usize,
    pub budget: u64,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> smfe::Result<Self> {
        let (command, c) = match cli.command {
            Command::Solve(c) => (CommandKind::Solve, c),
            Command::Verify(c) => (CommandKind::Verify, c),
            Command::Simulate(c) => (CommandKind::Simulate, c),
            Command::BruteForce(c) => (CommandKind::BruteForce, c),
        };
        CandidateGrid::new(c.grid)?;
        let mode = match c.mode {
            Some(ModeArg::Finite) => SolveMode::Finite,
            Some(ModeArg::InfiniteLeaders) => SolveMode::InfiniteLeaders,
            Some(ModeArg::PublicMajors) => SolveMode::PublicMajors,
            Some(ModeArg::InfiniteHorizon) => SolveMode::InfiniteHorizon,
            None => {
                let spec: smfe::model::GameSpec = read_json(&c.game)?;
                match spec.horizon {
                    Horizon::Finite(_) => SolveMode::Finite,
                    Horizon::Infinite => SolveMode::InfiniteHorizon,
                }
            }
        };
        Ok(RunConfig {
            command,
            game: c.game,
            mode,
            grid: c.grid,
            tolerances: parse_tolerances(&c.tol)?,
            selection: Selection::from_str(&c.selection)?,
            horizon: c.horizon,
            seed: c.seed,
            population: c.population,
            coupling: match c.coupling {
                CouplingArg::Limit => CouplingMode::Limit,
                CouplingArg::Empirical => CouplingMode::Empirical,
            },
            out: c.out,
            solution: c.solution,
            social_welfare: c.social_welfare,
            samples: c.samples,
            budget: c.budget,
        })
    }

    pub fn solver_config(&self) -> smfe::Result<SolverConfig> {
        Ok(SolverConfig {
            grid: CandidateGrid::new(self.grid)?,
            tolerances: self.tolerances,
            selection: self.selection,
            ..SolverConfig::default()
        })
    }

    fn solution_path(&self) -> PathBuf {
        self.solution
            .clone()
            .unwrap_or_else(|| self.out.join("solution.json"))
    }
}

/// `tie,cert,vi`.
pub fn parse_tolerances(s: &str) -> smfe::Result<Tolerances> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Argument(format!("--tol {s:?}: {e}")))?;
    match parts[..] {
        [tie, cert, vi] if parts.iter().all(|x| x.is_finite() && *x >= 0.0) => {
            Ok(Tolerances { tie, cert, vi })
        }
        _ => Err(Error::Argument(format!(
            "--tol expects three non-negative numbers tie,cert,vi, got {s:?}"
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub run_config: RunConfig,
    pub spec_sha256: String,
    pub solution: EquilibriumSolution,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub run_config: RunConfig,
    pub spec_sha256: String,
    pub status: Status,
    pub one_shot: CertificationReport,
    pub follower_global: CertificationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BruteForceFile {
    pub run_config: RunConfig,
    pub spec_sha256: String,
    /// Distinct on-path restrictions of the survivors.
    pub on_path_survivors: usize,
    pub result: BruteForceResult,
}

/// Exit status and a human-readable summary.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Exit code for an error: 1 when no equilibrium exists, 2 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::NoEquilibrium { .. } => 1,
        _ => 2,
    }
}

fn load(config: &RunConfig) -> smfe::Result<(Game, String)> {
    let digest = file_sha256(&config.game)?;
    let game = load_game(&config.game)?;
    let mut spec = game.into_spec();
    if let (Some(h), Horizon::Finite(_)) = (config.horizon, spec.horizon) {
        spec.horizon = Horizon::Finite(h);
    }
    if let Some(i) = config.social_welfare {
        social_welfare_reward(&mut spec, i)?;
    }
    Ok((spec.validate()?, digest))
}

fn solve(game: &Game, mode: SolveMode, config: &SolverConfig) -> smfe::Result<EquilibriumSolution> {
    match mode {
        SolveMode::Finite => solve_game(game, config),
        SolveMode::InfiniteLeaders => solve_infinite_leaders(game, config),
        SolveMode::PublicMajors => solve_public_majors(game, config),
        SolveMode::InfiniteHorizon => solve_infinite_horizon(game, config),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn run(config: &RunConfig) -> smfe::Result<Outcome> {
    match config.command {
        CommandKind::Solve => run_solve(config),
        CommandKind::Verify => run_verify(config),
        CommandKind::Simulate => run_simulate(config),
        CommandKind::BruteForce => run_brute_force(config),
    }
}

fn run_solve(config: &RunConfig) -> smfe::Result<Outcome> {
    let (game, digest) = load(config)?;
    let solution = solve(&game, config.mode, &config.solver_config()?)?;
    let path = config.out.join("solution.json");
    let d = &solution.diagnostics;
    let mut s = String::new();
    writeln!(s, "game: {} ({:?})", config.game.display(), config.mode).ok();
    writeln!(s, "equilibrium exists at every visited point: {}", d.existence).ok();
    writeln!(
        s,
        "points: {}, with several fixed points: {}, max multiplicity: {}",
        d.points, d.points_with_multiple_equilibria, d.max_multiplicity
    )
    .ok();
    writeln!(
        s,
        "skipped leader deviations: {}, off-path belief fallbacks: {}",
        d.skipped_deviations, d.off_equilibrium_triggers
    )
    .ok();
    if let Some(r) = solution.residuals.last() {
        writeln!(s, "value iteration: {} sweeps, last residual {r:e}", solution.residuals.len()).ok();
    }
    for step in &solution.trajectory {
        writeln!(s, "t={} z={}", step.t, fmt_vec(&step.z)).ok();
    }
    save_json(
        &path,
        &SolutionFile {
            run_config: config.clone(),
            spec_sha256: digest,
            solution,
        },
    )?;
    writeln!(s, "wrote {}", path.display()).ok();
    Ok(Outcome {
        exit_code: 0,
        summary: s,
        artifacts: vec![path],
    })
}

fn run_verify(config: &RunConfig) -> smfe::Result<Outcome> {
    let (game, digest) = load(config)?;
    let file: SolutionFile = read_json(config.solution_path())?;
    if file.spec_sha256 != digest {
        return Err(Error::Argument(format!(
            "solution was computed for a game with digest {}, not {digest}",
            file.spec_sha256
        )));
    }
    let sol = &file.solution;
    let (grid, cert) = (sol.config.grid, sol.config.tolerances.cert);
    let skipped = |what: &str| CertificationReport::not_checked(grid, cert, what.into());
    let one_shot = if sol.horizon.is_some() {
        verify_one_shot_deviations(&game, sol)?
    } else {
        skipped("one-shot certification covers finite-horizon solutions")
    };
    let follower_global = if sol.horizon.is_some() {
        verify_follower_global(&game, sol, config.budget)?
    } else {
        skipped("global follower checks cover finite-horizon solutions")
    };
    let independence = if config.samples > 0 {
        let mut view = sol.view(&game);
        Some(check_conditional_independence(&game, &mut view, config.samples, config.seed)?)
    } else {
        None
    };
    let statuses = [Some(one_shot.status), Some(follower_global.status), independence.as_ref().map(|r| r.status)];
    let status = if statuses.contains(&Some(Status::Failed)) {
        Status::Failed
    } else if one_shot.status == Status::Passed
        && independence.as_ref().is_none_or(|r| r.status == Status::Passed)
    {
        Status::Passed
    } else {
        Status::NotChecked
    };
    let mut s = String::new();
    writeln!(s, "solution: {}", config.solution_path().display()).ok();
    writeln!(
        s,
        "one-shot: {:?}, max violation {:e} (tolerance {:e}), {} deviations, {} skipped, {} off-path fallbacks",
        one_shot.status,
        one_shot.max_violation,
        one_shot.cert_tol,
        one_shot.checked_deviations,
        one_shot.skipped_deviations,
        one_shot.off_equilibrium_triggers
    )
    .ok();
    writeln!(
        s,
        "global followers: {:?}, max violation {:e}",
        follower_global.status, follower_global.max_violation
    )
    .ok();
    if let Some(r) = &independence {
        writeln!(
            s,
            "independence: {:?}, {} buckets tested, {} failed",
            r.status, r.tested_buckets, r.failed_buckets
        )
        .ok();
    }
    let path = config.out.join("report.json");
    save_json(
        &path,
        &ReportFile {
            run_config: config.clone(),
            spec_sha256: digest,
            status,
            one_shot,
            follower_global,
            independence,
        },
    )?;
    writeln!(s, "status: {status:?}").ok();
    writeln!(s, "wrote {}", path.display()).ok();
    Ok(Outcome {
        exit_code: status.exit_code(),
        summary: s,
        artifacts: vec![path],
    })
}

fn simulate_with(config: &RunConfig, game: &Game) -> smfe::Result<PopulationTrace> {
    let solver_config = config.solver_config()?;
    let (n, seed, coupling) = (config.population, config.seed, config.coupling);
    if n == 0 {
        return Err(Error::Argument("--population must be at least 1".into()));
    }
    let mut view: Box<dyn StrategyView + '_> = match (config.mode, game.horizon()) {
        (SolveMode::InfiniteHorizon, _) => Box::new(value_iteration(game, &solver_config)?.0),
        (SolveMode::InfiniteLeaders, Some(h)) => Box::new(FiniteSolver::with_dynamics(
            game,
            solver_config,
            BeliefDynamics::Aggregate,
            h,
        )?),
        _ => Box::new(FiniteSolver::new(game, solver_config)?),
    };
    let periods = match game.horizon() {
        Some(_) => None,
        None => Some(config.horizon.unwrap_or(SolverConfig::default().report_periods)),
    };
    simulate_population(game, view.as_mut(), n, seed, coupling, periods)
}

fn run_simulate(config: &RunConfig) -> smfe::Result<Outcome> {
    let (game, digest) = load(config)?;
    let trace = simulate_with(config, &game)?;
    let path = config.out.join("trace.csv");
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let run_config = serde_json::to_string(config).map_err(Error::from)?;
    let mut buf = Vec::new();
    write_trace_csv(
        &trace,
        &[("spec_sha256", digest), ("run_config", run_config)],
        &mut buf,
    )?;
    fs::write(&path, buf)?;
    let mut s = String::new();
    writeln!(s, "population {} over {} periods, seed {}", trace.n, trace.periods.len(), trace.seed).ok();
    let empirical = smfe::simulate::empirical_mean_field(&trace);
    for (p, z) in trace.periods.iter().zip(&empirical) {
        writeln!(s, "t={} empirical={} limit={}", p.t, fmt_vec(z), fmt_vec(&p.limit_z)).ok();
    }
    writeln!(s, "max TV to the limit mean field: {:.4}", trace.max_tv()).ok();
    writeln!(s, "wrote {}", path.display()).ok();
    Ok(Outcome {
        exit_code: 0,
        summary: s,
        artifacts: vec![path],
    })
}

fn run_brute_force(config: &RunConfig) -> smfe::Result<Outcome> {
    let (game, digest) = load(config)?;
    let solver_config = config.solver_config()?;
    let budget = usize::try_from(config.budget).unwrap_or(usize::MAX);
    let result = brute_force_smfe(&game, &solver_config, budget)?;
    let on_path_survivors = result
        .survivors
        .iter()
        .map(|a| on_path(&game, &solver_config, a))
        .collect::<smfe::Result<std::collections::BTreeSet<_>>>()?
        .len();
    let mut s = String::new();
    writeln!(
        s,
        "brute force: {:?}, {} survivors over {} points ({} distinct on path)",
        result.status,
        result.survivors.len(),
        result.domain_points,
        on_path_survivors
    )
    .ok();
    for note in &result.notes {
        writeln!(s, "note: {note}").ok();
    }
    let exit_code = result.status.exit_code();
    let path = config.out.join("brute_force.json");
    save_json(
        &path,
        &BruteForceFile {
            run_config: config.clone(),
            spec_sha256: digest,
            on_path_survivors,
            result,
        },
    )?;
    writeln!(s, "wrote {}", path.display()).ok();
    Ok(Outcome {
        exit_code,
        summary: s,
        artifacts: vec![path],
    })
}

/// Parses arguments, runs, prints the summary and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return code;
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|c| run(&c));
    match result {
        Ok(o) => {
            print!("{}", o.summary);
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}
