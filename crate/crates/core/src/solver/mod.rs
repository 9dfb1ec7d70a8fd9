//! Backward-forward recursion and its special cases.

mod enumerate;
mod finite;
mod horizon;
mod public;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefDynamics, BeliefProfile, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::grid::CandidateGrid;
use crate::model::prob;
use crate::model::Game;
use crate::stage::{PlayerValues, Selection, StageSettings, StageSolution, Tolerances};

pub use enumerate::{
    enumerate_recursive_equilibria, on_path, reachable_domain, Assignment, Domain, DomainPoint,
};
pub use finite::{advance, mean_field_trajectory, solve_game, solve_infinite_leaders, FiniteSolver};
pub use horizon::{solve_infinite_horizon, value_iteration, SimplexLattice, StationaryView};
pub use public::solve_public_majors;

/// Which recursion produced a solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    #[default]
    Finite,
    InfiniteLeaders,
    PublicMajors,
    InfiniteHorizon,
}

impl SolveMode {
    pub fn dynamics(self) -> BeliefDynamics {
        match self {
            SolveMode::InfiniteLeaders => BeliefDynamics::Aggregate,
            _ => BeliefDynamics::Bayesian,
        }
    }

    pub fn is_stationary(self) -> bool {
        self == SolveMode::InfiniteHorizon
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: CandidateGrid,
    pub tolerances: Tolerances,
    pub selection: Selection,
    /// Refuse games with more candidate profiles per point than this.
    pub max_profiles: u64,
    /// Refuse to memoize more points than this.
    pub max_points: usize,
    /// Lattice resolution of every simplex in value iteration.
    pub vi_resolution: u32,
    pub vi_max_iters: usize,
    /// Periods recorded by the forward pass of a stationary solution.
    pub report_periods: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: CandidateGrid::default(),
            tolerances: Tolerances::default(),
            selection: Selection::Lex,
            max_profiles: 1 << 20,
            max_points: 1 << 20,
            vi_resolution: 20,
            vi_max_iters: 2000,
            report_periods: 10,
        }
    }
}

impl SolverConfig {
    pub fn stage_settings(&self, dynamics: BeliefDynamics) -> StageSettings {
        StageSettings {
            tolerances: self.tolerances,
            selection: self.selection,
            dynamics,
        }
    }

    pub(crate) fn check_budget(&self, game: &Game) -> Result<()> {
        let n = crate::grid::Candidates::profile_count(game, self.grid);
        if n > self.max_profiles as u128 {
            return Err(Error::Budget {
                needed: n,
                budget: self.max_profiles as u128,
            });
        }
        Ok(())
    }
}

/// Memo key: period and probabilities quantized to 1e-12.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointKey {
    pub t: u32,
    pub beliefs: Vec<i64>,
    pub z: Vec<i64>,
}

impl PointKey {
    pub fn new(t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Self {
        PointKey {
            t,
            beliefs: beliefs.key(),
            z: prob::quantize(z).collect(),
        }
    }
}

/// The selected stage fixed point at one memoized point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub key: PointKey,
    pub beliefs: BeliefProfile,
    pub z: Vec<f64>,
    pub solution: StageSolution,
    pub skipped_deviations: usize,
    pub off_equilibrium_triggers: usize,
}

impl StageEntry {
    pub fn prescriptions(&self) -> &PrescriptionProfile {
        &self.solution.prescriptions
    }

    pub fn values(&self) -> &Arc<PlayerValues> {
        &self.solution.values
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: u32,
    pub beliefs: BeliefProfile,
    pub z: Vec<f64>,
    pub prescriptions: PrescriptionProfile,
    pub values: Arc<PlayerValues>,
    /// Most likely joint leader/major action, one entry per player.
    pub modal_action: Vec<usize>,
    pub modal_probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub points: usize,
    pub existence: bool,
    pub max_multiplicity: usize,
    pub points_with_multiple_equilibria: usize,
    pub skipped_deviations: usize,
    pub off_equilibrium_triggers: usize,
    pub notes: Vec<String>,
}

/// Note recorded with every solve.
pub const MAJOR_OBJECTIVE_NOTE: &str =
    "major best responses use each major's own reward and continuation value";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub mode: SolveMode,
    pub config: SolverConfig,
    /// `None` for a stationary solution.
    pub horizon: Option<u32>,
    /// Memoized generating function, sorted by key.
    pub stage_table: Vec<Arc<StageEntry>>,
    pub trajectory: Vec<TrajectoryStep>,
    pub diagnostics: Diagnostics,
    /// Sup-norm change per value-iteration sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
}

impl EquilibriumSolution {
    pub(crate) fn assemble(
        mode: SolveMode,
        config: SolverConfig,
        horizon: Option<u32>,
        mut table: Vec<Arc<StageEntry>>,
        trajectory: Vec<TrajectoryStep>,
        residuals: Vec<f64>,
    ) -> Self {
        table.sort_by(|a, b| a.key.cmp(&b.key));
        let mut d = Diagnostics {
            points: table.len(),
            existence: true,
            notes: vec![MAJOR_OBJECTIVE_NOTE.to_string()],
            ..Diagnostics::default()
        };
        for e in &table {
            d.max_multiplicity = d.max_multiplicity.max(e.solution.multiplicity);
            if e.solution.multiplicity > 1 {
                d.points_with_multiple_equilibria += 1;
            }
            d.skipped_deviations += e.skipped_deviations;
            d.off_equilibrium_triggers += e.off_equilibrium_triggers;
        }
        log::info!("{MAJOR_OBJECTIVE_NOTE}");
        EquilibriumSolution {
            mode,
            config,
            horizon,
            stage_table: table,
            trajectory,
            diagnostics: d,
            residuals,
        }
    }

    /// On-path minor mean fields.
    pub fn mean_fields(&self) -> Vec<Vec<f64>> {
        self.trajectory.iter().map(|s| s.z.clone()).collect()
    }

    pub fn view<'a>(&'a self, game: &'a Game) -> SolutionView<'a> {
        SolutionView::new(game, self)
    }
}

/// Access to the equilibrium strategies: prescriptions as a function of the
/// period and the public point.
pub trait StrategyView {
    fn game(&self) -> &Game;
    fn dynamics(&self) -> BeliefDynamics;
    fn stage(&mut self, t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<StageEntry>>;
}

/// Read-only view over a stored solution.
pub struct SolutionView<'a> {
    game: &'a Game,
    solution: &'a EquilibriumSolution,
    index: HashMap<PointKey, usize>,
}

impl<'a> SolutionView<'a> {
    pub fn new(game: &'a Game, solution: &'a EquilibriumSolution) -> Self {
        let index = solution
            .stage_table
            .iter()
            .enumerate()
            .map(|(i, e)| (e.key.clone(), i))
            .collect();
        SolutionView {
            game,
            solution,
            index,
        }
    }

    pub fn solution(&self) -> &EquilibriumSolution {
        self.solution
    }

    pub fn get(&self, t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Option<&Arc<StageEntry>> {
        let t = if self.solution.mode.is_stationary() { 0 } else { t };
        self.index
            .get(&PointKey::new(t, beliefs, z))
            .map(|i| &self.solution.stage_table[*i])
    }
}

impl StrategyView for SolutionView<'_> {
    fn game(&self) -> &Game {
        self.game
    }

    fn dynamics(&self) -> BeliefDynamics {
        self.solution.mode.dynamics()
    }

    fn stage(&mut self, t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<StageEntry>> {
        self.get(t, beliefs, z).cloned().ok_or_else(|| Error::MissingPoint {
            t,
            beliefs: beliefs.marginals().cloned().collect(),
            z: z.to_vec(),
        })
    }
}

/// Most likely joint action under `prescriptions` and `beliefs` (lowest index
/// on ties) and its probability.
pub fn modal_action(game: &Game, beliefs: &BeliefProfile, prescriptions: &PrescriptionProfile) -> (usize, f64) {
    let l = game.layout();
    let prior = beliefs.joint(l);
    let pa = crate::belief::lm_action_probs(l, &prescriptions.lm_all());
    let mut best = (0, -1.0);
    for ja in 0..l.joint_actions() {
        let p: f64 = prior.iter().zip(&pa).map(|(b, r)| b * r[ja]).sum();
        if p > best.1 + 1e-12 {
            best = (ja, p);
        }
    }
    best
}
