use std::collections::HashMap;
use std::sync::Arc;

use super::{
    modal_action, EquilibriumSolution, PointKey, SolveMode, SolverConfig, StageEntry,
    StrategyView, TrajectoryStep,
};
use crate::belief::{
    self, joint_belief, BeliefDynamics, BeliefProfile, PrescriptionProfile,
};
use crate::error::{Error, Result};
use crate::grid::Candidates;
use crate::model::{EvalArgs, Game};
use crate::stage::{PlayerValues, StagePoint, StageSettings};

/// Backward recursion over reachable points, memoized on quantized keys.
pub struct FiniteSolver<'g> {
    game: &'g Game,
    cands: Arc<Candidates>,
    config: SolverConfig,
    settings: StageSettings,
    horizon: u32,
    memo: HashMap<PointKey, Arc<StageEntry>>,
    zeros: Arc<PlayerValues>,
}

impl<'g> FiniteSolver<'g> {
    pub fn new(game: &'g Game, config: SolverConfig) -> Result<Self> {
        let horizon = game
            .horizon()
            .ok_or_else(|| Error::Mode("finite recursion needs a finite horizon".into()))?;
        Self::with_dynamics(game, config, BeliefDynamics::Bayesian, horizon)
    }

    pub fn with_dynamics(
        game: &'g Game,
        config: SolverConfig,
        dynamics: BeliefDynamics,
        horizon: u32,
    ) -> Result<Self> {
        config.check_budget(game)?;
        if dynamics == BeliefDynamics::Aggregate {
            let l = game.layout();
            if l.num_leaders != 1 || l.num_majors != 0 {
                return Err(Error::Mode(
                    "a leader population is modelled by one leader slot and no majors".into(),
                ));
            }
        }
        Ok(FiniteSolver {
            game,
            cands: Arc::new(Candidates::new(game, config.grid)),
            settings: config.stage_settings(dynamics),
            config,
            horizon,
            memo: HashMap::new(),
            zeros: Arc::new(PlayerValues::zeros(game.layout())),
        })
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn candidates(&self) -> &Candidates {
        &self.cands
    }

    /// Values at `(t, beliefs, z)`; zero past the horizon.
    pub fn value_at(
        &mut self,
        t: u32,
        beliefs: &BeliefProfile,
        z: &[f64],
    ) -> Result<Arc<PlayerValues>> {
        if t > self.horizon {
            return Ok(self.zeros.clone());
        }
        Ok(self.solve_stage_recursive(t, beliefs, z)?.solution.values.clone())
    }

    /// Selected stage fixed point at `(t, beliefs, z)` for `1 <= t <= T`.
    pub fn solve_stage_recursive(
        &mut self,
        t: u32,
        beliefs: &BeliefProfile,
        z: &[f64],
    ) -> Result<Arc<StageEntry>> {
        if t == 0 || t > self.horizon {
            return Err(Error::Argument(format!(
                "period {t} outside 1..={}",
                self.horizon
            )));
        }
        let key = PointKey::new(t, beliefs, z);
        if let Some(e) = self.memo.get(&key) {
            return Ok(e.clone());
        }
        if self.memo.len() >= self.config.max_points {
            return Err(Error::Budget {
                needed: self.memo.len() as u128 + 1,
                budget: self.config.max_points as u128,
            });
        }
        let cands = self.cands.clone();
        let settings = self.settings;
        let mut point = StagePoint::new(self.game, &cands, settings, beliefs.clone(), z.to_vec());
        let mut next = |b: &BeliefProfile, z: &[f64]| self.value_at(t + 1, b, z);
        let outcome = point.leader_stage_equilibrium(&mut next)?;
        let Some(chosen) = outcome.select(settings.selection, beliefs) else {
            return Err(Error::NoEquilibrium {
                t,
                beliefs: beliefs.marginals().cloned().collect(),
                z: z.to_vec(),
            });
        };
        let entry = Arc::new(StageEntry {
            key: key.clone(),
            beliefs: beliefs.clone(),
            z: z.to_vec(),
            solution: chosen.clone(),
            skipped_deviations: outcome.skipped_deviations,
            off_equilibrium_triggers: outcome.off_equilibrium_triggers,
        });
        self.memo.insert(key, entry.clone());
        Ok(entry)
    }

    /// Forward pass along the modal action path from the given start.
    pub fn forward(
        &mut self,
        beliefs: BeliefProfile,
        z: Vec<f64>,
    ) -> Result<Vec<TrajectoryStep>> {
        let game = self.game;
        let dynamics = self.settings.dynamics;
        let (mut b, mut z) = (beliefs, z);
        let mut steps = Vec::new();
        for t in 1..=self.horizon {
            let entry = self.solve_stage_recursive(t, &b, &z)?;
            let g = entry.prescriptions();
            let (ja, p) = modal_action(game, &b, g);
            steps.push(TrajectoryStep {
                t,
                beliefs: b.clone(),
                z: z.clone(),
                prescriptions: g.clone(),
                values: entry.values().clone(),
                modal_action: game.layout().action_digits(ja).to_vec(),
                modal_probability: p,
            });
            let (nb, nz) = advance(game, dynamics, &b, &z, g, ja)?;
            b = nb;
            z = nz;
        }
        Ok(steps)
    }

    pub fn into_table(self) -> Vec<Arc<StageEntry>> {
        self.memo.into_values().collect()
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }
}

/// Successor public point after observing joint action `ja` under the
/// prescriptions `g`.
pub fn advance(
    game: &Game,
    dynamics: BeliefDynamics,
    b: &BeliefProfile,
    z: &[f64],
    g: &PrescriptionProfile,
    ja: usize,
) -> Result<(BeliefProfile, Vec<f64>)> {
    let nz = belief::update_mean_field_with(game, dynamics, b, z, g)?.probs;
    let nb = match dynamics {
        BeliefDynamics::Bayesian => belief::update_belief(game, b, z, &g.lm_all(), ja)?,
        BeliefDynamics::Aggregate => BeliefProfile::new(
            vec![belief::update_leader_mean_field(game, &b.leaders[0], z, g)?.probs],
            vec![],
        ),
    };
    Ok((nb, nz))
}

impl StrategyView for FiniteSolver<'_> {
    fn game(&self) -> &Game {
        self.game
    }

    fn dynamics(&self) -> BeliefDynamics {
        self.settings.dynamics
    }

    fn stage(&mut self, t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<StageEntry>> {
        self.solve_stage_recursive(t, beliefs, z)
    }
}

/// Solves a finite-horizon game from its initial belief and mean field.
pub fn solve_game(game: &Game, config: &SolverConfig) -> Result<EquilibriumSolution> {
    let mut solver = FiniteSolver::new(game, config.clone())?;
    let trajectory = solver.forward(
        BeliefProfile::initial(game),
        game.spec().initial_mean_field.clone(),
    )?;
    let horizon = solver.horizon;
    Ok(EquilibriumSolution::assemble(
        SolveMode::Finite,
        config.clone(),
        Some(horizon),
        solver.into_table(),
        trajectory,
        Vec::new(),
    ))
}

/// Solves a game whose single leader slot stands for a homogeneous leader
/// population; the public state is `(leader mean field, z)`.
pub fn solve_infinite_leaders(game: &Game, config: &SolverConfig) -> Result<EquilibriumSolution> {
    let horizon = game
        .horizon()
        .ok_or_else(|| Error::Mode("finite recursion needs a finite horizon".into()))?;
    let mut solver =
        FiniteSolver::with_dynamics(game, config.clone(), BeliefDynamics::Aggregate, horizon)?;
    let xi = game.initial_marginals().remove(0);
    let trajectory = solver.forward(
        BeliefProfile::new(vec![xi], vec![]),
        game.spec().initial_mean_field.clone(),
    )?;
    Ok(EquilibriumSolution::assemble(
        SolveMode::InfiniteLeaders,
        config.clone(),
        Some(horizon),
        solver.into_table(),
        trajectory,
        Vec::new(),
    ))
}

/// Mean-field trajectory `z_1..z_T` generated by the strategies along the
/// action path chosen by `path(t, P(joint action))`.
pub fn mean_field_trajectory(
    view: &mut dyn StrategyView,
    horizon: u32,
    path: &dyn Fn(u32, &[f64]) -> usize,
) -> Result<Vec<Vec<f64>>> {
    let game = view.game().clone();
    let l = game.layout();
    let dynamics = view.dynamics();
    let mut b = match dynamics {
        BeliefDynamics::Bayesian => BeliefProfile::initial(&game),
        BeliefDynamics::Aggregate => BeliefProfile::new(vec![game.initial_marginals().remove(0)], vec![]),
    };
    let mut z = game.spec().initial_mean_field.clone();
    // `z` follows the solver's own update so stored points are found; `lambda`
    // is the independently summed trajectory that is returned.
    let mut lambda = z.clone();
    let mut out = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        out.push(lambda.clone());
        if t == horizon {
            break;
        }
        let entry = view.stage(t, &b, &z)?;
        let g = entry.prescriptions();
        let args = EvalArgs {
            z: &lambda,
            xi: (dynamics == BeliefDynamics::Aggregate).then(|| b.leaders[0].as_slice()),
        };
        let mut next = vec![0.0; l.minor_states];
        let mut action_mass = vec![0.0; l.joint_actions()];
        for js in 0..l.joint_states() {
            let xs = l.state_digits(js);
            let pb = joint_belief(&b, xs);
            for ja in 0..l.joint_actions() {
                let acts = l.action_digits(ja);
                let w: f64 = pb
                    * xs.iter()
                        .zip(acts)
                        .enumerate()
                        .map(|(p, (x, a))| g.lm(p).rows[*x][*a])
                        .product::<f64>();
                action_mass[ja] += w;
                for xf in 0..l.minor_states {
                    for af in 0..l.minor_actions {
                        let wf = w * lambda[xf] * g.minor.rows[xf][af];
                        if wf == 0.0 {
                            continue;
                        }
                        let row = game.minor_kernel().row(&args, l.minor_row(js, ja, xf, af));
                        for (x2, q) in row.iter().enumerate() {
                            next[x2] += wf * q;
                        }
                    }
                }
            }
        }
        let ja = path(t, &action_mass);
        (b, z) = advance(&game, dynamics, &b, &z, g, ja)?;
        lambda = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{zero_rewards, RandomGame, SpaceSize};

    #[test]
    fn past_horizon_values_are_zero() {
        let game = RandomGame::default().generate(1).validate().unwrap();
        let mut s = FiniteSolver::new(&game, SolverConfig::default()).unwrap();
        let v = s
            .value_at(3, &BeliefProfile::initial(&game), &game.spec().initial_mean_field)
            .unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
        assert!(s.solve_stage_recursive(3, &BeliefProfile::initial(&game), &[0.5, 0.5]).is_err());
    }

    #[test]
    fn zero_rewards_give_zero_values() {
        let mut spec = RandomGame {
            majors: vec![SpaceSize::new(2, 2)],
            ..RandomGame::default()
        }
        .generate(2);
        zero_rewards(&mut spec);
        let game = spec.validate().unwrap();
        let sol = solve_game(&game, &SolverConfig::default()).unwrap();
        assert_eq!(sol.trajectory.len(), 2);
        for e in &sol.stage_table {
            assert!(e.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn trajectory_matches_lambda() {
        let (game, sol) = (0..)
            .find_map(|seed| {
                let game = RandomGame::default().generate(seed).validate().unwrap();
                solve_game(&game, &SolverConfig::default()).ok().map(|s| (game, s))
            })
            .unwrap();
        let modal = |_: u32, mass: &[f64]| {
            let mut best = 0;
            for (i, m) in mass.iter().enumerate() {
                if *m > mass[best] + 1e-12 {
                    best = i;
                }
            }
            best
        };
        let mut view = sol.view(&game);
        let zs = mean_field_trajectory(&mut view, 2, &modal).unwrap();
        for (a, b) in zs.iter().zip(sol.mean_fields()) {
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
