//! Recursion over the mean field alone, for games in which no leader or major
//! has a private state.

use std::collections::HashMap;
use std::sync::Arc;

use super::{
    modal_action, EquilibriumSolution, PointKey, SolveMode, SolverConfig, StageEntry,
    TrajectoryStep,
};
use crate::belief::{BeliefProfile, Prescription, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::grid::{product, ProfileIndex};
use crate::model::prob;
use crate::model::{EvalArgs, Game};
use crate::stage::{pick, PlayerValues, StageSolution};

struct Eval {
    minor_q: Vec<Vec<f64>>,
    major_q: Vec<Vec<f64>>,
    values: PlayerValues,
}

struct PublicSolver<'g> {
    game: &'g Game,
    config: SolverConfig,
    /// Unconditional action distributions per leader/major.
    lm_dists: Vec<Vec<Vec<f64>>>,
    minor: Vec<Prescription>,
    horizon: u32,
    trivial: BeliefProfile,
    memo: HashMap<(u32, Vec<i64>), Arc<StageEntry>>,
}

impl<'g> PublicSolver<'g> {
    fn values_at(&mut self, t: u32, z: &[f64]) -> Result<Arc<PlayerValues>> {
        if t > self.horizon {
            return Ok(Arc::new(PlayerValues::zeros(self.game.layout())));
        }
        Ok(self.solve(t, z)?.solution.values.clone())
    }

    fn profile(&self, lm: &[usize], f: usize) -> PrescriptionProfile {
        let l = self.game.layout();
        let one = |p: usize| Prescription {
            rows: vec![self.lm_dists[p][lm[p]].clone()],
        };
        PrescriptionProfile {
            leaders: (0..l.num_leaders).map(one).collect(),
            majors: (l.num_leaders..l.num_lm()).map(one).collect(),
            minor: self.minor[f].clone(),
        }
    }

    fn evaluate(&mut self, t: u32, z: &[f64], lm: &[usize], f: usize) -> Result<Eval> {
        let game = self.game;
        let l = game.layout();
        let delta = game.discount();
        let args = EvalArgs { z, xi: None };
        let gf = self.minor[f].clone();
        let dists: Vec<Vec<f64>> = lm
            .iter()
            .enumerate()
            .map(|(p, i)| self.lm_dists[p][*i].clone())
            .collect();
        let prob_of = |ja: usize, skip: Option<usize>| -> f64 {
            l.action_digits(ja)
                .iter()
                .enumerate()
                .filter(|(p, _)| Some(*p) != skip)
                .map(|(p, a)| dists[p][*a])
                .product()
        };

        let next = crate::belief::update_mean_field(
            game,
            &self.trivial,
            z,
            &self.profile(lm, f),
        )?
        .probs;
        let cont = if delta == 0.0 {
            Arc::new(PlayerValues::zeros(l))
        } else {
            self.values_at(t + 1, &next)?
        };

        let mut minor_q = vec![vec![0.0; l.minor_actions]; l.minor_states];
        let mut values = PlayerValues::zeros(l);
        let mut major_q = vec![Vec::new(); l.num_majors];
        let mut lm_q: Vec<Vec<f64>> = (0..l.num_lm()).map(|p| vec![0.0; l.player_actions(p)]).collect();
        for ja in 0..l.joint_actions() {
            let w = prob_of(ja, None);
            if w > 0.0 {
                for xf in 0..l.minor_states {
                    for af in 0..l.minor_actions {
                        let r = game.minor_reward(&args, 0, ja, xf, af);
                        let row = game.minor_kernel().row(&args, l.minor_row(0, ja, xf, af));
                        let c: f64 = row.iter().zip(&cont.minor).map(|(q, v)| q * v).sum();
                        minor_q[xf][af] += w * (r + delta * c);
                    }
                }
            }
            for (p, q) in lm_q.iter_mut().enumerate() {
                let wo = prob_of(ja, Some(p));
                if wo == 0.0 {
                    continue;
                }
                let r = game.lm_reward(p, &args, 0, ja, &gf.rows);
                q[l.action_digits(ja)[p]] += wo * (r + delta * cont.lm(p)[0]);
            }
        }
        for xf in 0..l.minor_states {
            values.minor[xf] = minor_q[xf].iter().zip(&gf.rows[xf]).map(|(q, g)| q * g).sum();
        }
        for (p, q) in lm_q.into_iter().enumerate() {
            values.lm_mut(p)[0] = q.iter().zip(&dists[p]).map(|(q, g)| q * g).sum();
            if p >= l.num_leaders {
                major_q[p - l.num_leaders] = q;
            }
        }
        Ok(Eval {
            minor_q,
            major_q,
            values,
        })
    }

    fn followers(&mut self, t: u32, z: &[f64], leaders: &[usize]) -> Result<Vec<(ProfileIndex, Eval)>> {
        let tie = self.config.tolerances.tie;
        let l = self.game.layout();
        let major_sizes: Vec<usize> = (0..l.num_majors)
            .map(|j| self.lm_dists[l.major_player(j)].len())
            .collect();
        let mut out = Vec::new();
        for majors in product(&major_sizes) {
            for f in 0..self.minor.len() {
                let lm: Vec<usize> = leaders.iter().chain(&majors).copied().collect();
                let e = self.evaluate(t, z, &lm, f)?;
                let minor_ok = e
                    .minor_q
                    .iter()
                    .zip(&e.values.minor)
                    .all(|(q, v)| q.iter().all(|a| *a <= v + tie));
                let majors_ok = e
                    .major_q
                    .iter()
                    .zip(&e.values.majors)
                    .all(|(q, v)| q.iter().all(|a| *a <= v[0] + tie));
                if minor_ok && majors_ok {
                    out.push((
                        ProfileIndex {
                            leaders: leaders.to_vec(),
                            majors: majors.clone(),
                            minor: f,
                        },
                        e,
                    ));
                }
            }
        }
        Ok(out)
    }

    fn solve(&mut self, t: u32, z: &[f64]) -> Result<Arc<StageEntry>> {
        let qz: Vec<i64> = prob::quantize(z).collect();
        if let Some(e) = self.memo.get(&(t, qz.clone())) {
            return Ok(e.clone());
        }
        let tie = self.config.tolerances.tie;
        let selection = self.config.selection;
        let l = self.game.layout();
        let leader_sizes: Vec<usize> = (0..l.num_leaders).map(|i| self.lm_dists[i].len()).collect();
        let mut blocks: HashMap<Vec<usize>, Vec<(ProfileIndex, Eval)>> = HashMap::new();
        for leaders in product(&leader_sizes) {
            let f = self.followers(t, z, &leaders)?;
            blocks.insert(leaders, f);
        }
        let mut skipped = 0;
        let mut passing: Vec<(ProfileIndex, PlayerValues)> = Vec::new();
        for leaders in product(&leader_sizes) {
            for (idx, eq) in &blocks[&leaders] {
                let mut ok = true;
                'outer: for i in 0..l.num_leaders {
                    for d in 0..leader_sizes[i] {
                        let mut dev = leaders.clone();
                        dev[i] = d;
                        let Some((_, sel)) =
                            pick(&blocks[&dev], selection, tie, |(_, e)| e.values.leaders[i][0])
                        else {
                            skipped += 1;
                            continue;
                        };
                        if sel.values.leaders[i][0] > eq.values.leaders[i][0] + tie {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                if ok {
                    passing.push((idx.clone(), eq.values.clone()));
                }
            }
        }
        let chosen = pick(&passing, selection, 1e-9, |(_, v)| {
            v.leaders.iter().map(|x| x[0]).sum()
        })
        .cloned()
        .ok_or_else(|| Error::NoEquilibrium {
            t,
            beliefs: self.trivial.marginals().cloned().collect(),
            z: z.to_vec(),
        })?;
        let (profile, values) = chosen;
        let prescriptions = self.profile(&profile.lm_indices(), profile.minor);
        let entry = Arc::new(StageEntry {
            key: PointKey::new(t, &self.trivial, z),
            beliefs: self.trivial.clone(),
            z: z.to_vec(),
            solution: StageSolution {
                profile,
                prescriptions,
                values: Arc::new(values),
                multiplicity: passing.len(),
            },
            skipped_deviations: skipped,
            off_equilibrium_triggers: 0,
        });
        self.memo.insert((t, qz), entry.clone());
        Ok(entry)
    }
}

/// Solves a game whose leaders and majors all have a single state; the
/// recursion runs over the mean field only and actions are public.
pub fn solve_public_majors(game: &Game, config: &SolverConfig) -> Result<EquilibriumSolution> {
    let l = game.layout();
    if l.joint_states() != 1 {
        return Err(Error::Mode(
            "public-majors mode needs singleton leader and major state spaces".into(),
        ));
    }
    let horizon = game
        .horizon()
        .ok_or_else(|| Error::Mode("finite recursion needs a finite horizon".into()))?;
    config.check_budget(game)?;
    let grid = config.grid;
    let mut solver = PublicSolver {
        game,
        config: config.clone(),
        lm_dists: (0..l.num_lm())
            .map(|p| grid.distributions(l.player_actions(p)))
            .collect(),
        minor: grid.prescriptions(l.minor_states, l.minor_actions),
        horizon,
        trivial: BeliefProfile::initial(game),
        memo: HashMap::new(),
    };
    let mut z = game.spec().initial_mean_field.clone();
    let mut trajectory = Vec::new();
    for t in 1..=horizon {
        let e = solver.solve(t, &z)?;
        let g = e.prescriptions().clone();
        let (ja, p) = modal_action(game, &solver.trivial, &g);
        let next = crate::belief::update_mean_field(game, &solver.trivial, &z, &g)?.probs;
        trajectory.push(TrajectoryStep {
            t,
            beliefs: solver.trivial.clone(),
            z: z.clone(),
            prescriptions: g,
            values: e.values().clone(),
            modal_action: l.action_digits(ja).to_vec(),
            modal_probability: p,
        });
        z = next;
    }
    let table = solver.memo.into_values().collect();
    Ok(EquilibriumSolution::assemble(
        SolveMode::PublicMajors,
        config.clone(),
        Some(horizon),
        table,
        trajectory,
        Vec::new(),
    ))
}
