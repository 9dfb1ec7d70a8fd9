use std::collections::HashMap;
use std::sync::Arc;

use super::{CertificationReport, Margin, Player};
use crate::belief::{self, BeliefDynamics, BeliefProfile, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::grid::{product, Candidates};
use crate::model::Game;
use crate::solver::{EquilibriumSolution, PointKey, SolutionView, StageEntry};
use crate::stage::{ex_ante, pick, PlayerValues, Selection};

/// Values of one profile at one point with continuation taken from the table.
struct Naive {
    minor_q: Vec<Vec<f64>>,
    lm_q: Vec<Vec<Vec<f64>>>,
    values: PlayerValues,
}

struct Checker<'a> {
    game: &'a Game,
    view: SolutionView<'a>,
    dynamics: BeliefDynamics,
    horizon: u32,
    tie: f64,
    selection: Selection,
    report: CertificationReport,
    zeros: Arc<PlayerValues>,
}

impl Checker<'_> {
    fn continuation(
        &mut self,
        t: u32,
        b: &BeliefProfile,
        z: &[f64],
        g: &PrescriptionProfile,
        ja: usize,
    ) -> Result<Option<Arc<PlayerValues>>> {
        if t >= self.horizon {
            return Ok(Some(self.zeros.clone()));
        }
        let (nb, nz) = crate::solver::advance(self.game, self.dynamics, b, z, g, ja)?;
        match self.view.get(t + 1, &nb, &nz) {
            Some(e) => Ok(Some(e.values().clone())),
            None => {
                self.report.missing_points.push(PointKey::new(t + 1, &nb, &nz));
                Ok(None)
            }
        }
    }

    /// Straight summation over joint states and actions. Missing successors
    /// contribute zero and are reported.
    fn evaluate(&mut self, t: u32, b: &BeliefProfile, z: &[f64], g: &PrescriptionProfile) -> Result<Naive> {
        let game = self.game;
        let l = game.layout();
        let delta = game.discount();
        let args = belief::eval_args(self.dynamics, b, z);
        let n = l.num_lm();
        let mut cont: HashMap<usize, Option<Arc<PlayerValues>>> = HashMap::new();
        let mut minor_q = vec![vec![0.0; l.minor_actions]; l.minor_states];
        let mut lm_q: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|p| vec![vec![0.0; l.player_actions(p)]; l.player_states(p)])
            .collect();
        let mut action_mass = vec![0.0; l.joint_actions()];
        for js in 0..l.joint_states() {
            let xs = l.state_digits(js).to_vec();
            let pb = belief::joint_belief(b, &xs);
            for ja in 0..l.joint_actions() {
                let acts = l.action_digits(ja).to_vec();
                let probs: Vec<f64> = (0..n).map(|p| g.lm(p).rows[xs[p]][acts[p]]).collect();
                let all: f64 = probs.iter().product();
                action_mass[ja] += pb * all;
                let w = pb * all;
                let wo: Vec<f64> = (0..n)
                    .map(|p| {
                        let own_ok = p >= l.num_leaders || probs[p] > 0.0;
                        let o: f64 = (0..n)
                            .filter(|q| *q != p)
                            .map(|q| b.marginal(q)[xs[q]] * probs[q])
                            .product();
                        if own_ok {
                            o
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if w == 0.0 && wo.iter().all(|x| *x == 0.0) {
                    continue;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = cont.entry(ja) {
                    let v = if delta == 0.0 {
                        Some(self.zeros.clone())
                    } else {
                        self.continuation(t, b, z, g, ja)?
                    };
                    e.insert(v);
                }
                let Some(v) = cont[&ja].clone() else { continue };
                if w > 0.0 {
                    for xf in 0..l.minor_states {
                        for af in 0..l.minor_actions {
                            let r = game.minor_reward(&args, js, ja, xf, af);
                            let row = game.minor_kernel().row(&args, l.minor_row(js, ja, xf, af));
                            let c: f64 = row.iter().zip(&v.minor).map(|(q, v)| q * v).sum();
                            minor_q[xf][af] += w * (r + delta * c);
                        }
                    }
                }
                for p in 0..n {
                    if wo[p] == 0.0 {
                        continue;
                    }
                    let r = game.lm_reward(p, &args, js, ja, &g.minor.rows);
                    let row = game.lm_kernel(p).row(&args, l.lm_row(js, ja));
                    let c: f64 = row.iter().zip(v.lm(p)).map(|(q, v)| q * v).sum();
                    lm_q[p][xs[p]][acts[p]] += wo[p] * (r + delta * c);
                }
            }
        }
        self.report.off_equilibrium_triggers +=
            cont.keys().filter(|ja| action_mass[**ja] == 0.0).count();
        let mut values = PlayerValues::zeros(l);
        for xf in 0..l.minor_states {
            values.minor[xf] = dot(&minor_q[xf], &g.minor.rows[xf]);
        }
        for p in 0..n {
            let v = values.lm_mut(p);
            for (x, q) in lm_q[p].iter().enumerate() {
                v[x] = dot(q, &g.lm(p).rows[x]);
            }
        }
        Ok(Naive {
            minor_q,
            lm_q,
            values,
        })
    }

    fn followers_ok(&self, e: &Naive, num_leaders: usize) -> bool {
        let tie = self.tie;
        let minor = e
            .minor_q
            .iter()
            .zip(&e.values.minor)
            .all(|(q, v)| q.iter().all(|a| *a <= v + tie));
        let majors = (num_leaders..e.lm_q.len()).all(|p| {
            e.lm_q[p]
                .iter()
                .zip(e.values.lm(p))
                .all(|(q, v)| q.iter().all(|a| *a <= v + tie))
        });
        minor && majors
    }

    fn check_entry(&mut self, cands: &Candidates, grid_dists: &HashMap<usize, Vec<Vec<f64>>>, entry: &StageEntry) -> Result<()> {
        let l = self.game.layout();
        let (t, b, z) = (entry.key.t, &entry.beliefs, &entry.z);
        let g = entry.prescriptions();
        let eq = self.evaluate(t, b, z, g)?;
        self.report.value_mismatch = self
            .report
            .value_mismatch
            .max(eq.values.max_abs_diff(entry.values()));

        for xf in 0..l.minor_states {
            let best = grid_dists[&l.minor_actions]
                .iter()
                .map(|d| dot(&eq.minor_q[xf], d))
                .fold(f64::NEG_INFINITY, f64::max);
            self.report.checked_deviations += grid_dists[&l.minor_actions].len();
            self.report.push(Margin {
                key: entry.key.clone(),
                player: Player::Minor,
                state: xf,
                margin: eq.values.minor[xf] - best,
            });
        }
        for j in 0..l.num_majors {
            let p = l.major_player(j);
            let dists = &grid_dists[&l.player_actions(p)];
            for x in 0..l.player_states(p) {
                let best = dists
                    .iter()
                    .map(|d| dot(&eq.lm_q[p][x], d))
                    .fold(f64::NEG_INFINITY, f64::max);
                self.report.checked_deviations += dists.len();
                self.report.push(Margin {
                    key: entry.key.clone(),
                    player: Player::Major(j),
                    state: x,
                    margin: eq.values.lm(p)[x] - best,
                });
            }
        }

        let followers: Vec<(Vec<usize>, usize)> = product(
            &(0..l.num_majors)
                .map(|j| cands.majors[j].len())
                .collect::<Vec<_>>(),
        )
        .into_iter()
        .flat_map(|m| (0..cands.minor.len()).map(move |f| (m.clone(), f)))
        .collect();
        for i in 0..l.num_leaders {
            let mut worst = vec![f64::INFINITY; l.player_states(i)];
            for d in &cands.leaders[i] {
                self.report.checked_deviations += 1;
                let mut block = Vec::new();
                for (m, f) in &followers {
                    let mut dev = g.clone();
                    dev.leaders[i] = d.clone();
                    for (j, mj) in m.iter().enumerate() {
                        dev.majors[j] = cands.majors[j][*mj].clone();
                    }
                    dev.minor = cands.minor[*f].clone();
                    let e = self.evaluate(t, b, z, &dev)?;
                    if self.followers_ok(&e, l.num_leaders) {
                        let score = ex_ante(&b.leaders[i], &e.values.leaders[i]);
                        block.push((e.values.leaders[i].clone(), score));
                    }
                }
                let Some((dv, _)) = pick(&block, self.selection, self.tie, |(_, s)| *s) else {
                    self.report.skipped_deviations += 1;
                    continue;
                };
                for (x, w) in worst.iter_mut().enumerate() {
                    *w = w.min(eq.values.leaders[i][x] - dv[x]);
                }
            }
            for (x, w) in worst.into_iter().enumerate() {
                if b.leaders[i][x] > 0.0 && w.is_finite() {
                    self.report.push(Margin {
                        key: entry.key.clone(),
                        player: Player::Leader(i),
                        state: x,
                        margin: w,
                    });
                }
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks every stored point against every grid one-stage deviation, with
/// continuation values read from the table itself. Leader deviations
/// re-equilibrate followers by exhaustive search over grid profiles.
pub fn verify_one_shot_deviations(
    game: &Game,
    solution: &EquilibriumSolution,
) -> Result<CertificationReport> {
    let horizon = solution
        .horizon
        .ok_or_else(|| Error::Mode("one-shot certification needs a finite-horizon solution".into()))?;
    let config = &solution.config;
    let cands = Candidates::new(game, config.grid);
    let l = game.layout();
    let mut grid_dists = HashMap::new();
    for n in (0..l.num_lm())
        .map(|p| l.player_actions(p))
        .chain(std::iter::once(l.minor_actions))
    {
        grid_dists
            .entry(n)
            .or_insert_with(|| config.grid.distributions(n));
    }
    let mut checker = Checker {
        game,
        view: solution.view(game),
        dynamics: solution.mode.dynamics(),
        horizon,
        tie: config.tolerances.tie,
        selection: config.selection,
        report: CertificationReport::new(config.grid, config.tolerances.cert),
        zeros: Arc::new(PlayerValues::zeros(l)),
    };
    for entry in &solution.stage_table {
        checker.check_entry(&cands, &grid_dists, entry)?;
    }
    Ok(checker.report.finish())
}
