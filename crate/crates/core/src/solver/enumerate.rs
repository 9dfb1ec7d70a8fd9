//! Every recursive equilibrium on a finite domain, not just the selected one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::finite::advance;
use super::{PointKey, SolverConfig};
use crate::belief::{BeliefDynamics, BeliefProfile};
use crate::error::{Error, Result};
use crate::grid::{Candidates, ProfileIndex};
use crate::model::Game;
use crate::stage::{PlayerValues, StagePoint, Terminal};

/// A profile per domain point.
pub type Assignment = BTreeMap<PointKey, ProfileIndex>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub key: PointKey,
    pub beliefs: BeliefProfile,
    pub z: Vec<f64>,
}

/// Points reachable from the initial point under any candidate profile and
/// any observed joint action, by period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub horizon: u32,
    /// `levels[t - 1]`, sorted by key.
    pub levels: Vec<Vec<DomainPoint>>,
}

impl Domain {
    pub fn level(&self, t: u32) -> &[DomainPoint] {
        &self.levels[t as usize - 1]
    }

    pub fn get(&self, key: &PointKey) -> Option<&DomainPoint> {
        let level = self.levels.get((key.t as usize).checked_sub(1)?)?;
        level
            .binary_search_by(|p| p.key.cmp(key))
            .ok()
            .map(|i| &level[i])
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn reachable_domain(game: &Game, config: &SolverConfig) -> Result<Domain> {
    let horizon = game
        .horizon()
        .ok_or_else(|| Error::Mode("the domain is defined for finite horizons".into()))?;
    config.check_budget(game)?;
    let cands = Candidates::new(game, config.grid);
    let profiles = cands.all_profiles();
    let l = game.layout();
    let start = BeliefProfile::initial(game);
    let z0 = game.spec().initial_mean_field.clone();
    let mut level = BTreeMap::new();
    level.insert(
        PointKey::new(1, &start, &z0),
        DomainPoint {
            key: PointKey::new(1, &start, &z0),
            beliefs: start,
            z: z0,
        },
    );
    let mut levels = Vec::new();
    let mut total = 1;
    for t in 1..=horizon {
        let current: Vec<DomainPoint> = level.into_values().collect();
        level = BTreeMap::new();
        if t < horizon {
            for p in &current {
                for idx in &profiles {
                    let g = cands.resolve(idx);
                    for ja in 0..l.joint_actions() {
                        let (b, z) = advance(game, BeliefDynamics::Bayesian, &p.beliefs, &p.z, &g, ja)?;
                        let key = PointKey::new(t + 1, &b, &z);
                        if level.contains_key(&key) {
                            continue;
                        }
                        total += 1;
                        if total > config.max_points {
                            return Err(Error::Budget {
                                needed: total as u128,
                                budget: config.max_points as u128,
                            });
                        }
                        level.insert(key.clone(), DomainPoint { key, beliefs: b, z });
                    }
                }
            }
        }
        levels.push(current);
    }
    Ok(Domain { horizon, levels })
}

struct Partial {
    assignment: Assignment,
    /// Values at the most recently assigned level.
    values: HashMap<PointKey, Arc<PlayerValues>>,
}

/// Every assignment of stage fixed points to domain points, built from the
/// last period backwards. Fails with a budget error once more than `budget`
/// partial assignments are alive.
pub fn enumerate_recursive_equilibria(
    game: &Game,
    config: &SolverConfig,
    domain: &Domain,
    budget: usize,
) -> Result<Vec<Assignment>> {
    let cands = Candidates::new(game, config.grid);
    let settings = config.stage_settings(BeliefDynamics::Bayesian);
    let mut partials = vec![Partial {
        assignment: Assignment::new(),
        values: HashMap::new(),
    }];
    for t in (1..=domain.horizon).rev() {
        let mut next = Vec::new();
        for partial in &partials {
            let mut per_point = Vec::new();
            for p in domain.level(t) {
                let mut point =
                    StagePoint::new(game, &cands, settings, p.beliefs.clone(), p.z.clone());
                let outcome = if t == domain.horizon {
                    point.leader_stage_equilibrium(&mut Terminal::new(game.layout()))?
                } else {
                    let mut lookup = |b: &BeliefProfile, z: &[f64]| {
                        let key = PointKey::new(t + 1, b, z);
                        partial.values.get(&key).cloned().ok_or_else(|| Error::MissingPoint {
                            t: t + 1,
                            beliefs: b.marginals().cloned().collect(),
                            z: z.to_vec(),
                        })
                    };
                    point.leader_stage_equilibrium(&mut lookup)?
                };
                per_point.push((p.key.clone(), outcome.solutions));
            }
            let combos: usize = per_point
                .iter()
                .map(|(_, s)| s.len())
                .try_fold(1usize, |a, n| a.checked_mul(n))
                .unwrap_or(usize::MAX);
            if next.len().saturating_add(combos) > budget {
                return Err(Error::Budget {
                    needed: (next.len() as u128).saturating_add(combos as u128),
                    budget: budget as u128,
                });
            }
            let sizes: Vec<usize> = per_point.iter().map(|(_, s)| s.len()).collect();
            for choice in crate::grid::product(&sizes) {
                let mut assignment = partial.assignment.clone();
                let mut values = HashMap::new();
                for ((key, sols), c) in per_point.iter().zip(&choice) {
                    assignment.insert(key.clone(), sols[*c].profile.clone());
                    values.insert(key.clone(), sols[*c].values.clone());
                }
                next.push(Partial { assignment, values });
            }
        }
        partials = next;
    }
    Ok(partials.into_iter().map(|p| p.assignment).collect())
}

/// Restriction of an assignment to points reached with positive probability
/// from the initial point.
pub fn on_path(game: &Game, config: &SolverConfig, assignment: &Assignment) -> Result<Assignment> {
    let cands = Candidates::new(game, config.grid);
    let l = game.layout();
    let mut out = Assignment::new();
    let mut frontier = vec![(BeliefProfile::initial(game), game.spec().initial_mean_field.clone())];
    let horizon = game.horizon().unwrap_or(0);
    for t in 1..=horizon {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (b, z) in frontier {
            let key = PointKey::new(t, &b, &z);
            let idx = assignment.get(&key).ok_or_else(|| Error::MissingPoint {
                t,
                beliefs: b.marginals().cloned().collect(),
                z: z.clone(),
            })?;
            out.insert(key, idx.clone());
            if t == horizon {
                continue;
            }
            let g = cands.resolve(idx);
            let prior = b.joint(l);
            let pa = crate::belief::lm_action_probs(l, &g.lm_all());
            for ja in 0..l.joint_actions() {
                let p: f64 = prior.iter().zip(&pa).map(|(w, r)| w * r[ja]).sum();
                if p <= 0.0 {
                    continue;
                }
                let (nb, nz) = advance(game, BeliefDynamics::Bayesian, &b, &z, &g, ja)?;
                if seen.insert(PointKey::new(t + 1, &nb, &nz)) {
                    next.push((nb, nz));
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RandomGame;
    use crate::solver::solve_game;

    #[test]
    fn selected_solution_is_among_enumerated() {
        for seed in 0..12 {
            let game = RandomGame::default().generate(seed).validate().unwrap();
            let config = SolverConfig::default();
            let domain = reachable_domain(&game, &config).unwrap();
            assert_eq!(domain.level(1).len(), 1);
            let Ok(all) = enumerate_recursive_equilibria(&game, &config, &domain, 10_000) else {
                continue;
            };
            let sol = match solve_game(&game, &config) {
                Ok(s) => s,
                Err(Error::NoEquilibrium { .. }) => {
                    assert!(all.is_empty(), "seed {seed}");
                    continue;
                }
                Err(e) => panic!("{e}"),
            };
            let selected: Assignment = sol
                .stage_table
                .iter()
                .map(|e| (e.key.clone(), e.solution.profile.clone()))
                .collect();
            let found = all.iter().any(|a| {
                selected.iter().all(|(k, v)| a.get(k) == Some(v))
            });
            assert!(found, "seed {seed}");
        }
    }
}
