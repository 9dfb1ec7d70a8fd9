use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gametree::{GameTree, StrategyLookup};
use super::Status;
use crate::belief::{BeliefProfile, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::grid::{product, Candidates, ProfileIndex};
use crate::model::Game;
use crate::solver::{reachable_domain, Assignment, DomainPoint, PointKey, SolverConfig};
use crate::stage::{ex_ante, pick};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub status: Status,
    /// Every surviving assignment over the reachable domain.
    #[serde(with = "entries")]
    pub survivors: Vec<Assignment>,
    pub domain_points: usize,
    /// Game-tree evaluations performed.
    pub evaluations: usize,
    pub notes: Vec<String>,
}

/// Assignments as lists of `[key, profile]` pairs, since their keys are not strings.
mod entries {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::grid::ProfileIndex;
    use crate::solver::{Assignment, PointKey};

    pub fn serialize<S: Serializer>(v: &[Assignment], s: S) -> Result<S::Ok, S::Error> {
        let lists: Vec<Vec<(&PointKey, &ProfileIndex)>> = v.iter().map(|a| a.iter().collect()).collect();
        lists.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Assignment>, D::Error> {
        let lists = Vec::<Vec<(PointKey, ProfileIndex)>>::deserialize(d)?;
        Ok(lists.into_iter().map(|l| l.into_iter().collect()).collect())
    }
}

struct Eval {
    followers_ok: bool,
    /// Per leader, game-tree policy value by own state.
    leaders: Vec<Vec<f64>>,
}

struct PointSearch<'a> {
    game: &'a Game,
    cands: &'a Candidates,
    config: &'a SolverConfig,
    assignment: &'a Assignment,
    point: &'a DomainPoint,
    node_budget: u64,
    cache: HashMap<ProfileIndex, Arc<Eval>>,
    evaluations: usize,
}

impl PointSearch<'_> {
    fn eval(&mut self, idx: &ProfileIndex) -> Result<Arc<Eval>> {
        if let Some(e) = self.cache.get(idx) {
            return Ok(e.clone());
        }
        self.evaluations += 1;
        let (game, cands, assignment) = (self.game, self.cands, self.assignment);
        let mut lookup = |t: u32, b: &BeliefProfile, z: &[f64]| {
            assignment
                .get(&PointKey::new(t, b, z))
                .map(|i| Arc::new(cands.resolve(i)))
                .ok_or_else(|| Error::MissingPoint {
                    t,
                    beliefs: b.marginals().cloned().collect(),
                    z: z.to_vec(),
                })
        };
        let root: Arc<PrescriptionProfile> = Arc::new(cands.resolve(idx));
        let (t, b, z) = (self.point.key.t, &self.point.beliefs, &self.point.z);
        let tie = self.config.tolerances.tie;
        let l = game.layout();
        let lookup: &mut StrategyLookup<'_> = &mut lookup;
        let mut tree = GameTree::new(game, lookup, self.node_budget)?.with_root(self.point.key.clone(), root);
        tree.minor_values(t, b, z)?;
        let mut ok = tree.margins.iter().all(|m| m.margin >= -tie);
        for j in 0..l.num_majors {
            if !ok {
                break;
            }
            tree.lm_values(l.major_player(j), t, b, z)?;
            ok = tree.margins.iter().all(|m| m.margin >= -tie);
        }
        let leaders = (0..l.num_leaders)
            .map(|i| Ok(tree.lm_values(i, t, b, z)?.iter().map(|v| v.policy).collect()))
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let e = Arc::new(Eval {
            followers_ok: ok,
            leaders,
        });
        self.cache.insert(idx.clone(), e.clone());
        Ok(e)
    }

    fn followers(&mut self, leaders: &[usize]) -> Result<Vec<ProfileIndex>> {
        let mut out = Vec::new();
        for m in self.cands.major_profiles() {
            for f in 0..self.cands.minor.len() {
                let idx = ProfileIndex {
                    leaders: leaders.to_vec(),
                    majors: m.clone(),
                    minor: f,
                };
                if self.eval(&idx)?.followers_ok {
                    out.push(idx);
                }
            }
        }
        Ok(out)
    }

    /// Leader `i`'s values at the follower block selected after it plays `dev`.
    fn deviation_value(&mut self, dev: &[usize], i: usize) -> Result<Option<Vec<f64>>> {
        let prior = self.point.beliefs.leaders[i].clone();
        let mut scored = Vec::new();
        for idx in self.followers(dev)? {
            let e = self.eval(&idx)?;
            let s = ex_ante(&prior, &e.leaders[i]);
            scored.push((e, s));
        }
        let c = self.config;
        Ok(pick(&scored, c.selection, c.tolerances.tie, |(_, s)| *s).map(|(e, _)| e.leaders[i].clone()))
    }

    fn survivors(&mut self) -> Result<(Vec<ProfileIndex>, usize)> {
        let tie = self.config.tolerances.tie;
        let sizes: Vec<usize> = self.cands.leaders.iter().map(Vec::len).collect();
        let mut devs: HashMap<(Vec<usize>, usize), Option<Vec<f64>>> = HashMap::new();
        let mut skipped = 0;
        let mut out = Vec::new();
        for leaders in product(&sizes) {
            for idx in self.followers(&leaders)? {
                let eq = self.eval(&idx)?;
                let mut ok = true;
                'players: for (i, n) in sizes.iter().enumerate() {
                    for d in 0..*n {
                        let mut dev = leaders.clone();
                        dev[i] = d;
                        let key = (dev, i);
                        let dv = match devs.get(&key) {
                            Some(v) => v.clone(),
                            None => {
                                let v = self.deviation_value(&key.0, i)?;
                                devs.insert(key, v.clone());
                                v
                            }
                        };
                        let Some(dv) = dv else {
                            skipped += 1;
                            continue;
                        };
                        let prior = &self.point.beliefs.leaders[i];
                        if prior
                            .iter()
                            .enumerate()
                            .any(|(x, p)| *p > 0.0 && dv[x] > eq.leaders[i][x] + tie)
                        {
                            ok = false;
                            break 'players;
                        }
                    }
                }
                if ok {
                    out.push(idx);
                }
            }
        }
        Ok((out, skipped))
    }
}

/// Exhaustive search for equilibria over the reachable domain, independent
/// of the stage solver. Followers are checked against every pure
/// history-dependent deviation on the exact game tree; leaders are checked
/// against every grid prescription with followers re-equilibrated the same
/// way. Points are processed from the last period backwards, so only
/// continuations that survived are ever extended. Returns `NotChecked` once
/// more than `budget` partial assignments would be alive.
pub fn brute_force_smfe(game: &Game, config: &SolverConfig, budget: usize) -> Result<BruteForceResult> {
    let not_checked = |domain_points, why: String| BruteForceResult {
        status: Status::NotChecked,
        survivors: Vec::new(),
        domain_points,
        evaluations: 0,
        notes: vec![why],
    };
    let domain = match reachable_domain(game, config) {
        Ok(d) => d,
        Err(Error::Budget { needed, budget }) => {
            return Ok(not_checked(0, format!("domain exceeds {budget} points (needed {needed})")));
        }
        Err(e) => return Err(e),
    };
    let cands = Candidates::new(game, config.grid);
    let node_budget = (config.max_points as u64).saturating_mul(1024);
    let mut partials = vec![Assignment::new()];
    let mut evaluations = 0;
    let mut skipped = 0;
    for t in (1..=domain.horizon).rev() {
        let mut next = Vec::new();
        for assignment in &partials {
            let mut per_point = Vec::new();
            for point in domain.level(t) {
                let mut search = PointSearch {
                    game,
                    cands: &cands,
                    config,
                    assignment,
                    point,
                    node_budget,
                    cache: HashMap::new(),
                    evaluations: 0,
                };
                let found = search.survivors();
                evaluations += search.evaluations;
                let (found, s) = match found {
                    Ok(r) => r,
                    Err(Error::Budget { needed, budget }) => {
                        return Ok(not_checked(
                            domain.len(),
                            format!("game tree exceeds {budget} nodes (needed {needed})"),
                        ));
                    }
                    Err(e) => return Err(e),
                };
                skipped += s;
                per_point.push((point.key.clone(), found));
            }
            let combos = per_point
                .iter()
                .map(|(_, s)| s.len())
                .try_fold(1usize, |a, n| a.checked_mul(n))
                .unwrap_or(usize::MAX);
            if next.len().saturating_add(combos) > budget {
                return Ok(not_checked(
                    domain.len(),
                    format!("more than {budget} partial assignments at period {t}"),
                ));
            }
            let sizes: Vec<usize> = per_point.iter().map(|(_, s)| s.len()).collect();
            for choice in product(&sizes) {
                let mut a = assignment.clone();
                for ((key, sols), c) in per_point.iter().zip(&choice) {
                    a.insert(key.clone(), sols[*c].clone());
                }
                next.push(a);
            }
        }
        partials = next;
    }
    Ok(BruteForceResult {
        status: Status::Passed,
        survivors: partials,
        domain_points: domain.len(),
        evaluations,
        notes: vec![format!("{skipped} leader deviations had no follower equilibrium")],
    })
}
