//! The single-period fixed point at one public point `(beliefs, z)`.
//!
//! A [`StagePoint`] evaluates candidate prescription profiles against a
//! continuation value accessor and extracts minor and major best-response
//! sets, follower equilibria for fixed leader prescriptions, and the leader
//! condition with re-equilibrated followers.

use std::cell::{Cell, OnceCell};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::belief::{self, BeliefDynamics, BeliefProfile, Prescription, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::grid::{product, Candidates, ProfileIndex};
use crate::model::{Game, Layout};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack in every argmax comparison.
    pub tie: f64,
    /// Slack accepted by certification.
    pub cert: f64,
    /// Sup-norm stopping threshold of value iteration.
    pub vi: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tie: 1e-9,
            cert: 1e-7,
            vi: 1e-10,
        }
    }
}

/// Choice among several equilibria.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// First in the canonical profile order.
    #[default]
    Lex,
    /// Worst for the leader(s) concerned, ties broken by profile order.
    Pessimistic,
    /// Best for the leader(s) concerned, ties broken by profile order.
    Optimistic,
}

impl FromStr for Selection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(Selection::Lex),
            "pessimistic" => Ok(Selection::Pessimistic),
            "optimistic" => Ok(Selection::Optimistic),
            _ => Err(Error::Argument(format!("unknown selection rule {s:?}"))),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::Lex => "lex",
            Selection::Pessimistic => "pessimistic",
            Selection::Optimistic => "optimistic",
        })
    }
}

/// Value functions of every player at one point, indexed by private state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerValues {
    pub minor: Vec<f64>,
    pub leaders: Vec<Vec<f64>>,
    #[serde(default)]
    pub majors: Vec<Vec<f64>>,
}

impl PlayerValues {
    pub fn zeros(layout: &Layout) -> Self {
        PlayerValues {
            minor: vec![0.0; layout.minor_states],
            leaders: (0..layout.num_leaders)
                .map(|p| vec![0.0; layout.player_states(p)])
                .collect(),
            majors: (0..layout.num_majors)
                .map(|j| vec![0.0; layout.player_states(layout.major_player(j))])
                .collect(),
        }
    }

    pub fn lm(&self, p: usize) -> &[f64] {
        if p < self.leaders.len() {
            &self.leaders[p]
        } else {
            &self.majors[p - self.leaders.len()]
        }
    }

    pub fn lm_mut(&mut self, p: usize) -> &mut Vec<f64> {
        let k = self.leaders.len();
        if p < k {
            &mut self.leaders[p]
        } else {
            &mut self.majors[p - k]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.minor
            .iter()
            .chain(self.leaders.iter().flatten())
            .chain(self.majors.iter().flatten())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &PlayerValues) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Next-period values at an arbitrary successor point.
pub trait Continuation {
    fn values(&mut self, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<PlayerValues>>;
}

/// Zero continuation past the horizon.
pub struct Terminal(Arc<PlayerValues>);

impl Terminal {
    pub fn new(layout: &Layout) -> Self {
        Terminal(Arc::new(PlayerValues::zeros(layout)))
    }
}

impl Continuation for Terminal {
    fn values(&mut self, _: &BeliefProfile, _: &[f64]) -> Result<Arc<PlayerValues>> {
        Ok(self.0.clone())
    }
}

impl<F> Continuation for F
where
    F: FnMut(&BeliefProfile, &[f64]) -> Result<Arc<PlayerValues>>,
{
    fn values(&mut self, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<PlayerValues>> {
        self(beliefs, z)
    }
}

/// Everything computed for one full candidate profile.
#[derive(Clone, Debug)]
pub struct ProfileEval {
    /// `q[x^f][a^f]`: minor state-action values.
    pub minor_q: Vec<Vec<f64>>,
    /// Per major, `q[x][a]`.
    pub major_q: Vec<Vec<Vec<f64>>>,
    pub values: PlayerValues,
    pub next_z: Vec<f64>,
}

/// One fixed point of the stage problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSolution {
    pub profile: ProfileIndex,
    pub prescriptions: PrescriptionProfile,
    pub values: Arc<PlayerValues>,
    /// Number of fixed points found at this point.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default)]
pub struct StageOutcome {
    /// Every fixed point, in canonical profile order.
    pub solutions: Vec<StageSolution>,
    /// Leader deviations ignored because the deviated follower block had no
    /// equilibrium.
    pub skipped_deviations: usize,
    /// Off-equilibrium belief updates performed while evaluating candidates.
    pub off_equilibrium_triggers: usize,
}

impl StageOutcome {
    pub fn existence(&self) -> bool {
        !self.solutions.is_empty()
    }

    /// Picks one fixed point; non-lexicographic rules rank by the leaders'
    /// total ex-ante value under `beliefs`.
    pub fn select(&self, selection: Selection, beliefs: &BeliefProfile) -> Option<&StageSolution> {
        pick(&self.solutions, selection, 1e-9, |s| {
            (0..s.values.leaders.len())
                .map(|i| ex_ante(&beliefs.leaders[i], &s.values.leaders[i]))
                .sum()
        })
    }
}

pub fn ex_ante(belief: &[f64], values: &[f64]) -> f64 {
    belief.iter().zip(values).map(|(b, v)| b * v).sum()
}

/// Selection over an ordered slice with scores; `tie` guards near-equal scores.
pub fn pick<T>(items: &[T], selection: Selection, tie: f64, score: impl Fn(&T) -> f64) -> Option<&T> {
    let mut it = items.iter();
    let mut best = it.next()?;
    if selection == Selection::Lex {
        return Some(best);
    }
    let mut best_score = score(best);
    for item in it {
        let s = score(item);
        let better = match selection {
            Selection::Pessimistic => s < best_score - tie,
            Selection::Optimistic => s > best_score + tie,
            Selection::Lex => false,
        };
        if better {
            best = item;
            best_score = s;
        }
    }
    Some(best)
}

/// Leader/major part of a profile: action probabilities and successor beliefs.
struct LmPart {
    pa: Vec<Vec<f64>>,
    succ: Vec<OnceCell<Arc<BeliefProfile>>>,
}

/// Settings shared by every stage computation of a solve.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageSettings {
    pub tolerances: Tolerances,
    pub selection: Selection,
    pub dynamics: BeliefDynamics,
}

/// The stage problem at one point.
pub struct StagePoint<'a> {
    game: &'a Game,
    cands: &'a Candidates,
    settings: StageSettings,
    beliefs: BeliefProfile,
    z: Vec<f64>,
    prior: Vec<f64>,
    other_weight: Vec<Vec<f64>>,
    lm_parts: HashMap<Vec<usize>, Arc<LmPart>>,
    evals: HashMap<ProfileIndex, Arc<ProfileEval>>,
    fbe: HashMap<Vec<usize>, Arc<Vec<ProfileIndex>>>,
    triggers: Cell<usize>,
}

impl<'a> StagePoint<'a> {
    pub fn new(
        game: &'a Game,
        cands: &'a Candidates,
        settings: StageSettings,
        beliefs: BeliefProfile,
        z: Vec<f64>,
    ) -> Self {
        let l = game.layout();
        let prior = beliefs.joint(l);
        let other_weight = (0..l.num_lm())
            .map(|p| {
                (0..l.joint_states())
                    .map(|js| {
                        l.state_digits(js)
                            .iter()
                            .enumerate()
                            .filter(|(q, _)| *q != p)
                            .map(|(q, x)| beliefs.marginal(q)[*x])
                            .product()
                    })
                    .collect()
            })
            .collect();
        StagePoint {
            game,
            cands,
            settings,
            beliefs,
            z,
            prior,
            other_weight,
            lm_parts: HashMap::new(),
            evals: HashMap::new(),
            fbe: HashMap::new(),
            triggers: Cell::new(0),
        }
    }

    pub fn beliefs(&self) -> &BeliefProfile {
        &self.beliefs
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn candidates(&self) -> &Candidates {
        self.cands
    }

    pub fn off_equilibrium_triggers(&self) -> usize {
        self.triggers.get()
    }

    fn lm_part(&mut self, lm: &[usize]) -> Arc<LmPart> {
        if let Some(p) = self.lm_parts.get(lm) {
            return p.clone();
        }
        let gamma: Vec<&Prescription> = lm
            .iter()
            .enumerate()
            .map(|(p, i)| &self.cands.lm(p)[*i])
            .collect();
        let l = self.game.layout();
        let part = Arc::new(LmPart {
            pa: belief::lm_action_probs(l, &gamma),
            succ: (0..l.joint_actions()).map(|_| OnceCell::new()).collect(),
        });
        self.lm_parts.insert(lm.to_vec(), part.clone());
        part
    }

    fn successor(&self, lm: &[usize], part: &LmPart, ja: usize) -> Arc<BeliefProfile> {
        let slot = match self.settings.dynamics {
            BeliefDynamics::Bayesian => ja,
            BeliefDynamics::Aggregate => 0,
        };
        part.succ[slot]
            .get_or_init(|| {
                let args = belief::eval_args(self.settings.dynamics, &self.beliefs, &self.z);
                match self.settings.dynamics {
                    BeliefDynamics::Bayesian => {
                        let (b, fallback) =
                            belief::bayes_raw(self.game, &args, &self.prior, &part.pa, ja);
                        if fallback {
                            self.triggers.set(self.triggers.get() + 1);
                        }
                        Arc::new(b)
                    }
                    BeliefDynamics::Aggregate => {
                        let gamma_l = &self.cands.leaders[0][lm[0]];
                        let xi = belief::eta_raw(self.game, &args, &self.beliefs.leaders[0], gamma_l);
                        Arc::new(BeliefProfile::new(vec![xi], vec![]))
                    }
                }
            })
            .clone()
    }

    /// Evaluates a full profile: state-action values of the followers and
    /// the value of every player.
    pub fn evaluate(
        &mut self,
        idx: &ProfileIndex,
        cont: &mut dyn Continuation,
    ) -> Result<Arc<ProfileEval>> {
        if let Some(e) = self.evals.get(idx) {
            return Ok(e.clone());
        }
        let lm = idx.lm_indices();
        let part = self.lm_part(&lm);
        let game = self.game;
        let cands = self.cands;
        let l = game.layout();
        let delta = game.discount();
        let gf = &cands.minor[idx.minor];
        let gamma: Vec<&Prescription> = lm
            .iter()
            .enumerate()
            .map(|(p, i)| &cands.lm(p)[*i])
            .collect();
        let args = belief::eval_args(self.settings.dynamics, &self.beliefs, &self.z);
        let next_z = belief::phi_raw(game, &args, &self.prior, &part.pa, gf);

        let mut cv: Vec<Option<Arc<PlayerValues>>> = vec![None; l.joint_actions()];
        let mut cont_at = |this: &Self, ja: usize| -> Result<Arc<PlayerValues>> {
            if let Some(v) = &cv[ja] {
                return Ok(v.clone());
            }
            let b = this.successor(&lm, &part, ja);
            let v = if delta == 0.0 {
                Arc::new(PlayerValues::zeros(l))
            } else {
                cont.values(&b, &next_z)?
            };
            cv[ja] = Some(v.clone());
            Ok(v)
        };

        let nf = l.minor_states;
        let naf = l.minor_actions;
        let mut minor_q = vec![vec![0.0; naf]; nf];
        for js in 0..l.joint_states() {
            let b = self.prior[js];
            if b == 0.0 {
                continue;
            }
            for ja in 0..l.joint_actions() {
                let w = b * part.pa[js][ja];
                if w == 0.0 {
                    continue;
                }
                let v = cont_at(self, ja)?;
                for (xf, q_row) in minor_q.iter_mut().enumerate() {
                    for (af, q) in q_row.iter_mut().enumerate() {
                        let r = game.minor_reward(&args, js, ja, xf, af);
                        let row = game.minor_kernel().row(&args, l.minor_row(js, ja, xf, af));
                        let c: f64 = row.iter().zip(&v.minor).map(|(p, v)| p * v).sum();
                        *q += w * (r + delta * c);
                    }
                }
            }
        }

        let mut values = PlayerValues::zeros(l);
        for (xf, q_row) in minor_q.iter().enumerate() {
            values.minor[xf] = q_row.iter().zip(&gf.rows[xf]).map(|(q, g)| q * g).sum();
        }

        let mut major_q = Vec::with_capacity(l.num_majors);
        for p in 0..l.num_lm() {
            let is_major = p >= l.num_leaders;
            let ns = l.player_states(p);
            let na = l.player_actions(p);
            let mut q = vec![vec![0.0; na]; ns];
            for js in 0..l.joint_states() {
                let wo = self.other_weight[p][js];
                if wo == 0.0 {
                    continue;
                }
                let xs = l.state_digits(js);
                let x = xs[p];
                for ja in 0..l.joint_actions() {
                    let acts = l.action_digits(ja);
                    let a = acts[p];
                    let own = gamma[p].rows[x][a];
                    if !is_major && own == 0.0 {
                        continue;
                    }
                    let others: f64 = (0..l.num_lm())
                        .filter(|q| *q != p)
                        .map(|q| gamma[q].rows[xs[q]][acts[q]])
                        .product();
                    let w = wo * others;
                    if w == 0.0 {
                        continue;
                    }
                    let v = cont_at(self, ja)?;
                    let r = game.lm_reward(p, &args, js, ja, &gf.rows);
                    let row = game.lm_kernel(p).row(&args, l.lm_row(js, ja));
                    let c: f64 = row.iter().zip(v.lm(p)).map(|(p, v)| p * v).sum();
                    q[x][a] += w * (r + delta * c);
                }
            }
            let vals = values.lm_mut(p);
            for x in 0..ns {
                vals[x] = q[x].iter().zip(&gamma[p].rows[x]).map(|(q, g)| q * g).sum();
            }
            if is_major {
                major_q.push(q);
            }
        }

        let e = Arc::new(ProfileEval {
            minor_q,
            major_q,
            values,
            next_z,
        });
        self.evals.insert(idx.clone(), e.clone());
        Ok(e)
    }

    /// Values of every player under a fixed profile.
    pub fn backup_values(
        &mut self,
        idx: &ProfileIndex,
        cont: &mut dyn Continuation,
    ) -> Result<PlayerValues> {
        Ok(self.evaluate(idx, cont)?.values.clone())
    }

    fn minor_ok(&self, e: &ProfileEval) -> bool {
        let tie = self.settings.tolerances.tie;
        e.minor_q
            .iter()
            .zip(&e.values.minor)
            .all(|(q, v)| q.iter().all(|alt| *alt <= v + tie))
    }

    fn major_ok(&self, e: &ProfileEval, j: usize) -> bool {
        let tie = self.settings.tolerances.tie;
        e.major_q[j]
            .iter()
            .zip(&e.values.majors[j])
            .all(|(q, v)| q.iter().all(|alt| *alt <= v + tie))
    }

    /// Minor prescriptions that are best responses to themselves (through the
    /// mean field they induce) given the leader/major prescriptions.
    pub fn minor_stage_br(
        &mut self,
        leaders: &[usize],
        majors: &[usize],
        cont: &mut dyn Continuation,
    ) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for f in 0..self.cands.minor.len() {
            let idx = ProfileIndex {
                leaders: leaders.to_vec(),
                majors: majors.to_vec(),
                minor: f,
            };
            let e = self.evaluate(&idx, cont)?;
            if self.minor_ok(&e) {
                out.push(f);
            }
        }
        Ok(out)
    }

    /// Best responses of major `j`; `majors[j]` is ignored.
    pub fn major_stage_br(
        &mut self,
        leaders: &[usize],
        majors: &[usize],
        minor: usize,
        j: usize,
        cont: &mut dyn Continuation,
    ) -> Result<Vec<usize>> {
        if j >= self.cands.majors.len() {
            return Err(Error::Argument(format!("no major {j}")));
        }
        let mut out = Vec::new();
        for d in 0..self.cands.majors[j].len() {
            let mut m = majors.to_vec();
            m[j] = d;
            let idx = ProfileIndex {
                leaders: leaders.to_vec(),
                majors: m,
                minor,
            };
            let e = self.evaluate(&idx, cont)?;
            if self.major_ok(&e, j) {
                out.push(d);
            }
        }
        Ok(out)
    }

    /// Every (majors, minor) pair that is a follower equilibrium for the
    /// given leader prescriptions, by exhaustive check.
    pub fn follower_block_equilibria(
        &mut self,
        leaders: &[usize],
        cont: &mut dyn Continuation,
    ) -> Result<Arc<Vec<ProfileIndex>>> {
        if let Some(f) = self.fbe.get(leaders) {
            return Ok(f.clone());
        }
        let mut out = Vec::new();
        for m in self.cands.major_profiles() {
            for f in 0..self.cands.minor.len() {
                let idx = ProfileIndex {
                    leaders: leaders.to_vec(),
                    majors: m.clone(),
                    minor: f,
                };
                let e = self.evaluate(&idx, cont)?;
                if self.minor_ok(&e) && (0..m.len()).all(|j| self.major_ok(&e, j)) {
                    out.push(idx);
                }
            }
        }
        let out = Arc::new(out);
        self.fbe.insert(leaders.to_vec(), out.clone());
        Ok(out)
    }

    /// Round-robin best-response iteration from the first profile. Returns
    /// the profile it settles on if that profile passes the exhaustive
    /// follower-equilibrium test, `None` on a cycle or a failed check.
    pub fn follower_best_response_iteration(
        &mut self,
        leaders: &[usize],
        max_rounds: usize,
        cont: &mut dyn Continuation,
    ) -> Result<Option<ProfileIndex>> {
        let mut cur = ProfileIndex {
            leaders: leaders.to_vec(),
            majors: vec![0; self.cands.majors.len()],
            minor: 0,
        };
        for _ in 0..max_rounds {
            let prev = cur.clone();
            let minor = self.minor_stage_br(&cur.leaders, &cur.majors, cont)?;
            if !minor.contains(&cur.minor) {
                cur.minor = minor[0];
            }
            for j in 0..cur.majors.len() {
                let br = self.major_stage_br(&cur.leaders, &cur.majors, cur.minor, j, cont)?;
                match br.first() {
                    Some(_) if br.contains(&cur.majors[j]) => {}
                    Some(b) => cur.majors[j] = *b,
                    None => return Ok(None),
                }
            }
            if cur == prev {
                let e = self.evaluate(&cur, cont)?;
                let ok = self.minor_ok(&e) && (0..cur.majors.len()).all(|j| self.major_ok(&e, j));
                return Ok(ok.then_some(cur));
            }
        }
        Ok(None)
    }

    fn selected_followers(
        &mut self,
        leaders: &[usize],
        i: usize,
        cont: &mut dyn Continuation,
    ) -> Result<Option<Arc<ProfileEval>>> {
        let fbe = self.follower_block_equilibria(leaders, cont)?;
        let mut scored = Vec::with_capacity(fbe.len());
        for idx in fbe.iter() {
            let e = self.evaluate(idx, cont)?;
            let s = ex_ante(&self.beliefs.leaders[i], &e.values.leaders[i]);
            scored.push((e, s));
        }
        Ok(pick(&scored, self.settings.selection, self.settings.tolerances.tie, |(_, s)| *s)
            .map(|(e, _)| e.clone()))
    }

    /// All stage fixed points: follower equilibria at which no leader gains
    /// by switching prescription when followers re-equilibrate.
    pub fn leader_stage_equilibrium(&mut self, cont: &mut dyn Continuation) -> Result<StageOutcome> {
        let tie = self.settings.tolerances.tie;
        let k = self.cands.leaders.len();
        let sizes: Vec<usize> = self.cands.leaders.iter().map(Vec::len).collect();
        let mut deviation: HashMap<(Vec<usize>, usize), Option<Vec<f64>>> = HashMap::new();
        let mut skipped = 0;
        let mut passing = Vec::new();
        for leaders in product(&sizes) {
            let fbe = self.follower_block_equilibria(&leaders, cont)?;
            for idx in fbe.iter() {
                let eq = self.evaluate(idx, cont)?;
                let mut ok = true;
                'players: for i in 0..k {
                    for d in 0..sizes[i] {
                        let mut dev = leaders.clone();
                        dev[i] = d;
                        let key = (dev, i);
                        let dv = match deviation.get(&key) {
                            Some(v) => v.clone(),
                            None => {
                                let v = self
                                    .selected_followers(&key.0, i, cont)?
                                    .map(|e| e.values.leaders[i].clone());
                                deviation.insert(key, v.clone());
                                v
                            }
                        };
                        let Some(dv) = dv else {
                            skipped += 1;
                            log::debug!("leader {i} deviation {d} has no follower equilibrium");
                            continue;
                        };
                        let own = &eq.values.leaders[i];
                        let violated = self.beliefs.leaders[i]
                            .iter()
                            .enumerate()
                            .any(|(x, b)| *b > 0.0 && dv[x] > own[x] + tie);
                        if violated {
                            ok = false;
                            break 'players;
                        }
                    }
                }
                if ok {
                    passing.push((idx.clone(), eq.values.clone()));
                }
            }
        }
        let multiplicity = passing.len();
        let solutions = passing
            .into_iter()
            .map(|(profile, values)| StageSolution {
                prescriptions: self.cands.resolve(&profile),
                profile,
                values: Arc::new(values),
                multiplicity,
            })
            .collect();
        Ok(StageOutcome {
            solutions,
            skipped_deviations: skipped,
            off_equilibrium_triggers: self.triggers.get(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{RandomGame, SpaceSize};
    use crate::grid::CandidateGrid;

    fn stage_game(seed: u64) -> Game {
        RandomGame {
            leaders: vec![SpaceSize::new(2, 2)],
            majors: vec![],
            minor: SpaceSize::new(2, 2),
            horizon: 1,
            ..RandomGame::default()
        }
        .generate(seed)
        .validate()
        .unwrap()
    }

    #[test]
    fn zero_continuation_with_zero_rewards_accepts_everything() {
        let mut spec = stage_game(1).into_spec();
        crate::corpus::zero_rewards(&mut spec);
        let game = spec.validate().unwrap();
        let cands = Candidates::new(&game, CandidateGrid::default());
        let mut point = StagePoint::new(
            &game,
            &cands,
            StageSettings::default(),
            BeliefProfile::initial(&game),
            game.spec().initial_mean_field.clone(),
        );
        let out = point
            .leader_stage_equilibrium(&mut Terminal::new(game.layout()))
            .unwrap();
        assert_eq!(out.solutions.len(), cands.all_profiles().len());
        assert_eq!(out.solutions[0].profile, cands.all_profiles()[0]);
    }

    #[test]
    fn iteration_lands_inside_exhaustive_set() {
        for seed in 0..20 {
            let game = stage_game(seed);
            let cands = Candidates::new(&game, CandidateGrid::default());
            let mut point = StagePoint::new(
                &game,
                &cands,
                StageSettings::default(),
                BeliefProfile::initial(&game),
                game.spec().initial_mean_field.clone(),
            );
            let mut term = Terminal::new(game.layout());
            for l in cands.leader_profiles() {
                let all = point.follower_block_equilibria(&l, &mut term).unwrap();
                if let Some(p) = point.follower_best_response_iteration(&l, 50, &mut term).unwrap() {
                    assert!(all.contains(&p));
                }
            }
        }
    }
}
