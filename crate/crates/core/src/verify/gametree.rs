//! Exact expected values on the game tree. The hidden joint leader/major
//! state is tracked as a full joint distribution conditioned on what the
//! evaluated player observes, so no product form of beliefs is assumed.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefProfile, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::model::{EvalArgs, Game};
use crate::solver::{advance, PointKey};

/// Policy value and best value over all pure history-dependent plans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeValues {
    pub policy: f64,
    pub best: f64,
}

/// `policy - best` at an on-path node of the evaluated player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMargin {
    pub key: PointKey,
    pub state: usize,
    pub margin: f64,
}

pub type StrategyLookup<'a> =
    dyn FnMut(u32, &BeliefProfile, &[f64]) -> Result<Arc<PrescriptionProfile>> + 'a;

pub struct GameTree<'a, 'f> {
    game: &'a Game,
    horizon: u32,
    lookup: &'f mut StrategyLookup<'a>,
    root: Option<(PointKey, Arc<PrescriptionProfile>)>,
    budget: u64,
    nodes: u64,
    cache: HashMap<PointKey, Arc<PrescriptionProfile>>,
    /// Margins at on-path nodes of the last evaluation.
    pub margins: Vec<TreeMargin>,
}

struct Step {
    g: Arc<PrescriptionProfile>,
    pa: Vec<Vec<f64>>,
    next: Vec<Option<(BeliefProfile, Vec<f64>)>>,
}

impl<'a, 'f> GameTree<'a, 'f> {
    pub fn new(game: &'a Game, lookup: &'f mut StrategyLookup<'a>, budget: u64) -> Result<Self> {
        let horizon = game
            .horizon()
            .ok_or_else(|| Error::Mode("game-tree evaluation needs a finite horizon".into()))?;
        Ok(GameTree {
            game,
            horizon,
            lookup,
            root: None,
            budget,
            nodes: 0,
            cache: HashMap::new(),
            margins: Vec::new(),
        })
    }

    /// Uses `g` instead of the lookup at the point `key`.
    pub fn with_root(mut self, key: PointKey, g: Arc<PrescriptionProfile>) -> Self {
        self.root = Some((key, g));
        self
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget {
                needed: self.nodes as u128,
                budget: self.budget as u128,
            });
        }
        Ok(())
    }

    fn strategy(&mut self, t: u32, b: &BeliefProfile, z: &[f64]) -> Result<Arc<PrescriptionProfile>> {
        let key = PointKey::new(t, b, z);
        if let Some((k, g)) = &self.root {
            if *k == key {
                return Ok(g.clone());
            }
        }
        if let Some(g) = self.cache.get(&key) {
            return Ok(g.clone());
        }
        let g = (self.lookup)(t, b, z)?;
        self.cache.insert(key, g.clone());
        Ok(g)
    }

    fn step(&mut self, t: u32, b: &BeliefProfile, z: &[f64]) -> Result<Step> {
        let l = self.game.layout();
        let g = self.strategy(t, b, z)?;
        let pa = crate::belief::lm_action_probs(l, &g.lm_all());
        let next = vec![None; l.joint_actions()];
        Ok(Step { g, pa, next })
    }

    fn successor(&self, step: &mut Step, b: &BeliefProfile, z: &[f64], ja: usize) -> Result<(BeliefProfile, Vec<f64>)> {
        if step.next[ja].is_none() {
            step.next[ja] = Some(advance(
                self.game,
                crate::belief::BeliefDynamics::Bayesian,
                b,
                z,
                &step.g,
                ja,
            )?);
        }
        Ok(step.next[ja].clone().expect("just set"))
    }

    /// Minor values at `(t, b, z)` for every own state.
    pub fn minor_values(&mut self, t: u32, b: &BeliefProfile, z: &[f64]) -> Result<Vec<NodeValues>> {
        self.margins.clear();
        let mu = b.joint(self.game.layout());
        (0..self.game.layout().minor_states)
            .map(|xf| self.minor_node(t, b, z, &mu, xf, true))
            .collect()
    }

    fn minor_node(
        &mut self,
        t: u32,
        b: &BeliefProfile,
        z: &[f64],
        mu: &[f64],
        xf: usize,
        on_path: bool,
    ) -> Result<NodeValues> {
        if t > self.horizon {
            return Ok(NodeValues { policy: 0.0, best: 0.0 });
        }
        self.tick()?;
        let game = self.game;
        let l = game.layout();
        let delta = game.discount();
        let args = EvalArgs { z, xi: None };
        let mut step = self.step(t, b, z)?;
        let gf = step.g.minor.rows[xf].clone();
        let mut policy = 0.0;
        let mut best = f64::NEG_INFINITY;
        for (af, gaf) in gf.iter().enumerate() {
            let mut pol = 0.0;
            let mut bst = 0.0;
            for ja in 0..l.joint_actions() {
                // joint[js'] and next minor state, given this action path.
                let mut reward = 0.0;
                let mut mass = vec![vec![0.0; l.joint_states()]; l.minor_states];
                for js in 0..l.joint_states() {
                    let w = mu[js] * step.pa[js][ja];
                    if w == 0.0 {
                        continue;
                    }
                    reward += w * game.minor_reward(&args, js, ja, xf, af);
                    if t == self.horizon || delta == 0.0 {
                        continue;
                    }
                    let qf = game.minor_kernel().row(&args, l.minor_row(js, ja, xf, af));
                    let qlm = joint_kernel(game, &args, js, ja);
                    for (x2, pf) in qf.iter().enumerate() {
                        if *pf == 0.0 {
                            continue;
                        }
                        for (js2, pl) in qlm.iter().enumerate() {
                            mass[x2][js2] += w * pf * pl;
                        }
                    }
                }
                pol += reward;
                bst += reward;
                if t == self.horizon || delta == 0.0 {
                    continue;
                }
                for (x2, m) in mass.iter().enumerate() {
                    let p: f64 = m.iter().sum();
                    if p <= 0.0 {
                        continue;
                    }
                    let mu2: Vec<f64> = m.iter().map(|v| v / p).collect();
                    let (b2, z2) = self.successor(&mut step, b, z, ja)?;
                    let child = self.minor_node(t + 1, &b2, &z2, &mu2, x2, on_path && *gaf > 0.0)?;
                    pol += delta * p * child.policy;
                    bst += delta * p * child.best;
                }
            }
            policy += gaf * pol;
            best = best.max(bst);
        }
        if on_path {
            self.margins.push(TreeMargin {
                key: PointKey::new(t, b, z),
                state: xf,
                margin: policy - best,
            });
        }
        Ok(NodeValues { policy, best })
    }

    /// Values of leader/major player `p` at `(t, b, z)` for every own state.
    /// Other players' hidden states start from the product of their marginals.
    pub fn lm_values(&mut self, p: usize, t: u32, b: &BeliefProfile, z: &[f64]) -> Result<Vec<NodeValues>> {
        self.margins.clear();
        let l = self.game.layout();
        let mut out = Vec::new();
        for x in 0..l.player_states(p) {
            let mu: Vec<f64> = (0..l.joint_states())
                .map(|js| {
                    let xs = l.state_digits(js);
                    if xs[p] != x {
                        return 0.0;
                    }
                    (0..l.num_lm())
                        .filter(|q| *q != p)
                        .map(|q| b.marginal(q)[xs[q]])
                        .product()
                })
                .collect();
            out.push(self.lm_node(p, t, b, z, &mu, x, true)?);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn lm_node(
        &mut self,
        p: usize,
        t: u32,
        b: &BeliefProfile,
        z: &[f64],
        mu: &[f64],
        x: usize,
        on_path: bool,
    ) -> Result<NodeValues> {
        if t > self.horizon {
            return Ok(NodeValues { policy: 0.0, best: 0.0 });
        }
        self.tick()?;
        let game = self.game;
        let l = game.layout();
        let delta = game.discount();
        let args = EvalArgs { z, xi: None };
        let mut step = self.step(t, b, z)?;
        let own = step.g.lm(p).rows[x].clone();
        let mut policy = 0.0;
        let mut best = f64::NEG_INFINITY;
        for (a, ga) in own.iter().enumerate() {
            let mut pol = 0.0;
            let mut bst = 0.0;
            for ja in (0..l.joint_actions()).filter(|ja| l.action_digits(*ja)[p] == a) {
                let acts = l.action_digits(ja);
                let mut reward = 0.0;
                let mut nu = vec![0.0; l.joint_states()];
                for js in 0..l.joint_states() {
                    if mu[js] == 0.0 {
                        continue;
                    }
                    let xs = l.state_digits(js);
                    let others: f64 = (0..l.num_lm())
                        .filter(|q| *q != p)
                        .map(|q| step.g.lm(q).rows[xs[q]][acts[q]])
                        .product();
                    let w = mu[js] * others;
                    if w == 0.0 {
                        continue;
                    }
                    reward += w * game.lm_reward(p, &args, js, ja, &step.g.minor.rows);
                    if t == self.horizon || delta == 0.0 {
                        continue;
                    }
                    for (js2, q) in joint_kernel(game, &args, js, ja).iter().enumerate() {
                        nu[js2] += w * q;
                    }
                }
                pol += reward;
                bst += reward;
                if t == self.horizon || delta == 0.0 {
                    continue;
                }
                for x2 in 0..l.player_states(p) {
                    let m: Vec<f64> = (0..l.joint_states())
                        .map(|js2| if l.state_digits(js2)[p] == x2 { nu[js2] } else { 0.0 })
                        .collect();
                    let pm: f64 = m.iter().sum();
                    if pm <= 0.0 {
                        continue;
                    }
                    let mu2: Vec<f64> = m.iter().map(|v| v / pm).collect();
                    let (b2, z2) = self.successor(&mut step, b, z, ja)?;
                    let child = self.lm_node(p, t + 1, &b2, &z2, &mu2, x2, on_path && *ga > 0.0)?;
                    pol += delta * pm * child.policy;
                    bst += delta * pm * child.best;
                }
            }
            policy += ga * pol;
            best = best.max(bst);
        }
        if on_path {
            self.margins.push(TreeMargin {
                key: PointKey::new(t, b, z),
                state: x,
                margin: policy - best,
            });
        }
        Ok(NodeValues { policy, best })
    }
}

/// `P(js' | js, ja)` as the product of the per-player kernels.
fn joint_kernel(game: &Game, args: &EvalArgs<'_>, js: usize, ja: usize) -> Vec<f64> {
    let l = game.layout();
    let rows: Vec<_> = (0..l.num_lm())
        .map(|p| game.lm_kernel(p).row(args, l.lm_row(js, ja)))
        .collect();
    (0..l.joint_states())
        .map(|js2| {
            l.state_digits(js2)
                .iter()
                .zip(&rows)
                .map(|(x, r)| r[*x])
                .product()
        })
        .collect()
}
