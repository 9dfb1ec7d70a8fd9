//! Public beliefs, mean fields, prescriptions and their one-step updates.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::prob::{self, ROW_SUM_TOL};
use crate::model::{EvalArgs, Game, Layout};

/// Product belief on leader and major private states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefProfile {
    pub leaders: Vec<Vec<f64>>,
    #[serde(default)]
    pub majors: Vec<Vec<f64>>,
}

impl BeliefProfile {
    pub fn new(leaders: Vec<Vec<f64>>, majors: Vec<Vec<f64>>) -> Self {
        BeliefProfile { leaders, majors }
    }

    /// Splits marginals given in player order (leaders first).
    pub fn from_marginals(num_leaders: usize, mut marginals: Vec<Vec<f64>>) -> Self {
        let majors = marginals.split_off(num_leaders);
        BeliefProfile {
            leaders: marginals,
            majors,
        }
    }

    /// Marginals of the game's initial leader/major distribution.
    pub fn initial(game: &Game) -> Self {
        Self::from_marginals(game.layout().num_leaders, game.initial_marginals())
    }

    pub fn num_players(&self) -> usize {
        self.leaders.len() + self.majors.len()
    }

    pub fn marginal(&self, p: usize) -> &[f64] {
        if p < self.leaders.len() {
            &self.leaders[p]
        } else {
            &self.majors[p - self.leaders.len()]
        }
    }

    pub fn marginal_mut(&mut self, p: usize) -> &mut Vec<f64> {
        let k = self.leaders.len();
        if p < k {
            &mut self.leaders[p]
        } else {
            &mut self.majors[p - k]
        }
    }

    pub fn marginals(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.leaders.iter().chain(&self.majors)
    }

    /// Product distribution over joint leader/major states.
    pub fn joint(&self, layout: &Layout) -> Vec<f64> {
        (0..layout.joint_states())
            .map(|js| joint_belief(self, layout.state_digits(js)))
            .collect()
    }

    pub fn check(&self, layout: &Layout) -> Result<()> {
        if self.leaders.len() != layout.num_leaders || self.majors.len() != layout.num_majors {
            return Err(Error::Dimension(format!(
                "belief has {} leader and {} major marginals, expected {} and {}",
                self.leaders.len(),
                self.majors.len(),
                layout.num_leaders,
                layout.num_majors
            )));
        }
        for (p, m) in self.marginals().enumerate() {
            if m.len() != layout.player_states(p) {
                return Err(Error::Dimension(format!(
                    "marginal {p} has {} entries, expected {}",
                    m.len(),
                    layout.player_states(p)
                )));
            }
            if !prob::is_simplex(m, ROW_SUM_TOL) {
                return Err(Error::Dimension(format!("marginal {p} is not a distribution")));
            }
        }
        Ok(())
    }

    pub fn key(&self) -> Vec<i64> {
        self.marginals().flat_map(|m| prob::quantize(m)).collect()
    }
}

/// Product of the marginals at the given per-player states.
pub fn joint_belief(profile: &BeliefProfile, states: &[usize]) -> f64 {
    profile
        .marginals()
        .zip(states)
        .map(|(m, x)| m[*x])
        .product()
}

macro_rules! simplex_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name {
            pub probs: Vec<f64>,
        }

        impl $name {
            pub fn new(probs: Vec<f64>) -> Result<Self> {
                if !prob::is_simplex(&probs, ROW_SUM_TOL) {
                    return Err(Error::Dimension(format!(
                        "{} {:?} is not a distribution",
                        stringify!($name),
                        probs
                    )));
                }
                Ok($name { probs })
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.probs
            }
        }
    };
}

simplex_newtype!(
    /// Distribution of the minor population over minor states.
    MeanField
);
simplex_newtype!(
    /// Distribution of a leader population over leader states.
    LeaderMeanField
);

/// Map from a private state to a distribution over actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prescription {
    pub rows: Vec<Vec<f64>>,
}

impl Prescription {
    pub fn pure(actions: &[usize], num_actions: usize) -> Self {
        Prescription {
            rows: actions
                .iter()
                .map(|a| prob::point_mass(num_actions, *a))
                .collect(),
        }
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.rows[state][action]
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionProfile {
    pub leaders: Vec<Prescription>,
    #[serde(default)]
    pub majors: Vec<Prescription>,
    pub minor: Prescription,
}

impl PrescriptionProfile {
    pub fn lm(&self, p: usize) -> &Prescription {
        if p < self.leaders.len() {
            &self.leaders[p]
        } else {
            &self.majors[p - self.leaders.len()]
        }
    }

    pub fn lm_mut(&mut self, p: usize) -> &mut Prescription {
        let k = self.leaders.len();
        if p < k {
            &mut self.leaders[p]
        } else {
            &mut self.majors[p - k]
        }
    }

    pub fn lm_all(&self) -> Vec<&Prescription> {
        self.leaders.iter().chain(&self.majors).collect()
    }

    pub fn check(&self, layout: &Layout) -> Result<()> {
        if self.leaders.len() != layout.num_leaders || self.majors.len() != layout.num_majors {
            return Err(Error::Dimension("prescription player counts".into()));
        }
        let lm = self.lm_all();
        let shapes = lm
            .iter()
            .enumerate()
            .map(|(p, g)| (*g, layout.player_states(p), layout.player_actions(p)))
            .chain(std::iter::once((
                &self.minor,
                layout.minor_states,
                layout.minor_actions,
            )));
        for (g, ns, na) in shapes {
            if g.rows.len() != ns
                || g.rows
                    .iter()
                    .any(|r| r.len() != na || !prob::is_simplex(r, ROW_SUM_TOL))
            {
                return Err(Error::Dimension(format!(
                    "prescription {:?} is not a {ns}x{na} stochastic matrix",
                    g.rows
                )));
            }
        }
        Ok(())
    }
}

/// How the public leader/major state description moves between periods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefDynamics {
    /// Bayes update on the observed leader/major actions.
    #[default]
    Bayesian,
    /// A single leader slot holds the leader mean field of a leader
    /// population; it moves deterministically and is fed to kernels.
    Aggregate,
}

/// `P(joint action | joint state)` for the given leader/major prescriptions.
pub fn lm_action_probs(layout: &Layout, gamma_lm: &[&Prescription]) -> Vec<Vec<f64>> {
    (0..layout.joint_states())
        .map(|js| {
            let xs = layout.state_digits(js);
            (0..layout.joint_actions())
                .map(|ja| {
                    layout
                        .action_digits(ja)
                        .iter()
                        .enumerate()
                        .map(|(p, a)| gamma_lm[p].rows[xs[p]][*a])
                        .product()
                })
                .collect()
        })
        .collect()
}

/// Arguments passed to kernels and rewards under the given dynamics.
pub fn eval_args<'a>(
    dynamics: BeliefDynamics,
    beliefs: &'a BeliefProfile,
    z: &'a [f64],
) -> EvalArgs<'a> {
    EvalArgs {
        z,
        xi: match dynamics {
            BeliefDynamics::Bayesian => None,
            BeliefDynamics::Aggregate => Some(&beliefs.leaders[0]),
        },
    }
}

pub(crate) fn phi_raw(
    game: &Game,
    args: &EvalArgs<'_>,
    prior: &[f64],
    pa: &[Vec<f64>],
    gamma_f: &Prescription,
) -> Vec<f64> {
    let l = game.layout();
    let kernel = game.minor_kernel();
    let mut out = vec![0.0; l.minor_states];
    for (js, b) in prior.iter().enumerate() {
        if *b == 0.0 {
            continue;
        }
        for (ja, pj) in pa[js].iter().enumerate() {
            let w = b * pj;
            if w == 0.0 {
                continue;
            }
            for (xf, zx) in args.z.iter().enumerate() {
                if *zx == 0.0 {
                    continue;
                }
                for (af, g) in gamma_f.rows[xf].iter().enumerate() {
                    let wf = w * zx * g;
                    if wf == 0.0 {
                        continue;
                    }
                    let row = kernel.row(args, l.minor_row(js, ja, xf, af));
                    for (o, q) in out.iter_mut().zip(row.iter()) {
                        *o += wf * q;
                    }
                }
            }
        }
    }
    prob::clamp_normalize(&mut out);
    out
}

/// Bayes update for one observed joint action. Returns the successor belief
/// and whether the off-equilibrium fallback was used.
pub(crate) fn bayes_raw(
    game: &Game,
    args: &EvalArgs<'_>,
    prior: &[f64],
    pa: &[Vec<f64>],
    ja: usize,
) -> (BeliefProfile, bool) {
    let l = game.layout();
    let mut post: Vec<f64> = prior.iter().zip(pa).map(|(b, p)| b * p[ja]).collect();
    let norm: f64 = post.iter().sum();
    let fallback = norm <= 0.0;
    if fallback {
        post.copy_from_slice(prior);
    } else {
        for p in &mut post {
            *p /= norm;
        }
    }
    let mut marginals: Vec<Vec<f64>> = (0..l.num_lm())
        .map(|p| vec![0.0; l.player_states(p)])
        .collect();
    for (js, w) in post.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        for (p, m) in marginals.iter_mut().enumerate() {
            let row = game.lm_kernel(p).row(args, l.lm_row(js, ja));
            for (o, q) in m.iter_mut().zip(row.iter()) {
                *o += w * q;
            }
        }
    }
    for m in &mut marginals {
        prob::clamp_normalize(m);
    }
    (BeliefProfile::from_marginals(l.num_leaders, marginals), fallback)
}

pub(crate) fn eta_raw(
    game: &Game,
    args: &EvalArgs<'_>,
    xi: &[f64],
    gamma_l: &Prescription,
) -> Vec<f64> {
    let l = game.layout();
    let kernel = game.lm_kernel(0);
    let mut out = vec![0.0; l.player_states(0)];
    for (x, w) in xi.iter().enumerate() {
        for (a, g) in gamma_l.rows[x].iter().enumerate() {
            let wg = w * g;
            if wg == 0.0 {
                continue;
            }
            let row = kernel.row(args, l.lm_row(x, a));
            for (o, q) in out.iter_mut().zip(row.iter()) {
                *o += wg * q;
            }
        }
    }
    prob::clamp_normalize(&mut out);
    out
}

fn check_z(game: &Game, z: &[f64]) -> Result<()> {
    if z.len() != game.layout().minor_states || !prob::is_simplex(z, ROW_SUM_TOL) {
        return Err(Error::Dimension(format!(
            "mean field {z:?} does not match {} minor states",
            game.layout().minor_states
        )));
    }
    Ok(())
}

fn check_lm(game: &Game, gamma_lm: &[&Prescription]) -> Result<()> {
    let l = game.layout();
    if gamma_lm.len() != l.num_lm() {
        return Err(Error::Dimension(format!(
            "{} leader/major prescriptions, expected {}",
            gamma_lm.len(),
            l.num_lm()
        )));
    }
    for (p, g) in gamma_lm.iter().enumerate() {
        if g.rows.len() != l.player_states(p)
            || g.rows.iter().any(|r| r.len() != l.player_actions(p))
        {
            return Err(Error::Dimension(format!("prescription of player {p}")));
        }
    }
    Ok(())
}

/// Minor mean field one period ahead.
pub fn update_mean_field(
    game: &Game,
    beliefs: &BeliefProfile,
    z: &[f64],
    gamma: &PrescriptionProfile,
) -> Result<MeanField> {
    update_mean_field_with(game, BeliefDynamics::Bayesian, beliefs, z, gamma)
}

pub fn update_mean_field_with(
    game: &Game,
    dynamics: BeliefDynamics,
    beliefs: &BeliefProfile,
    z: &[f64],
    gamma: &PrescriptionProfile,
) -> Result<MeanField> {
    let l = game.layout();
    beliefs.check(l)?;
    check_z(game, z)?;
    gamma.check(l)?;
    let prior = beliefs.joint(l);
    let pa = lm_action_probs(l, &gamma.lm_all());
    let args = eval_args(dynamics, beliefs, z);
    Ok(MeanField {
        probs: phi_raw(game, &args, &prior, &pa, &gamma.minor),
    })
}

/// Bayes update of the public belief after observing `joint_action`.
pub fn update_belief(
    game: &Game,
    beliefs: &BeliefProfile,
    z: &[f64],
    gamma_lm: &[&Prescription],
    joint_action: usize,
) -> Result<BeliefProfile> {
    update_belief_with_status(game, beliefs, z, gamma_lm, joint_action).map(|(b, _)| b)
}

/// As [`update_belief`], also reporting whether the observed action had zero
/// probability, in which case the prior is pushed through the kernels unweighted.
pub fn update_belief_with_status(
    game: &Game,
    beliefs: &BeliefProfile,
    z: &[f64],
    gamma_lm: &[&Prescription],
    joint_action: usize,
) -> Result<(BeliefProfile, bool)> {
    let l = game.layout();
    beliefs.check(l)?;
    check_z(game, z)?;
    check_lm(game, gamma_lm)?;
    if joint_action >= l.joint_actions() {
        return Err(Error::Dimension(format!(
            "joint action {joint_action} out of range"
        )));
    }
    let prior = beliefs.joint(l);
    let pa = lm_action_probs(l, gamma_lm);
    let args = EvalArgs { z, xi: None };
    Ok(bayes_raw(game, &args, &prior, &pa, joint_action))
}

/// Leader mean field one period ahead, for a game whose single leader slot
/// stands for a leader population and which has no majors.
pub fn update_leader_mean_field(
    game: &Game,
    xi: &[f64],
    z: &[f64],
    gamma: &PrescriptionProfile,
) -> Result<LeaderMeanField> {
    let l = game.layout();
    if l.num_leaders != 1 || l.num_majors != 0 {
        return Err(Error::Mode(
            "the leader mean field needs exactly one leader slot and no majors".into(),
        ));
    }
    check_z(game, z)?;
    gamma.check(l)?;
    if xi.len() != l.player_states(0) || !prob::is_simplex(xi, ROW_SUM_TOL) {
        return Err(Error::Dimension(format!("leader mean field {xi:?}")));
    }
    let args = EvalArgs { z, xi: Some(xi) };
    Ok(LeaderMeanField {
        probs: eta_raw(game, &args, xi, &gamma.leaders[0]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GameSpec, Horizon, Kernel, PlayerSpace, Reward, RewardFunctions, TransitionKernels};

    fn one_leader(prior: Vec<f64>, leader_kernel: Vec<Vec<f64>>, minor_kernel: Vec<Vec<f64>>) -> Game {
        let nl = prior.len();
        let nf = minor_kernel[0].len();
        let lm_rows = nl * 2;
        GameSpec {
            name: String::new(),
            horizon: Horizon::Finite(1),
            discount: 1.0,
            reward_bound: None,
            leaders: vec![PlayerSpace::indexed(nl, 2)],
            majors: vec![],
            minor: PlayerSpace::indexed(nf, 1),
            initial_leader_major_dist: prior,
            initial_mean_field: prob::uniform(nf),
            kernels: TransitionKernels {
                leaders: vec![Kernel::Table(leader_kernel)],
                majors: vec![],
                minor: Kernel::Table(minor_kernel),
            },
            rewards: RewardFunctions {
                leaders: vec![Reward::Table(vec![0.0; lm_rows])],
                majors: vec![],
                minor: Reward::Table(vec![0.0; lm_rows * nf]),
            },
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn joint_belief_product() {
        let b = BeliefProfile::new(vec![vec![0.7, 0.3]], vec![vec![0.4, 0.6]]);
        assert!((joint_belief(&b, &[0, 1]) - 0.42).abs() < 1e-15);
        let pm = BeliefProfile::new(vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]);
        assert_eq!(joint_belief(&pm, &[1, 0]), 1.0);
        assert_eq!(joint_belief(&pm, &[0, 0]), 0.0);
    }

    #[test]
    fn bayes_with_partial_likelihood() {
        let id = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let game = one_leader(vec![0.7, 0.3], id, vec![vec![1.0]; 4]);
        let gamma = Prescription {
            rows: vec![vec![0.8, 0.2], vec![0.5, 0.5]],
        };
        let b = BeliefProfile::initial(&game);
        let post = update_belief(&game, &b, &[1.0], &[&gamma], 0).unwrap();
        assert!((post.leaders[0][0] - 0.56 / 0.71).abs() < 1e-12);
        assert!((post.leaders[0][1] - 0.15 / 0.71).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_action_falls_back_to_prior() {
        let id = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let game = one_leader(vec![0.7, 0.3], id, vec![vec![1.0]; 4]);
        let gamma = Prescription::pure(&[0, 0], 2);
        let b = BeliefProfile::initial(&game);
        let (post, fallback) = update_belief_with_status(&game, &b, &[1.0], &[&gamma], 1).unwrap();
        assert!(fallback);
        assert!((post.leaders[0][0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn mean_field_mixture() {
        let game = one_leader(
            vec![1.0],
            vec![vec![1.0]; 2],
            vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.9, 0.1], vec![0.2, 0.8]],
        );
        let gamma = PrescriptionProfile {
            leaders: vec![Prescription::pure(&[0], 2)],
            majors: vec![],
            minor: Prescription::pure(&[0, 0], 1),
        };
        let b = BeliefProfile::initial(&game);
        let z = update_mean_field(&game, &b, &[0.6, 0.4], &gamma).unwrap();
        assert!((z[0] - 0.62).abs() < 1e-12);
        assert!((z[1] - 0.38).abs() < 1e-12);
    }

    #[test]
    fn leader_mean_field_update() {
        let game = one_leader(
            vec![0.5, 0.5],
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.3, 0.7], vec![0.3, 0.7]],
            vec![vec![1.0]; 4],
        );
        let gamma = PrescriptionProfile {
            leaders: vec![Prescription::pure(&[0, 0], 2)],
            majors: vec![],
            minor: Prescription::pure(&[0], 1),
        };
        let xi = update_leader_mean_field(&game, &[0.5, 0.5], &[1.0], &gamma).unwrap();
        assert!((xi[0] - 0.65).abs() < 1e-12);
        assert!((xi[1] - 0.35).abs() < 1e-12);
    }
}
