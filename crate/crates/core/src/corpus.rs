//! Seeded random games for tests, benchmarks and the acceptance corpus.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{
    GameSpec, Horizon, Kernel, PlayerSpace, Reward, RewardFunctions, TransitionKernels,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceSize {
    pub states: usize,
    pub actions: usize,
}

impl SpaceSize {
    pub const fn new(states: usize, actions: usize) -> Self {
        SpaceSize { states, actions }
    }
}

/// What a player's next state may depend on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coupling {
    /// Own state, the public joint action and (for the minor) own action.
    #[default]
    Own,
    /// As [`Coupling::Own`], but the minor kernel ignores leaders and majors.
    MinorIsolated,
    /// Full joint leader/major state.
    Full,
}

#[derive(Clone, Debug)]
pub struct RandomGame {
    pub leaders: Vec<SpaceSize>,
    pub majors: Vec<SpaceSize>,
    pub minor: SpaceSize,
    pub horizon: u32,
    pub discount: f64,
    pub coupling: Coupling,
    /// Minor kernel mixes over the mean field and rewards are affine in it.
    pub z_dependent: bool,
}

impl Default for RandomGame {
    fn default() -> Self {
        RandomGame {
            leaders: vec![SpaceSize::new(2, 2)],
            majors: vec![],
            minor: SpaceSize::new(2, 2),
            horizon: 2,
            discount: 0.9,
            coupling: Coupling::Own,
            z_dependent: true,
        }
    }
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    for p in &mut v {
        *p /= s;
    }
    v
}

impl RandomGame {
    pub fn generate(&self, seed: u64) -> GameSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lm: Vec<SpaceSize> = self.leaders.iter().chain(&self.majors).copied().collect();
        let joint_states: usize = lm.iter().map(|s| s.states).product();
        let joint_actions: usize = lm.iter().map(|s| s.actions).product();
        let nf = self.minor.states;
        let naf = self.minor.actions;
        let digit = |mut idx: usize, radices: &[usize], p: usize| {
            for q in (p + 1..radices.len()).rev() {
                idx /= radices[q];
            }
            idx % radices[p]
        };
        let state_radices: Vec<usize> = lm.iter().map(|s| s.states).collect();

        let lm_kernel = |rng: &mut ChaCha8Rng, p: usize| -> Vec<Vec<f64>> {
            let ns = lm[p].states;
            let own: Vec<Vec<f64>> = (0..ns * joint_actions)
                .map(|_| random_dist(rng, ns))
                .collect();
            let mut rows = Vec::with_capacity(joint_states * joint_actions);
            for js in 0..joint_states {
                for ja in 0..joint_actions {
                    rows.push(match self.coupling {
                        Coupling::Full => random_dist(rng, ns),
                        _ => own[digit(js, &state_radices, p) * joint_actions + ja].clone(),
                    });
                }
            }
            rows
        };
        let leader_kernels = (0..self.leaders.len())
            .map(|p| Kernel::Table(lm_kernel(&mut rng, p)))
            .collect();
        let major_kernels = (0..self.majors.len())
            .map(|j| Kernel::Table(lm_kernel(&mut rng, self.leaders.len() + j)))
            .collect();

        let minor_table = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            let isolated: Vec<Vec<f64>> = (0..nf * naf).map(|_| random_dist(rng, nf)).collect();
            let public: Vec<Vec<f64>> = (0..joint_actions * nf * naf)
                .map(|_| random_dist(rng, nf))
                .collect();
            let mut rows = Vec::with_capacity(joint_states * joint_actions * nf * naf);
            for _js in 0..joint_states {
                for ja in 0..joint_actions {
                    for xf in 0..nf {
                        for af in 0..naf {
                            rows.push(match self.coupling {
                                Coupling::MinorIsolated => isolated[xf * naf + af].clone(),
                                Coupling::Own => public[(ja * nf + xf) * naf + af].clone(),
                                Coupling::Full => random_dist(rng, nf),
                            });
                        }
                    }
                }
            }
            rows
        };
        let minor_kernel = if self.z_dependent {
            Kernel::ZMixture((0..nf).map(|_| minor_table(&mut rng)).collect())
        } else {
            Kernel::Table(minor_table(&mut rng))
        };

        let z_dependent = self.z_dependent;
        let reward = |rng: &mut ChaCha8Rng, rows: usize| -> Reward {
            let base: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if z_dependent {
                Reward::ZAffine {
                    base,
                    slope: (0..nf)
                        .map(|_| (0..rows).map(|_| rng.gen_range(-0.5..0.5)).collect())
                        .collect(),
                }
            } else {
                Reward::Table(base)
            }
        };
        let lm_rows = joint_states * joint_actions;
        let minor_rows = lm_rows * nf * naf;
        let leader_rewards = (0..self.leaders.len()).map(|_| reward(&mut rng, lm_rows)).collect();
        let major_rewards = (0..self.majors.len()).map(|_| reward(&mut rng, lm_rows)).collect();
        let minor_reward = reward(&mut rng, minor_rows);

        let marginals: Vec<Vec<f64>> = lm.iter().map(|s| random_dist(&mut rng, s.states)).collect();
        let initial_leader_major_dist = (0..joint_states)
            .map(|js| {
                marginals
                    .iter()
                    .enumerate()
                    .map(|(p, m)| m[digit(js, &state_radices, p)])
                    .product()
            })
            .collect();

        let space = |s: &SpaceSize| PlayerSpace::indexed(s.states, s.actions);
        GameSpec {
            name: format!("random-{seed}"),
            horizon: Horizon::Finite(self.horizon),
            discount: self.discount,
            reward_bound: None,
            leaders: self.leaders.iter().map(space).collect(),
            majors: self.majors.iter().map(space).collect(),
            minor: space(&self.minor),
            initial_leader_major_dist,
            initial_mean_field: random_dist(&mut rng, nf),
            kernels: TransitionKernels {
                leaders: leader_kernels,
                majors: major_kernels,
                minor: minor_kernel,
            },
            rewards: RewardFunctions {
                leaders: leader_rewards,
                majors: major_rewards,
                minor: minor_reward,
            },
        }
    }
}

/// Replaces every reward by the zero table of the right size.
pub fn zero_rewards(spec: &mut GameSpec) {
    let zero = |r: &Reward| match r.num_rows() {
        Some(n) => Reward::Table(vec![0.0; n]),
        None => Reward::SocialWelfare,
    };
    let r = &mut spec.rewards;
    r.leaders = r.leaders.iter().map(zero).collect();
    r.majors = r.majors.iter().map(zero).collect();
    r.minor = zero(&r.minor);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_games_validate() {
        for coupling in [Coupling::Own, Coupling::MinorIsolated, Coupling::Full] {
            for z_dependent in [false, true] {
                let g = RandomGame {
                    leaders: vec![SpaceSize::new(2, 2), SpaceSize::new(1, 2)],
                    majors: vec![SpaceSize::new(2, 1)],
                    minor: SpaceSize::new(3, 2),
                    coupling,
                    z_dependent,
                    ..RandomGame::default()
                };
                g.generate(7).validate().unwrap();
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        let g = RandomGame::default();
        assert_eq!(g.generate(3), g.generate(3));
        assert_ne!(g.generate(3), g.generate(4));
    }
}
