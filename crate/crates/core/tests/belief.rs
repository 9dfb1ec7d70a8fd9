use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smfe::belief::{update_belief, update_mean_field, BeliefProfile, Prescription, PrescriptionProfile};
use smfe::corpus::{Coupling, RandomGame, SpaceSize};
use smfe::model::{EvalArgs, Game};

fn simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn prescription(rng: &mut ChaCha8Rng, states: usize, actions: usize) -> Prescription {
    Prescription {
        rows: (0..states).map(|_| simplex(rng, actions)).collect(),
    }
}

fn instance(seed: u64, k: usize, m: usize, full: bool) -> (Game, BeliefProfile, Vec<f64>, PrescriptionProfile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = |rng: &mut ChaCha8Rng| SpaceSize::new(rng.gen_range(1..=3), rng.gen_range(1..=3));
    let g = RandomGame {
        leaders: (0..k).map(|_| size(&mut rng)).collect(),
        majors: (0..m).map(|_| size(&mut rng)).collect(),
        minor: size(&mut rng),
        coupling: if full { Coupling::Full } else { Coupling::Own },
        ..RandomGame::default()
    };
    let game = g.generate(seed).validate().unwrap();
    let l = game.layout();
    let marginals = (0..l.num_lm()).map(|p| simplex(&mut rng, l.player_states(p))).collect();
    let b = BeliefProfile::from_marginals(l.num_leaders, marginals);
    let z = simplex(&mut rng, l.minor_states);
    let lm: Vec<Prescription> = (0..l.num_lm())
        .map(|p| prescription(&mut rng, l.player_states(p), l.player_actions(p)))
        .collect();
    let mut leaders = lm;
    let majors = leaders.split_off(l.num_leaders);
    let g = PrescriptionProfile {
        leaders,
        majors,
        minor: prescription(&mut rng, l.minor_states, l.minor_actions),
    };
    (game, b, z, g)
}

proptest! {
    #[test]
    fn posterior_averages_to_push_forward(seed in any::<u64>(), k in 1usize..=2, m in 0usize..=1, full in any::<bool>()) {
        let (game, b, z, g) = instance(seed, k, m, full);
        let l = game.layout();
        let prior = b.joint(l);
        let pa = smfe::belief::lm_action_probs(l, &g.lm_all());
        let args = EvalArgs { z: &z, xi: None };
        for p in 0..l.num_lm() {
            let mut averaged = vec![0.0; l.player_states(p)];
            for ja in 0..l.joint_actions() {
                let w: f64 = prior.iter().zip(&pa).map(|(q, r)| q * r[ja]).sum();
                let post = update_belief(&game, &b, &z, &g.lm_all(), ja).unwrap();
                prop_assert!((post.marginal(p).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                for (a, x) in averaged.iter_mut().zip(post.marginal(p)) {
                    *a += w * x;
                }
            }
            let mut pushed = vec![0.0; l.player_states(p)];
            for (js, q) in prior.iter().enumerate() {
                for ja in 0..l.joint_actions() {
                    for (x, k) in game.lm_kernel(p).row(&args, l.lm_row(js, ja)).iter().enumerate() {
                        pushed[x] += q * pa[js][ja] * k;
                    }
                }
            }
            for (a, e) in averaged.iter().zip(&pushed) {
                prop_assert!((a - e).abs() <= 1e-10, "{averaged:?} vs {pushed:?}");
            }
        }
    }

    #[test]
    fn mean_field_stays_on_the_simplex(seed in any::<u64>(), k in 1usize..=2, m in 0usize..=1) {
        let (game, b, z, g) = instance(seed, k, m, false);
        let next = update_mean_field(&game, &b, &z, &g).unwrap();
        prop_assert!((next.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(next.probs.iter().all(|p| *p >= 0.0));
    }
}
