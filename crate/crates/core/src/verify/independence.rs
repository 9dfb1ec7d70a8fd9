use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Status;
use crate::belief::{self, BeliefProfile, PrescriptionProfile};
use crate::error::Result;
use crate::model::Game;
use crate::simulate::draw;
use crate::solver::{advance, StrategyView};

/// Periods simulated when the game has no finite horizon.
pub const STATIONARY_PERIODS: u32 = 10;

/// Buckets with fewer samples are reported but not tested.
pub const MIN_BUCKET: usize = 100;

/// Samples observed at period `t` after the public joint-action history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub t: u32,
    pub history: Vec<usize>,
    pub count: usize,
    /// Between the empirical joint of all private states and the product of
    /// its empirical marginals.
    pub tv: f64,
    pub threshold: f64,
    pub tested: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub status: Status,
    pub num_samples: usize,
    pub seed: u64,
    pub tested_buckets: usize,
    pub failed_buckets: usize,
    pub max_excess: f64,
    pub buckets: Vec<Bucket>,
}

struct Node {
    beliefs: BeliefProfile,
    z: Vec<f64>,
    g: Arc<PrescriptionProfile>,
}

/// Samples trajectories of every leader/major state and one representative
/// minor state, buckets them by period and public action history, and
/// tests each bucket with at least [`MIN_BUCKET`] samples for independence
/// of the private states.
pub fn check_conditional_independence(
    game: &Game,
    view: &mut dyn StrategyView,
    num_samples: usize,
    seed: u64,
) -> Result<IndependenceReport> {
    let l = game.layout();
    let horizon = game.horizon().unwrap_or(STATIONARY_PERIODS);
    let dynamics = view.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: HashMap<Vec<usize>, Node> = HashMap::new();
    // (t, history) -> counts over (joint state, minor state).
    let mut counts: BTreeMap<(u32, Vec<usize>), Vec<usize>> = BTreeMap::new();
    let cells = l.joint_states() * l.minor_states;
    let spec = game.spec();
    for _ in 0..num_samples {
        let mut js = draw(&mut rng, &spec.initial_leader_major_dist);
        let mut xf = draw(&mut rng, &spec.initial_mean_field);
        let mut history = Vec::new();
        for t in 1..=horizon {
            if !nodes.contains_key(&history) {
                let (b, z) = match history.split_last() {
                    None => (BeliefProfile::initial(game), spec.initial_mean_field.clone()),
                    Some((ja, prev)) => {
                        let p = &nodes[prev];
                        advance(game, dynamics, &p.beliefs, &p.z, &p.g, *ja)?
                    }
                };
                let g = Arc::new(view.stage(t, &b, &z)?.prescriptions().clone());
                nodes.insert(history.clone(), Node { beliefs: b, z, g });
            }
            counts
                .entry((t, history.clone()))
                .or_insert_with(|| vec![0; cells])[js * l.minor_states + xf] += 1;
            if t == horizon {
                break;
            }
            let node = &nodes[&history];
            let xs = l.state_digits(js).to_vec();
            let acts = (0..l.num_lm())
                .map(|p| draw(&mut rng, &node.g.lm(p).rows[xs[p]]))
                .collect::<Vec<_>>();
            let af = draw(&mut rng, &node.g.minor.rows[xf]);
            let ja = l.actions.encode(&acts);
            let args = belief::eval_args(dynamics, &node.beliefs, &node.z);
            let next = (0..l.num_lm())
                .map(|p| draw(&mut rng, &game.lm_kernel(p).row(&args, l.lm_row(js, ja))))
                .collect::<Vec<_>>();
            xf = draw(&mut rng, &game.minor_kernel().row(&args, l.minor_row(js, ja, xf, af)));
            js = l.states.encode(&next);
            history.push(ja);
        }
    }

    let mut buckets = Vec::with_capacity(counts.len());
    for ((t, history), c) in counts {
        let count: usize = c.iter().sum();
        let tv = product_tv(game, &c, count);
        let threshold = 4.0 / (count as f64).sqrt() + 0.02;
        let tested = count >= MIN_BUCKET;
        buckets.push(Bucket {
            t,
            history,
            count,
            tv,
            threshold,
            tested,
            passed: !tested || tv <= threshold,
        });
    }
    let tested_buckets = buckets.iter().filter(|b| b.tested).count();
    let failed_buckets = buckets.iter().filter(|b| !b.passed).count();
    let max_excess = buckets
        .iter()
        .filter(|b| b.tested)
        .map(|b| b.tv - b.threshold)
        .fold(f64::NEG_INFINITY, f64::max);
    let status = if tested_buckets == 0 {
        Status::Inconclusive
    } else if failed_buckets == 0 {
        Status::Passed
    } else {
        Status::Failed
    };
    Ok(IndependenceReport {
        status,
        num_samples,
        seed,
        tested_buckets,
        failed_buckets,
        max_excess: if tested_buckets == 0 { 0.0 } else { max_excess },
        buckets,
    })
}

fn product_tv(game: &Game, counts: &[usize], total: usize) -> f64 {
    let l = game.layout();
    let n = total as f64;
    let nf = l.minor_states;
    let mut lm: Vec<Vec<f64>> = (0..l.num_lm()).map(|p| vec![0.0; l.player_states(p)]).collect();
    let mut minor = vec![0.0; nf];
    for (cell, c) in counts.iter().enumerate() {
        let w = *c as f64 / n;
        let (js, xf) = (cell / nf, cell % nf);
        for (p, x) in l.state_digits(js).iter().enumerate() {
            lm[p][*x] += w;
        }
        minor[xf] += w;
    }
    let mut tv = 0.0;
    for (cell, c) in counts.iter().enumerate() {
        let (js, xf) = (cell / nf, cell % nf);
        let prod: f64 = l
            .state_digits(js)
            .iter()
            .enumerate()
            .map(|(p, x)| lm[p][*x])
            .product::<f64>()
            * minor[xf];
        tv += (*c as f64 / n - prod).abs();
    }
    0.5 * tv
}
