//! Finite populations of minor followers simulated next to the leaders and
//! majors, for comparing the empirical type distribution with the limit
//! mean field.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{self, BeliefProfile};
use crate::error::{Error, Result};
use crate::model::{prob, Game};
use crate::solver::{advance, StrategyView};

pub(crate) fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    prob::sample_index(probs, rng.gen())
}

/// What the kernels and prescriptions are fed as the minor mean field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// The limit mean field propagated along the realized public history.
    #[default]
    Limit,
    /// The empirical distribution of the simulated population.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: u32,
    /// Realized state of each leader then each major.
    pub lm_states: Vec<usize>,
    pub lm_actions: Vec<usize>,
    /// Number of minor followers in each state.
    pub counts: Vec<usize>,
    /// Limit mean field at this period. Under empirical coupling, the
    /// one-step prediction from the previous empirical distribution.
    pub limit_z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrace {
    pub seed: u64,
    pub n: usize,
    pub coupling: CouplingMode,
    pub num_leaders: usize,
    pub periods: Vec<PeriodRecord>,
}

impl PopulationTrace {
    /// Largest total-variation distance between the empirical and the limit
    /// mean field over all periods.
    pub fn max_tv(&self) -> f64 {
        empirical_mean_field(self)
            .iter()
            .zip(&self.periods)
            .map(|(e, p)| tv_distance(e, &p.limit_z).unwrap_or(1.0))
            .fold(0.0, f64::max)
    }
}

/// Simulates `n` minor followers for `periods` periods, or for the game's
/// horizon when `periods` is `None`.
pub fn simulate_population(
    game: &Game,
    view: &mut dyn StrategyView,
    n: usize,
    seed: u64,
    coupling: CouplingMode,
    periods: Option<u32>,
) -> Result<PopulationTrace> {
    if n == 0 {
        return Err(Error::Argument("population size must be at least 1".into()));
    }
    let horizon = periods.or(game.horizon()).ok_or_else(|| {
        Error::Argument("an infinite-horizon game needs an explicit number of periods".into())
    })?;
    let l = game.layout();
    let spec = game.spec();
    let dynamics = view.dynamics();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut js = draw(&mut rng, &spec.initial_leader_major_dist);
    let mut minors = (0..n)
        .map(|_| draw(&mut rng, &spec.initial_mean_field))
        .collect::<Vec<_>>();
    let mut b = BeliefProfile::initial(game);
    let mut limit = spec.initial_mean_field.clone();
    let mut out = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let mut counts = vec![0; l.minor_states];
        for x in &minors {
            counts[*x] += 1;
        }
        let z = match coupling {
            CouplingMode::Limit => limit.clone(),
            CouplingMode::Empirical => counts.iter().map(|c| *c as f64 / n as f64).collect(),
        };
        let g = view.stage(t, &b, &z)?.prescriptions().clone();
        let xs = l.state_digits(js).to_vec();
        let acts = (0..l.num_lm())
            .map(|p| draw(&mut rng, &g.lm(p).rows[xs[p]]))
            .collect::<Vec<_>>();
        let ja = l.actions.encode(&acts);
        out.push(PeriodRecord {
            t,
            lm_states: xs.clone(),
            lm_actions: acts,
            counts,
            limit_z: limit.clone(),
        });
        if t == horizon {
            break;
        }
        let args = belief::eval_args(dynamics, &b, &z);
        for x in &mut minors {
            let af = draw(&mut rng, &g.minor.rows[*x]);
            *x = draw(&mut rng, &game.minor_kernel().row(&args, l.minor_row(js, ja, *x, af)));
        }
        let next = (0..l.num_lm())
            .map(|p| draw(&mut rng, &game.lm_kernel(p).row(&args, l.lm_row(js, ja))))
            .collect::<Vec<_>>();
        js = l.states.encode(&next);
        let (nb, nz) = advance(game, dynamics, &b, &z, &g, ja)?;
        b = nb;
        limit = nz;
    }
    Ok(PopulationTrace {
        seed,
        n,
        coupling,
        num_leaders: l.num_leaders,
        periods: out,
    })
}

/// Per-period empirical minor distribution.
pub fn empirical_mean_field(trace: &PopulationTrace) -> Vec<Vec<f64>> {
    let n = trace.n as f64;
    trace
        .periods
        .iter()
        .map(|p| p.counts.iter().map(|c| *c as f64 / n).collect())
        .collect()
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "cannot compare vectors of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Writes the trace as CSV preceded by `# key=value` lines. Each period has
/// rows `minor` (empirical distribution), `minor_limit`, and one row per
/// leader and major holding its state and action.
pub fn write_trace_csv<W: Write>(
    trace: &PopulationTrace,
    meta: &[(&str, String)],
    mut out: W,
) -> Result<()> {
    writeln!(out, "# seed={}", trace.seed)?;
    writeln!(out, "# n={}", trace.n)?;
    let coupling = match trace.coupling {
        CouplingMode::Limit => "limit",
        CouplingMode::Empirical => "empirical",
    };
    writeln!(out, "# coupling={coupling}")?;
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    let nf = trace.periods.first().map_or(0, |p| p.counts.len());
    let width = nf.max(2);
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["period".to_string(), "class".to_string()];
    header.extend((0..width).map(|i| format!("h{i}")));
    w.write_record(&header).map_err(csv_err)?;
    let num_leaders = trace.num_leaders;
    let empirical = empirical_mean_field(trace);
    for (p, z) in trace.periods.iter().zip(&empirical) {
        let mut row = |class: String, cells: Vec<String>| {
            let mut r = vec![p.t.to_string(), class];
            r.extend(cells);
            r.resize(width + 2, String::new());
            w.write_record(&r).map_err(csv_err)
        };
        row("minor".into(), z.iter().map(f64::to_string).collect())?;
        row("minor_limit".into(), p.limit_z.iter().map(f64::to_string).collect())?;
        for (i, (x, a)) in p.lm_states.iter().zip(&p.lm_actions).enumerate() {
            let class = if i < num_leaders {
                format!("leader{i}")
            } else {
                format!("major{}", i - num_leaders)
            };
            row(class, vec![x.to_string(), a.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((tv_distance(&[0.6, 0.4], &[0.5, 0.5]).unwrap() - 0.1).abs() < 1e-15);
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn empirical_is_counts_over_n() {
        let trace = PopulationTrace {
            seed: 0,
            n: 10_000,
            coupling: CouplingMode::Limit,
            num_leaders: 0,
            periods: vec![PeriodRecord {
                t: 1,
                lm_states: vec![],
                lm_actions: vec![],
                counts: vec![6238, 3762],
                limit_z: vec![0.5, 0.5],
            }],
        };
        assert_eq!(empirical_mean_field(&trace), vec![vec![0.6238, 0.3762]]);
    }
}
