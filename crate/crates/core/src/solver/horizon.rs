//! Stationary equilibria of infinite-horizon games by value iteration on a
//! lattice over the public state, with simplicial interpolation between
//! lattice nodes.

use std::collections::HashMap;
use std::sync::Arc;

use super::finite::advance;
use super::{
    modal_action, EquilibriumSolution, PointKey, SolveMode, SolverConfig, StageEntry,
    StrategyView, TrajectoryStep,
};
use crate::belief::{BeliefDynamics, BeliefProfile};
use crate::error::{Error, Result};
use crate::grid::Candidates;
use crate::model::{Game, MixedRadix};
use crate::stage::{PlayerValues, StagePoint, StageSettings};

/// Grid `{k / R}` on the probability simplex over `dim` outcomes.
#[derive(Clone, Debug)]
pub struct SimplexLattice {
    dim: usize,
    resolution: u32,
    nodes: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl SimplexLattice {
    pub fn new(dim: usize, resolution: u32) -> Result<Self> {
        if dim == 0 || resolution == 0 {
            return Err(Error::Argument(
                "lattice needs a positive dimension and resolution".into(),
            ));
        }
        let nodes = compositions(resolution, dim);
        let index = nodes.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(SimplexLattice {
            dim,
            resolution,
            nodes,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let r = self.resolution as f64;
        self.nodes[i].iter().map(|c| *c as f64 / r).collect()
    }

    /// Vertices of the Freudenthal simplex containing `y` and their
    /// barycentric weights; weights are non-negative and sum to one.
    pub fn interpolate(&self, y: &[f64]) -> Vec<(usize, f64)> {
        let n = self.dim;
        if n == 1 {
            return vec![(0, 1.0)];
        }
        let r = self.resolution as i64;
        // Cumulative coordinates c_k = sum_{i >= k} y_i for k = 1..n-1.
        let mut tail = 0.0;
        let mut cum = vec![0.0; n - 1];
        for k in (1..n).rev() {
            tail += y[k];
            cum[k - 1] = (tail * self.resolution as f64).clamp(0.0, self.resolution as f64);
        }
        let mut base: Vec<i64> = cum.iter().map(|c| c.floor() as i64).collect();
        let mut frac: Vec<f64> = cum.iter().zip(&base).map(|(c, b)| c - *b as f64).collect();
        for k in 0..n - 1 {
            if base[k] >= r {
                base[k] = r;
                frac[k] = 0.0;
            }
        }
        let mut order: Vec<usize> = (0..n - 1).collect();
        order.sort_by(|a, b| frac[*b].total_cmp(&frac[*a]));

        let to_node = |c: &[i64]| -> usize {
            let mut counts = Vec::with_capacity(n);
            let mut prev = r;
            for ck in c {
                counts.push((prev - ck) as u32);
                prev = *ck;
            }
            counts.push(prev as u32);
            self.index[&counts]
        };
        let mut out = Vec::with_capacity(n);
        let mut vertex = base.clone();
        let first = 1.0 - frac[order[0]];
        if first > 0.0 {
            out.push((to_node(&vertex), first));
        }
        for (j, k) in order.iter().enumerate() {
            vertex[*k] += 1;
            let next = order.get(j + 1).map_or(0.0, |m| frac[*m]);
            let w = frac[*k] - next;
            if w > 0.0 {
                out.push((to_node(&vertex), w));
            }
        }
        out
    }
}

/// Product of one simplex lattice per non-singleton belief marginal and one
/// for the mean field.
#[derive(Clone, Debug)]
struct ProductLattice {
    /// Players whose marginal is interpolated, in player order.
    players: Vec<usize>,
    num_leaders: usize,
    num_players: usize,
    parts: Vec<SimplexLattice>,
    radix: MixedRadix,
}

impl ProductLattice {
    fn new(game: &Game, resolution: u32) -> Result<Self> {
        let l = game.layout();
        let players: Vec<usize> = (0..l.num_lm()).filter(|p| l.player_states(*p) > 1).collect();
        let mut parts = players
            .iter()
            .map(|p| SimplexLattice::new(l.player_states(*p), resolution))
            .collect::<Result<Vec<_>>>()?;
        parts.push(SimplexLattice::new(l.minor_states, resolution)?);
        let radix = MixedRadix::new(parts.iter().map(SimplexLattice::len).collect());
        Ok(ProductLattice {
            players,
            num_leaders: l.num_leaders,
            num_players: l.num_lm(),
            parts,
            radix,
        })
    }

    fn len(&self) -> usize {
        self.radix.size()
    }

    fn node(&self, i: usize) -> (BeliefProfile, Vec<f64>) {
        let digits = self.radix.decode(i);
        let mut marginals = vec![vec![1.0]; self.num_players];
        for (k, p) in self.players.iter().enumerate() {
            marginals[*p] = self.parts[k].point(digits[k]);
        }
        let z = self.parts.last().map(|s| s.point(digits[self.players.len()]));
        (
            BeliefProfile::from_marginals(self.num_leaders, marginals),
            z.unwrap_or_default(),
        )
    }

    fn weights(&self, b: &BeliefProfile, z: &[f64]) -> Vec<(usize, f64)> {
        let mut out = vec![(0usize, 1.0)];
        let coords = self
            .players
            .iter()
            .map(|p| b.marginal(*p))
            .chain(std::iter::once(z));
        for (part, y) in self.parts.iter().zip(coords) {
            let vs = part.interpolate(y);
            let mut next = Vec::with_capacity(out.len() * vs.len());
            for (i, w) in &out {
                for (j, u) in &vs {
                    next.push((i * part.len() + j, w * u));
                }
            }
            out = next;
        }
        out
    }

    fn interpolate(&self, values: &[Arc<PlayerValues>], b: &BeliefProfile, z: &[f64]) -> PlayerValues {
        let mut acc: Option<PlayerValues> = None;
        for (i, w) in self.weights(b, z) {
            let v = &values[i];
            match &mut acc {
                None => {
                    let mut s = (**v).clone();
                    scale(&mut s, w);
                    acc = Some(s);
                }
                Some(a) => add_scaled(a, v, w),
            }
        }
        acc.expect("interpolation has at least one vertex")
    }
}

fn scale(v: &mut PlayerValues, w: f64) {
    v.minor.iter_mut().for_each(|x| *x *= w);
    for row in v.leaders.iter_mut().chain(v.majors.iter_mut()) {
        row.iter_mut().for_each(|x| *x *= w);
    }
}

fn add_scaled(acc: &mut PlayerValues, v: &PlayerValues, w: f64) {
    for (a, x) in acc.minor.iter_mut().zip(&v.minor) {
        *a += w * x;
    }
    for (ra, rv) in acc
        .leaders
        .iter_mut()
        .chain(acc.majors.iter_mut())
        .zip(v.leaders.iter().chain(&v.majors))
    {
        for (a, x) in ra.iter_mut().zip(rv) {
            *a += w * x;
        }
    }
}

fn solve_point(
    game: &Game,
    cands: &Candidates,
    settings: StageSettings,
    lattice: &ProductLattice,
    values: &[Arc<PlayerValues>],
    beliefs: &BeliefProfile,
    z: &[f64],
) -> Result<Arc<StageEntry>> {
    let mut point = StagePoint::new(game, cands, settings, beliefs.clone(), z.to_vec());
    let mut cont = |b: &BeliefProfile, z: &[f64]| Ok(Arc::new(lattice.interpolate(values, b, z)));
    let outcome = point.leader_stage_equilibrium(&mut cont)?;
    let chosen = outcome
        .select(settings.selection, beliefs)
        .ok_or_else(|| Error::NoEquilibrium {
            t: 0,
            beliefs: beliefs.marginals().cloned().collect(),
            z: z.to_vec(),
        })?;
    Ok(Arc::new(StageEntry {
        key: PointKey::new(0, beliefs, z),
        beliefs: beliefs.clone(),
        z: z.to_vec(),
        solution: chosen.clone(),
        skipped_deviations: outcome.skipped_deviations,
        off_equilibrium_triggers: outcome.off_equilibrium_triggers,
    }))
}

/// Stationary strategies backed by converged lattice values; points off the
/// lattice are solved on demand against the interpolated continuation.
pub struct StationaryView<'g> {
    game: &'g Game,
    cands: Candidates,
    settings: StageSettings,
    lattice: ProductLattice,
    values: Vec<Arc<PlayerValues>>,
    memo: HashMap<PointKey, Arc<StageEntry>>,
}

impl StationaryView<'_> {
    /// Interpolated value function at an arbitrary public point.
    pub fn value(&self, beliefs: &BeliefProfile, z: &[f64]) -> PlayerValues {
        self.lattice.interpolate(&self.values, beliefs, z)
    }

    pub fn lattice_size(&self) -> usize {
        self.lattice.len()
    }

    fn into_table(self) -> Vec<Arc<StageEntry>> {
        self.memo.into_values().collect()
    }
}

impl StrategyView for StationaryView<'_> {
    fn game(&self) -> &Game {
        self.game
    }

    fn dynamics(&self) -> BeliefDynamics {
        BeliefDynamics::Bayesian
    }

    fn stage(&mut self, _t: u32, beliefs: &BeliefProfile, z: &[f64]) -> Result<Arc<StageEntry>> {
        let key = PointKey::new(0, beliefs, z);
        if let Some(e) = self.memo.get(&key) {
            return Ok(e.clone());
        }
        let e = solve_point(
            self.game,
            &self.cands,
            self.settings,
            &self.lattice,
            &self.values,
            beliefs,
            z,
        )?;
        self.memo.insert(key, e.clone());
        Ok(e)
    }
}

/// Runs value iteration from zero values and returns the converged view with
/// its residual history.
pub fn value_iteration<'g>(
    game: &'g Game,
    config: &SolverConfig,
) -> Result<(StationaryView<'g>, Vec<f64>)> {
    if game.horizon().is_some() {
        return Err(Error::Mode("value iteration needs an infinite horizon".into()));
    }
    config.check_budget(game)?;
    let lattice = ProductLattice::new(game, config.vi_resolution)?;
    if lattice.len() > config.max_points {
        return Err(Error::Budget {
            needed: lattice.len() as u128,
            budget: config.max_points as u128,
        });
    }
    let cands = Candidates::new(game, config.grid);
    let settings = config.stage_settings(BeliefDynamics::Bayesian);
    let nodes: Vec<(BeliefProfile, Vec<f64>)> = (0..lattice.len()).map(|i| lattice.node(i)).collect();
    let zero = Arc::new(PlayerValues::zeros(game.layout()));
    let mut values = vec![zero; lattice.len()];
    let mut entries: Vec<Arc<StageEntry>>;
    let mut residuals = Vec::new();
    loop {
        let mut next_entries = Vec::with_capacity(nodes.len());
        for (b, z) in &nodes {
            next_entries.push(solve_point(game, &cands, settings, &lattice, &values, b, z)?);
        }
        let next: Vec<Arc<PlayerValues>> = next_entries.iter().map(|e| e.values().clone()).collect();
        let residual = next
            .iter()
            .zip(&values)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        residuals.push(residual);
        values = next;
        entries = next_entries;
        log::debug!("sweep {} residual {residual:e}", residuals.len());
        if residual < config.tolerances.vi {
            break;
        }
        if residuals.len() >= config.vi_max_iters {
            return Err(Error::NotConverged {
                iterations: residuals.len(),
                residual,
                residuals,
            });
        }
    }
    let memo = entries.into_iter().map(|e| (e.key.clone(), e)).collect();
    Ok((
        StationaryView {
            game,
            cands,
            settings,
            lattice,
            values,
            memo,
        },
        residuals,
    ))
}

/// Stationary equilibrium of an infinite-horizon game. The forward pass
/// follows the modal joint action for `report_periods` periods.
pub fn solve_infinite_horizon(game: &Game, config: &SolverConfig) -> Result<EquilibriumSolution> {
    let (mut view, residuals) = value_iteration(game, config)?;
    let mut b = BeliefProfile::initial(game);
    let mut z = game.spec().initial_mean_field.clone();
    let mut trajectory = Vec::new();
    for t in 1..=config.report_periods {
        let entry = view.stage(t, &b, &z)?;
        let g = entry.prescriptions().clone();
        let (ja, p) = modal_action(game, &b, &g);
        let (nb, nz) = advance(game, BeliefDynamics::Bayesian, &b, &z, &g, ja)?;
        trajectory.push(TrajectoryStep {
            t,
            beliefs: b,
            z,
            prescriptions: g,
            values: entry.values().clone(),
            modal_action: game.layout().action_digits(ja).to_vec(),
            modal_probability: p,
        });
        b = nb;
        z = nz;
    }
    Ok(EquilibriumSolution::assemble(
        SolveMode::InfiniteHorizon,
        config.clone(),
        None,
        view.into_table(),
        trajectory,
        residuals,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_counts() {
        assert_eq!(SimplexLattice::new(2, 20).unwrap().len(), 21);
        assert_eq!(SimplexLattice::new(3, 4).unwrap().len(), 15);
        assert_eq!(SimplexLattice::new(3, 4).unwrap().point(0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn nodes_interpolate_to_themselves() {
        let s = SimplexLattice::new(3, 5).unwrap();
        for i in 0..s.len() {
            let w = s.interpolate(&s.point(i));
            let at: f64 = w.iter().filter(|(j, _)| *j == i).map(|(_, w)| w).sum();
            assert!((at - 1.0).abs() < 1e-9, "node {i}: {w:?}");
        }
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_linear_functions(
            raw in proptest::collection::vec(0.01f64..1.0, 4),
            res in 1u32..12,
        ) {
            let s: f64 = raw.iter().sum();
            let y: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let lat = SimplexLattice::new(4, res).unwrap();
            let w = lat.interpolate(&y);
            let total: f64 = w.iter().map(|(_, w)| w).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|(_, w)| *w >= 0.0));
            for k in 0..4 {
                let v: f64 = w.iter().map(|(i, w)| w * lat.point(*i)[k]).sum();
                prop_assert!((v - y[k]).abs() < 1e-9);
            }
        }
    }
}
