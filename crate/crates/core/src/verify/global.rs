use std::sync::Arc;

use super::gametree::{GameTree, StrategyLookup};
use super::{CertificationReport, Margin, Player};
use crate::belief::{BeliefDynamics, BeliefProfile};
use crate::error::{Error, Result};
use crate::model::Game;
use crate::solver::{EquilibriumSolution, PointKey};

/// Checks the minor player and every major player against all pure
/// history-dependent deviations from the initial point, using exact
/// game-tree values. Refuses with `NotChecked` once more than `budget`
/// tree nodes would be visited.
pub fn verify_follower_global(
    game: &Game,
    solution: &EquilibriumSolution,
    budget: u64,
) -> Result<CertificationReport> {
    let config = &solution.config;
    let (grid, cert) = (config.grid, config.tolerances.cert);
    if solution.horizon.is_none() {
        return Err(Error::Mode("global follower checks need a finite horizon".into()));
    }
    if solution.mode.dynamics() == BeliefDynamics::Aggregate {
        return Ok(CertificationReport::not_checked(
            grid,
            cert,
            "global checks track individual leader states and do not apply to leader populations".into(),
        ));
    }
    let view = solution.view(game);
    let mut lookup = |t: u32, b: &BeliefProfile, z: &[f64]| {
        view.get(t, b, z)
            .map(|e| Arc::new(e.prescriptions().clone()))
            .ok_or_else(|| Error::MissingPoint {
                t,
                beliefs: b.marginals().cloned().collect(),
                z: z.to_vec(),
            })
    };
    let l = game.layout();
    let b0 = BeliefProfile::initial(game);
    let z0 = game.spec().initial_mean_field.clone();
    let mut report = CertificationReport::new(grid, cert);
    let players: Vec<Player> = std::iter::once(Player::Minor)
        .chain((0..l.num_majors).map(Player::Major))
        .collect();
    for player in players {
        let lookup: &mut StrategyLookup<'_> = &mut lookup;
        let mut tree = GameTree::new(game, lookup, budget)?;
        let run = match player {
            Player::Minor => tree.minor_values(1, &b0, &z0),
            Player::Major(j) => tree.lm_values(l.major_player(j), 1, &b0, &z0),
            Player::Leader(_) => unreachable!(),
        };
        match run {
            Ok(_) => {}
            Err(Error::Budget { needed, budget }) => {
                return Ok(CertificationReport::not_checked(
                    grid,
                    cert,
                    format!("game tree exceeds the node budget ({needed} > {budget})"),
                ));
            }
            Err(Error::MissingPoint { t, beliefs, z }) => {
                let b = BeliefProfile::from_marginals(l.num_leaders, beliefs);
                report.missing_points.push(PointKey::new(t, &b, &z));
                continue;
            }
            Err(e) => return Err(e),
        }
        report.checked_deviations += tree.margins.len();
        for m in tree.margins.drain(..) {
            report.push(Margin {
                key: m.key,
                player,
                state: m.state,
                margin: m.margin,
            });
        }
    }
    Ok(report.finish())
}
