//! Certification of computed solutions: one-shot deviation checks over the
//! stored stage table, global follower checks on the game tree, a level-wise
//! brute-force equilibrium search for tiny games, and a Monte Carlo test of
//! conditional independence of private states.

mod brute;
mod gametree;
mod global;
mod independence;
mod oneshot;

use serde::{Deserialize, Serialize};

use crate::grid::CandidateGrid;
use crate::solver::PointKey;

pub use brute::{brute_force_smfe, BruteForceResult};
pub use gametree::{GameTree, NodeValues, TreeMargin};
pub use global::verify_follower_global;
pub use independence::{check_conditional_independence, Bucket, IndependenceReport};
pub use oneshot::verify_one_shot_deviations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Passed,
    Failed,
    /// Refused because the check would exceed its budget.
    NotChecked,
    /// Not enough data to decide.
    Inconclusive,
}

impl Status {
    /// CLI exit code: 0 pass, 1 fail, 2 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::Failed => 1,
            Status::NotChecked | Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    Minor,
    Leader(usize),
    Major(usize),
}

/// Equilibrium value minus the best deviation value at one information set;
/// negative means a profitable deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub key: PointKey,
    pub player: Player,
    pub state: usize,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub status: Status,
    pub passed: bool,
    /// Largest deviation gain or stored-value mismatch, zero if none.
    pub max_violation: f64,
    pub cert_tol: f64,
    pub grid: CandidateGrid,
    pub margins: Vec<Margin>,
    pub checked_deviations: usize,
    pub off_equilibrium_triggers: usize,
    /// Leader deviations whose follower block had no equilibrium.
    pub skipped_deviations: usize,
    /// Largest gap between stored and recomputed values.
    pub value_mismatch: f64,
    pub missing_points: Vec<PointKey>,
    pub notes: Vec<String>,
}

impl CertificationReport {
    pub(crate) fn new(grid: CandidateGrid, cert_tol: f64) -> Self {
        CertificationReport {
            status: Status::Passed,
            passed: true,
            max_violation: 0.0,
            cert_tol,
            grid,
            margins: Vec::new(),
            checked_deviations: 0,
            off_equilibrium_triggers: 0,
            skipped_deviations: 0,
            value_mismatch: 0.0,
            missing_points: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// A report for a check that was refused, with the reason as a note.
    pub fn not_checked(grid: CandidateGrid, cert_tol: f64, why: String) -> Self {
        let mut r = Self::new(grid, cert_tol);
        r.status = Status::NotChecked;
        r.passed = false;
        r.notes.push(why);
        r
    }

    pub(crate) fn push(&mut self, margin: Margin) {
        self.max_violation = self.max_violation.max(-margin.margin);
        self.margins.push(margin);
    }

    /// Sets `passed` and `status` from the collected data.
    pub(crate) fn finish(mut self) -> Self {
        self.max_violation = self.max_violation.max(self.value_mismatch).max(0.0);
        self.margins.sort_by(|a, b| {
            (&a.key, a.player, a.state).cmp(&(&b.key, b.player, b.state))
        });
        self.missing_points.sort();
        self.missing_points.dedup();
        self.passed = self.max_violation <= self.cert_tol && self.missing_points.is_empty();
        self.status = if self.passed {
            Status::Passed
        } else {
            Status::Failed
        };
        self
    }
}
