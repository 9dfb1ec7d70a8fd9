//! Finite candidate sets of prescriptions.

use serde::{Deserialize, Serialize};

use crate::belief::{Prescription, PrescriptionProfile};
use crate::error::{Error, Result};
use crate::model::Game;

/// Action distributions whose entries are multiples of `1/G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateGrid {
    granularity: u32,
}

impl Default for CandidateGrid {
    fn default() -> Self {
        CandidateGrid { granularity: 1 }
    }
}

impl CandidateGrid {
    pub fn new(granularity: u32) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::Argument("grid granularity must be at least 1".into()));
        }
        Ok(CandidateGrid { granularity })
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    /// Number of candidate distributions over `num_actions` actions.
    pub fn count(&self, num_actions: usize) -> u128 {
        binomial(self.granularity as u128 + num_actions as u128 - 1, num_actions as u128 - 1)
    }

    /// Candidate distributions, in descending lexicographic order of their
    /// counts (pure action 0 first).
    pub fn distributions(&self, num_actions: usize) -> Vec<Vec<f64>> {
        let g = self.granularity as usize;
        let mut out = Vec::new();
        let mut counts = vec![0usize; num_actions];
        compositions(g, 0, &mut counts, &mut out);
        out.into_iter()
            .map(|c| c.iter().map(|k| *k as f64 / g as f64).collect())
            .collect()
    }

    /// Every prescription over `num_states` states; the first state is the
    /// most significant digit.
    pub fn prescriptions(&self, num_states: usize, num_actions: usize) -> Vec<Prescription> {
        let dists = self.distributions(num_actions);
        let n = dists.len();
        let total = n.pow(num_states as u32);
        (0..total)
            .map(|mut idx| {
                let mut rows = vec![Vec::new(); num_states];
                for x in (0..num_states).rev() {
                    rows[x] = dists[idx % n].clone();
                    idx /= n;
                }
                Prescription { rows }
            })
            .collect()
    }
}

fn compositions(remaining: usize, pos: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(counts.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        counts[pos] = k;
        compositions(remaining - k, pos + 1, counts, out);
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Position of a prescription profile in the candidate lists. The derived
/// ordering (leaders, then majors, then minor) is the canonical total order
/// used for every tie-break.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProfileIndex {
    pub leaders: Vec<usize>,
    #[serde(default)]
    pub majors: Vec<usize>,
    pub minor: usize,
}

impl ProfileIndex {
    pub fn lm(&self, p: usize) -> usize {
        if p < self.leaders.len() {
            self.leaders[p]
        } else {
            self.majors[p - self.leaders.len()]
        }
    }

    pub fn lm_indices(&self) -> Vec<usize> {
        self.leaders.iter().chain(&self.majors).copied().collect()
    }
}

/// Candidate prescriptions of every player of a game.
#[derive(Clone, Debug)]
pub struct Candidates {
    pub grid: CandidateGrid,
    pub leaders: Vec<Vec<Prescription>>,
    pub majors: Vec<Vec<Prescription>>,
    pub minor: Vec<Prescription>,
}

impl Candidates {
    pub fn new(game: &Game, grid: CandidateGrid) -> Self {
        let l = game.layout();
        let lm: Vec<Vec<Prescription>> = (0..l.num_lm())
            .map(|p| grid.prescriptions(l.player_states(p), l.player_actions(p)))
            .collect();
        let mut leaders = lm;
        let majors = leaders.split_off(l.num_leaders);
        Candidates {
            grid,
            leaders,
            majors,
            minor: grid.prescriptions(l.minor_states, l.minor_actions),
        }
    }

    /// Number of candidate profiles, checked against `budget` without
    /// materialising anything.
    pub fn profile_count(game: &Game, grid: CandidateGrid) -> u128 {
        let l = game.layout();
        let per = |ns: usize, na: usize| grid.count(na).saturating_pow(ns as u32);
        (0..l.num_lm())
            .map(|p| per(l.player_states(p), l.player_actions(p)))
            .fold(per(l.minor_states, l.minor_actions), |a, b| a.saturating_mul(b))
    }

    pub fn lm(&self, p: usize) -> &[Prescription] {
        if p < self.leaders.len() {
            &self.leaders[p]
        } else {
            &self.majors[p - self.leaders.len()]
        }
    }

    pub fn lm_sizes(&self) -> Vec<usize> {
        self.leaders.iter().chain(&self.majors).map(Vec::len).collect()
    }

    pub fn resolve(&self, idx: &ProfileIndex) -> PrescriptionProfile {
        PrescriptionProfile {
            leaders: idx
                .leaders
                .iter()
                .zip(&self.leaders)
                .map(|(i, c)| c[*i].clone())
                .collect(),
            majors: idx
                .majors
                .iter()
                .zip(&self.majors)
                .map(|(i, c)| c[*i].clone())
                .collect(),
            minor: self.minor[idx.minor].clone(),
        }
    }

    /// Every leader index vector, in lexicographic order.
    pub fn leader_profiles(&self) -> Vec<Vec<usize>> {
        product(&self.leaders.iter().map(Vec::len).collect::<Vec<_>>())
    }

    /// Every major index vector, in lexicographic order.
    pub fn major_profiles(&self) -> Vec<Vec<usize>> {
        product(&self.majors.iter().map(Vec::len).collect::<Vec<_>>())
    }

    /// Every profile, in canonical order.
    pub fn all_profiles(&self) -> Vec<ProfileIndex> {
        let majors = self.major_profiles();
        let mut out = Vec::new();
        for l in self.leader_profiles() {
            for m in &majors {
                for f in 0..self.minor.len() {
                    out.push(ProfileIndex {
                        leaders: l.clone(),
                        majors: m.clone(),
                        minor: f,
                    });
                }
            }
        }
        out
    }

    /// Locates a prescription profile in the candidate lists.
    pub fn index_of(&self, profile: &PrescriptionProfile) -> Option<ProfileIndex> {
        let find = |list: &[Prescription], g: &Prescription| {
            list.iter().position(|c| {
                c.rows
                    .iter()
                    .flatten()
                    .zip(g.rows.iter().flatten())
                    .all(|(a, b)| (a - b).abs() < 1e-9)
            })
        };
        Some(ProfileIndex {
            leaders: profile
                .leaders
                .iter()
                .zip(&self.leaders)
                .map(|(g, c)| find(c, g))
                .collect::<Option<_>>()?,
            majors: profile
                .majors
                .iter()
                .zip(&self.majors)
                .map(|(g, c)| find(c, g))
                .collect::<Option<_>>()?,
            minor: find(&self.minor, &profile.minor)?,
        })
    }
}

/// Cartesian product of `0..n` ranges, lexicographic.
pub fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..*n).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pure_grid_is_vertices() {
        let g = CandidateGrid::new(1).unwrap();
        assert_eq!(g.distributions(3), vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(g.prescriptions(2, 2).len(), 4);
        assert_eq!(g.prescriptions(2, 2)[1].rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn zero_granularity_rejected() {
        assert!(CandidateGrid::new(0).is_err());
    }

    proptest! {
        #[test]
        fn grid_size_matches_binomial(g in 1u32..6, n in 1usize..5) {
            let grid = CandidateGrid::new(g).unwrap();
            let d = grid.distributions(n);
            prop_assert_eq!(d.len() as u128, grid.count(n));
            for v in &d {
                prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for p in v {
                    let k = p * g as f64;
                    prop_assert!((k - k.round()).abs() < 1e-9);
                }
            }
        }
    }
}
