//! Transition kernels and reward functions.
//!
//! Both are addressed by a flat row index computed by [`super::Layout`]; the
//! mean field (and, with a leader population, the leader mean field) is passed
//! alongside through [`EvalArgs`].

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Public aggregates a kernel or reward may read.
#[derive(Clone, Copy, Debug)]
pub struct EvalArgs<'a> {
    pub z: &'a [f64],
    /// Leader mean field, present only when leaders form a population.
    pub xi: Option<&'a [f64]>,
}

pub type KernelFn = dyn Fn(&EvalArgs<'_>, usize) -> Vec<f64> + Send + Sync;
pub type RewardFn = dyn Fn(&EvalArgs<'_>, usize) -> f64 + Send + Sync;

/// Programmatic kernel with arbitrary dependence on the aggregates.
#[derive(Clone)]
pub struct CustomKernel {
    pub rows: usize,
    pub outcomes: usize,
    pub f: Arc<KernelFn>,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomKernel({}x{})", self.rows, self.outcomes)
    }
}

impl PartialEq for CustomKernel {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

#[derive(Clone)]
pub struct CustomReward {
    pub rows: usize,
    pub f: Arc<RewardFn>,
}

impl fmt::Debug for CustomReward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomReward({})", self.rows)
    }
}

impl PartialEq for CustomReward {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

/// A controlled transition kernel: row index -> distribution over next states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Independent of the mean field.
    Table(Vec<Vec<f64>>),
    /// `Q(.|z, row) = sum_y z(y) * tables[y][row]`, one table per minor state.
    ZMixture(Vec<Vec<Vec<f64>>>),
    #[serde(skip)]
    Custom(CustomKernel),
}

impl Kernel {
    pub fn row<'a>(&'a self, args: &EvalArgs<'_>, row: usize) -> Cow<'a, [f64]> {
        match self {
            Kernel::Table(t) => Cow::Borrowed(&t[row]),
            Kernel::ZMixture(tables) => {
                let mut out = vec![0.0; tables[0][row].len()];
                for (w, table) in args.z.iter().zip(tables) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (o, q) in out.iter_mut().zip(&table[row]) {
                        *o += w * q;
                    }
                }
                Cow::Owned(out)
            }
            Kernel::Custom(c) => Cow::Owned((c.f)(args, row)),
        }
    }

    pub fn num_rows(&self) -> usize {
        match self {
            Kernel::Table(t) => t.len(),
            Kernel::ZMixture(tables) => tables.first().map_or(0, Vec::len),
            Kernel::Custom(c) => c.rows,
        }
    }

    /// Row-major view of every stored table, for validation and repair.
    pub(crate) fn tables_mut(&mut self) -> Vec<&mut Vec<Vec<f64>>> {
        match self {
            Kernel::Table(t) => vec![t],
            Kernel::ZMixture(tables) => tables.iter_mut().collect(),
            Kernel::Custom(_) => Vec::new(),
        }
    }

    pub fn is_serializable(&self) -> bool {
        !matches!(self, Kernel::Custom(_))
    }
}

/// An instantaneous reward: row index -> real.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reward {
    Table(Vec<f64>),
    /// `R(z, row) = base[row] + sum_y z(y) * slope[y][row]`.
    ZAffine { base: Vec<f64>, slope: Vec<Vec<f64>> },
    /// Leader-only: population-weighted minor reward plus every major's reward.
    SocialWelfare,
    #[serde(skip)]
    Custom(CustomReward),
}

impl Reward {
    /// Evaluates a table-backed reward. Social-welfare rewards are expanded by
    /// [`super::Game::lm_reward`] and must not reach this point.
    pub fn eval(&self, args: &EvalArgs<'_>, row: usize) -> f64 {
        match self {
            Reward::Table(t) => t[row],
            Reward::ZAffine { base, slope } => {
                base[row]
                    + args
                        .z
                        .iter()
                        .zip(slope)
                        .map(|(w, s)| w * s[row])
                        .sum::<f64>()
            }
            Reward::Custom(c) => (c.f)(args, row),
            Reward::SocialWelfare => unreachable!("social welfare reward evaluated without context"),
        }
    }

    pub fn num_rows(&self) -> Option<usize> {
        match self {
            Reward::Table(t) => Some(t.len()),
            Reward::ZAffine { base, .. } => Some(base.len()),
            Reward::Custom(c) => Some(c.rows),
            Reward::SocialWelfare => None,
        }
    }

    /// Bound on `|R|` over every row and every mean field, when the table
    /// form makes one computable.
    pub fn abs_bound(&self) -> Option<f64> {
        match self {
            Reward::Table(t) => Some(t.iter().fold(0.0, |m, r| m.max(r.abs()))),
            Reward::ZAffine { base, slope } => Some(
                base.iter()
                    .enumerate()
                    .map(|(row, b)| {
                        // affine in z over the simplex: extremes sit at vertices
                        slope
                            .iter()
                            .map(|s| (b + s[row]).abs())
                            .fold(b.abs(), f64::max)
                    })
                    .fold(0.0, f64::max),
            ),
            Reward::SocialWelfare | Reward::Custom(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Reward::Table(t) => t.iter().all(|r| *r == 0.0),
            Reward::ZAffine { base, slope } => {
                base.iter().all(|r| *r == 0.0) && slope.iter().flatten().all(|r| *r == 0.0)
            }
            _ => false,
        }
    }
}
