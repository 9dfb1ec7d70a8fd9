//! Game description, validation and index layout.

pub mod prob;
pub mod spec;
pub mod tables;

pub use spec::{
    validate_game, Game, GameSpec, Horizon, Layout, MixedRadix, PlayerSpace, RewardFunctions,
    TransitionKernels,
};
pub use tables::{CustomKernel, CustomReward, EvalArgs, Kernel, Reward};
