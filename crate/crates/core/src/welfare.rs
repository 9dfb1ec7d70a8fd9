//! Leaders that maximize social welfare instead of a private reward.

use crate::error::{Error, Result};
use crate::model::{GameSpec, Reward};

/// Replaces leader `i`'s reward by social welfare: the minor population's
/// expected reward plus every major's reward.
pub fn social_welfare_reward(spec: &mut GameSpec, i: usize) -> Result<()> {
    let slot = spec
        .rewards
        .leaders
        .get_mut(i)
        .ok_or_else(|| Error::Argument(format!("no leader {i}")))?;
    *slot = Reward::SocialWelfare;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RandomGame;
    use crate::model::EvalArgs;

    #[test]
    fn welfare_adds_minor_and_major_rewards() {
        let mut spec = RandomGame {
            majors: vec![crate::corpus::SpaceSize::new(1, 2)],
            z_dependent: false,
            ..RandomGame::default()
        }
        .generate(9);
        social_welfare_reward(&mut spec, 0).unwrap();
        assert!(social_welfare_reward(&mut spec, 1).is_err());
        let game = spec.validate().unwrap();
        let l = game.layout();
        let z = [0.3, 0.7];
        let args = EvalArgs { z: &z, xi: None };
        let gf = vec![vec![0.25, 0.75], vec![1.0, 0.0]];
        let (js, ja) = (1, 2);
        let mut expected = game.lm_reward(1, &args, js, ja, &gf);
        for xf in 0..2 {
            for af in 0..2 {
                expected += z[xf] * gf[xf][af] * game.minor_reward(&args, js, ja, xf, af);
            }
        }
        let got = game.lm_reward(0, &args, js, ja, &gf);
        assert!((got - expected).abs() < 1e-12);
        assert_eq!(l.num_majors, 1);
    }
}
