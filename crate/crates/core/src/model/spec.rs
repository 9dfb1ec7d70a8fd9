use serde::{Deserialize, Serialize};

use super::prob::{self, ROW_SUM_TOL};
use super::tables::{EvalArgs, Kernel, Reward};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSpace {
    pub states: Vec<String>,
    pub actions: Vec<String>,
}

impl PlayerSpace {
    pub fn new(states: &[&str], actions: &[&str]) -> Self {
        PlayerSpace {
            states: states.iter().map(|s| s.to_string()).collect(),
            actions: actions.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Labels `s0..s{n}` / `a0..a{m}`.
    pub fn indexed(num_states: usize, num_actions: usize) -> Self {
        PlayerSpace {
            states: (0..num_states).map(|i| format!("s{i}")).collect(),
            actions: (0..num_actions).map(|i| format!("a{i}")).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernels {
    pub leaders: Vec<Kernel>,
    #[serde(default)]
    pub majors: Vec<Kernel>,
    pub minor: Kernel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardFunctions {
    pub leaders: Vec<Reward>,
    #[serde(default)]
    pub majors: Vec<Reward>,
    pub minor: Reward,
}

/// Full description of a finite Stackelberg mean-field game.
///
/// Leader/major kernels and rewards are indexed by `joint_state * |joint actions| +
/// joint_action`; the minor kernel and reward by
/// `((joint_state * |joint actions| + joint_action) * |X^f| + minor_state) * |A^f| + minor_action`.
/// Joint indices are mixed-radix with leaders first, then majors, the first
/// player most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(default)]
    pub name: String,
    pub horizon: Horizon,
    pub discount: f64,
    /// Declared bound on every `|R|`; required for programmatic rewards in
    /// infinite-horizon games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_bound: Option<f64>,
    pub leaders: Vec<PlayerSpace>,
    #[serde(default)]
    pub majors: Vec<PlayerSpace>,
    pub minor: PlayerSpace,
    /// Distribution over joint leader/major states at t = 1.
    pub initial_leader_major_dist: Vec<f64>,
    pub initial_mean_field: Vec<f64>,
    pub kernels: TransitionKernels,
    pub rewards: RewardFunctions,
}

/// Dense mixed-radix indexing of tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedRadix {
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Self {
        let mut strides = vec![1; radices.len()];
        for p in (0..radices.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * radices[p + 1];
        }
        let size = radices.iter().product();
        MixedRadix {
            radices,
            strides,
            size,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn digit(&self, index: usize, position: usize) -> usize {
        (index / self.strides[position]) % self.radices[position]
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.radices.len())
            .map(|p| self.digit(index, p))
            .collect()
    }

    /// Replaces one digit of an encoded index.
    pub fn with_digit(&self, index: usize, position: usize, value: usize) -> usize {
        index - self.digit(index, position) * self.strides[position]
            + value * self.strides[position]
    }
}

/// Index arithmetic shared by every computation on a game.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub num_leaders: usize,
    pub num_majors: usize,
    pub states: MixedRadix,
    pub actions: MixedRadix,
    pub minor_states: usize,
    pub minor_actions: usize,
    state_digits: Vec<Vec<usize>>,
    action_digits: Vec<Vec<usize>>,
}

impl Layout {
    fn new(spec: &GameSpec) -> Self {
        let players = spec.leaders.iter().chain(&spec.majors);
        let states = MixedRadix::new(players.clone().map(|p| p.states.len()).collect());
        let actions = MixedRadix::new(players.map(|p| p.actions.len()).collect());
        let state_digits = (0..states.size()).map(|i| states.decode(i)).collect();
        let action_digits = (0..actions.size()).map(|i| actions.decode(i)).collect();
        Layout {
            num_leaders: spec.leaders.len(),
            num_majors: spec.majors.len(),
            minor_states: spec.minor.states.len(),
            minor_actions: spec.minor.actions.len(),
            states,
            actions,
            state_digits,
            action_digits,
        }
    }

    /// Number of leader + major players.
    pub fn num_lm(&self) -> usize {
        self.num_leaders + self.num_majors
    }

    pub fn joint_states(&self) -> usize {
        self.states.size()
    }

    pub fn joint_actions(&self) -> usize {
        self.actions.size()
    }

    pub fn state_digits(&self, joint_state: usize) -> &[usize] {
        &self.state_digits[joint_state]
    }

    pub fn action_digits(&self, joint_action: usize) -> &[usize] {
        &self.action_digits[joint_action]
    }

    pub fn player_states(&self, p: usize) -> usize {
        self.states.radices()[p]
    }

    pub fn player_actions(&self, p: usize) -> usize {
        self.actions.radices()[p]
    }

    pub fn major_player(&self, j: usize) -> usize {
        self.num_leaders + j
    }

    pub fn lm_row(&self, joint_state: usize, joint_action: usize) -> usize {
        joint_state * self.joint_actions() + joint_action
    }

    pub fn minor_row(
        &self,
        joint_state: usize,
        joint_action: usize,
        minor_state: usize,
        minor_action: usize,
    ) -> usize {
        (self.lm_row(joint_state, joint_action) * self.minor_states + minor_state)
            * self.minor_actions
            + minor_action
    }

    pub fn lm_rows(&self) -> usize {
        self.joint_states() * self.joint_actions()
    }

    pub fn minor_rows(&self) -> usize {
        self.lm_rows() * self.minor_states * self.minor_actions
    }
}

/// A validated game with its index layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    spec: GameSpec,
    layout: Layout,
}

impl Game {
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn into_spec(self) -> GameSpec {
        self.spec
    }

    pub fn discount(&self) -> f64 {
        self.spec.discount
    }

    /// Finite horizon `T`, or `None` for an infinite horizon.
    pub fn horizon(&self) -> Option<u32> {
        match self.spec.horizon {
            Horizon::Finite(t) => Some(t),
            Horizon::Infinite => None,
        }
    }

    pub fn lm_kernel(&self, p: usize) -> &Kernel {
        let k = &self.spec.kernels;
        if p < self.layout.num_leaders {
            &k.leaders[p]
        } else {
            &k.majors[p - self.layout.num_leaders]
        }
    }

    pub fn lm_reward_fn(&self, p: usize) -> &Reward {
        let r = &self.spec.rewards;
        if p < self.layout.num_leaders {
            &r.leaders[p]
        } else {
            &r.majors[p - self.layout.num_leaders]
        }
    }

    pub fn minor_kernel(&self) -> &Kernel {
        &self.spec.kernels.minor
    }

    pub fn minor_reward(
        &self,
        args: &EvalArgs<'_>,
        joint_state: usize,
        joint_action: usize,
        minor_state: usize,
        minor_action: usize,
    ) -> f64 {
        let row = self
            .layout
            .minor_row(joint_state, joint_action, minor_state, minor_action);
        self.spec.rewards.minor.eval(args, row)
    }

    /// Reward of leader/major player `p`. `minor_policy` (rows indexed by minor
    /// state) is read only by a social-welfare leader reward.
    pub fn lm_reward(
        &self,
        p: usize,
        args: &EvalArgs<'_>,
        joint_state: usize,
        joint_action: usize,
        minor_policy: &[Vec<f64>],
    ) -> f64 {
        match self.lm_reward_fn(p) {
            Reward::SocialWelfare => {
                let mut total = 0.0;
                for (xf, zf) in args.z.iter().enumerate() {
                    if *zf == 0.0 {
                        continue;
                    }
                    for (af, g) in minor_policy[xf].iter().enumerate() {
                        if *g == 0.0 {
                            continue;
                        }
                        total +=
                            zf * g * self.minor_reward(args, joint_state, joint_action, xf, af);
                    }
                }
                let row = self.layout.lm_row(joint_state, joint_action);
                for j in 0..self.layout.num_majors {
                    total += self.spec.rewards.majors[j].eval(args, row);
                }
                total
            }
            r => r.eval(args, self.layout.lm_row(joint_state, joint_action)),
        }
    }

    /// Marginals of the initial joint leader/major distribution.
    pub fn initial_marginals(&self) -> Vec<Vec<f64>> {
        let l = &self.layout;
        let mut out: Vec<Vec<f64>> = (0..l.num_lm()).map(|p| vec![0.0; l.player_states(p)]).collect();
        for (js, w) in self.spec.initial_leader_major_dist.iter().enumerate() {
            for (p, x) in l.state_digits(js).iter().enumerate() {
                out[p][*x] += w;
            }
        }
        for m in &mut out {
            prob::clamp_normalize(m);
        }
        out
    }

    /// Whether every leader and major has a single private state.
    pub fn has_public_leaders_and_majors(&self) -> bool {
        self.layout.joint_states() == 1
    }
}

impl GameSpec {
    /// Checks every invariant and repairs rows whose mass is off by less than
    /// the row-sum tolerance.
    pub fn validate(mut self) -> Result<Game> {
        let fail = |m: String| Err(Error::InvalidSpec(m));
        if self.leaders.is_empty() {
            return fail("at least one leader is required".into());
        }
        let spaces = self
            .leaders
            .iter()
            .map(|s| ("leader", s))
            .chain(self.majors.iter().map(|s| ("major", s)))
            .chain(std::iter::once(("minor", &self.minor)));
        for (kind, space) in spaces {
            if space.states.is_empty() || space.actions.is_empty() {
                return fail(format!("{kind} has an empty state or action space"));
            }
            for labels in [&space.states, &space.actions] {
                let mut sorted = labels.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != labels.len() {
                    return fail(format!("{kind} has duplicate labels in {labels:?}"));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return fail(format!("discount {} outside [0, 1]", self.discount));
        }
        match self.horizon {
            Horizon::Finite(0) => return fail("horizon must be at least 1".into()),
            Horizon::Infinite if self.discount >= 1.0 => {
                return fail("discount must be < 1 for infinite horizon".into())
            }
            _ => {}
        }

        let layout = Layout::new(&self);
        let n_lm = layout.num_lm();

        check_distribution(
            &mut self.initial_leader_major_dist,
            layout.joint_states(),
            "initial_leader_major_dist",
        )?;
        check_distribution(
            &mut self.initial_mean_field,
            layout.minor_states,
            "initial_mean_field",
        )?;

        if self.kernels.leaders.len() != layout.num_leaders
            || self.kernels.majors.len() != layout.num_majors
        {
            return fail(format!(
                "expected {} leader and {} major kernels, got {} and {}",
                layout.num_leaders,
                layout.num_majors,
                self.kernels.leaders.len(),
                self.kernels.majors.len()
            ));
        }
        if self.rewards.leaders.len() != layout.num_leaders
            || self.rewards.majors.len() != layout.num_majors
        {
            return fail(format!(
                "expected {} leader and {} major rewards, got {} and {}",
                layout.num_leaders,
                layout.num_majors,
                self.rewards.leaders.len(),
                self.rewards.majors.len()
            ));
        }

        let z_probe = self.initial_mean_field.clone();
        for p in 0..n_lm {
            let (kernel, name) = if p < layout.num_leaders {
                (&mut self.kernels.leaders[p], format!("leader {p} kernel"))
            } else {
                let j = p - layout.num_leaders;
                (&mut self.kernels.majors[j], format!("major {j} kernel"))
            };
            check_kernel(
                kernel,
                layout.lm_rows(),
                layout.player_states(p),
                layout.minor_states,
                &z_probe,
                &name,
            )?;
        }
        check_kernel(
            &mut self.kernels.minor,
            layout.minor_rows(),
            layout.minor_states,
            layout.minor_states,
            &z_probe,
            "minor kernel",
        )?;

        for (i, r) in self.rewards.leaders.iter().enumerate() {
            check_reward(r, layout.lm_rows(), layout.minor_states, true, &format!("leader {i} reward"))?;
        }
        for (j, r) in self.rewards.majors.iter().enumerate() {
            check_reward(r, layout.lm_rows(), layout.minor_states, false, &format!("major {j} reward"))?;
        }
        check_reward(&self.rewards.minor, layout.minor_rows(), layout.minor_states, false, "minor reward")?;

        if self.horizon == Horizon::Infinite {
            let all = self
                .rewards
                .leaders
                .iter()
                .chain(&self.rewards.majors)
                .chain(std::iter::once(&self.rewards.minor));
            for r in all {
                match (r.abs_bound(), self.reward_bound) {
                    (Some(b), Some(declared)) if b > declared => {
                        return fail(format!(
                            "reward magnitude {b} exceeds declared bound {declared}"
                        ))
                    }
                    (None, None) if !matches!(r, Reward::SocialWelfare) => {
                        return fail(
                            "infinite horizon with programmatic rewards needs reward_bound".into(),
                        )
                    }
                    _ => {}
                }
            }
        }

        Ok(Game { spec: self, layout })
    }
}

/// Free-function form of [`GameSpec::validate`].
pub fn validate_game(spec: GameSpec) -> Result<Game> {
    spec.validate()
}

fn repair_row(row: &mut [f64], name: &str, index: usize) -> Result<()> {
    if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < -prob::PROB_FLOOR) {
        return Err(Error::InvalidSpec(format!(
            "{name} row {index} has invalid probability {bad}"
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidSpec(format!(
            "{name} row {index} sums to {sum}"
        )));
    }
    if row.iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > 8.0 * f64::EPSILON {
        prob::clamp_normalize(row);
    }
    Ok(())
}

fn check_distribution(v: &mut [f64], len: usize, name: &str) -> Result<()> {
    if v.len() != len {
        return Err(Error::InvalidSpec(format!(
            "{name} has {} entries, expected {len}",
            v.len()
        )));
    }
    repair_row(v, name, 0)
}

fn check_kernel(
    kernel: &mut Kernel,
    rows: usize,
    outcomes: usize,
    minor_states: usize,
    z_probe: &[f64],
    name: &str,
) -> Result<()> {
    if let Kernel::ZMixture(tables) = kernel {
        if tables.len() != minor_states {
            return Err(Error::InvalidSpec(format!(
                "{name} has {} mixture tables, expected one per minor state ({minor_states})",
                tables.len()
            )));
        }
    }
    if let Kernel::Custom(c) = kernel {
        if c.rows != rows || c.outcomes != outcomes {
            return Err(Error::InvalidSpec(format!(
                "{name} is {}x{}, expected {rows}x{outcomes}",
                c.rows, c.outcomes
            )));
        }
        let args = EvalArgs {
            z: z_probe,
            xi: None,
        };
        for r in 0..rows {
            let mut row = (c.f)(&args, r);
            if row.len() != outcomes {
                return Err(Error::InvalidSpec(format!(
                    "{name} row {r} has {} entries, expected {outcomes}",
                    row.len()
                )));
            }
            repair_row(&mut row, name, r)?;
        }
        return Ok(());
    }
    for table in kernel.tables_mut() {
        if table.len() != rows {
            return Err(Error::InvalidSpec(format!(
                "{name} has {} rows, expected {rows}",
                table.len()
            )));
        }
        for (r, row) in table.iter_mut().enumerate() {
            if row.len() != outcomes {
                return Err(Error::InvalidSpec(format!(
                    "{name} row {r} has {} entries, expected {outcomes}",
                    row.len()
                )));
            }
            repair_row(row, name, r)?;
        }
    }
    Ok(())
}

fn check_reward(
    reward: &Reward,
    rows: usize,
    minor_states: usize,
    is_leader: bool,
    name: &str,
) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidSpec(format!("{name}: {m}")));
    match reward {
        Reward::SocialWelfare if !is_leader => bad("social welfare rewards are leader-only".into()),
        Reward::SocialWelfare => Ok(()),
        Reward::Table(t) => {
            if t.len() != rows {
                return bad(format!("{} rows, expected {rows}", t.len()));
            }
            if let Some(r) = t.iter().position(|v| !v.is_finite()) {
                return bad(format!("row {r} is not finite"));
            }
            Ok(())
        }
        Reward::ZAffine { base, slope } => {
            if base.len() != rows || slope.len() != minor_states {
                return bad(format!(
                    "affine reward has {} rows and {} slopes, expected {rows} and {minor_states}",
                    base.len(),
                    slope.len()
                ));
            }
            if slope.iter().any(|s| s.len() != rows) {
                return bad("slope table length mismatch".into());
            }
            if base.iter().chain(slope.iter().flatten()).any(|v| !v.is_finite()) {
                return bad("non-finite entry".into());
            }
            Ok(())
        }
        Reward::Custom(c) if c.rows != rows => bad(format!("{} rows, expected {rows}", c.rows)),
        Reward::Custom(_) => Ok(()),
    }
}
