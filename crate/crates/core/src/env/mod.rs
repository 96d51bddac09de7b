//! Deterministic search-and-rescue gridworld.
//!
//! The agent walks a small grid, collects information items in the order
//! dictated by the active [`InformationSpace`] ordering, and completes the
//! mission by reaching the target with every item in hand. The tabular
//! state is `(cell, collected mask)`; see [`state_index`].

mod info;
mod layout;

use serde::{Deserialize, Serialize};

pub use info::{InformationSpace, Ordering, OrderingChange};
pub use layout::{
    default_pool, parse_pool, serialize_pool, Cell, ItemId, Layout, DEFAULT_POOL, MAX_ITEMS,
};

use crate::error::{Error, Result};

/// Agent actions. The discriminant is the column index in Q tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Collect = 4,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; Action::COUNT] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Collect,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::UnknownAction(index))
    }

    fn delta(self) -> Option<(isize, isize)> {
        match self {
            Action::Up => Some((-1, 0)),
            Action::Down => Some((1, 0)),
            Action::Left => Some((0, -1)),
            Action::Right => Some((0, 1)),
            Action::Collect => None,
        }
    }
}

/// Reward magnitudes and episode limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Charged on every action, including blocked moves and collects.
    pub step_cost: f64,
    /// Entering a ditch; the episode ends.
    pub ditch_penalty: f64,
    pub collect_reward: f64,
    pub out_of_order_penalty: f64,
    /// Reaching the target holding every item.
    pub mission_reward: f64,
    /// Collect at a non-item cell, at an already-collected item, or past the
    /// per-cell attempt limit.
    pub action_limit_penalty: f64,
    pub collect_attempt_limit: u32,
    pub step_limit: u32,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            step_cost: -1.0,
            ditch_penalty: -50.0,
            collect_reward: 20.0,
            out_of_order_penalty: -10.0,
            mission_reward: 100.0,
            action_limit_penalty: -5.0,
            collect_attempt_limit: 3,
            step_limit: 100,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.into()))
            }
        };
        check(self.step_cost <= 0.0, "step_cost ≤ 0")?;
        check(self.ditch_penalty < 0.0, "ditch_penalty < 0")?;
        check(self.collect_reward > 0.0, "collect_reward > 0")?;
        check(
            self.mission_reward > self.collect_reward,
            "mission_reward > collect_reward",
        )?;
        check(self.collect_attempt_limit >= 1, "collect_attempt_limit ≥ 1")?;
        check(self.step_limit >= 1, "step_limit ≥ 1")?;
        check(
            [
                self.step_cost,
                self.ditch_penalty,
                self.collect_reward,
                self.out_of_order_penalty,
                self.mission_reward,
                self.action_limit_penalty,
            ]
            .iter()
            .all(|v| v.is_finite()),
            "rewards must be finite",
        )
    }
}

/// What a step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Moved,
    Blocked,
    Ditch,
    CollectedInOrder,
    CollectedOutOfOrderRejected,
    AttemptLimitExceeded,
    MissionComplete,
    StepLimit,
}

/// Per-episode environment state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnvState {
    pub cell: Cell,
    /// Bit `i` set when the layout's `i`-th item (by id) has been collected.
    pub collected: u32,
    pub steps: u32,
    /// Collect attempts this episode, indexed by item bit. Only item cells
    /// carry a limit, so non-item cells are not tracked.
    pub collect_attempts: Vec<u32>,
    pub done: bool,
    pub mission_success: bool,
}

impl EnvState {
    pub fn collected_count(&self) -> u32 {
        self.collected.count_ones()
    }

    pub fn has_collected(&self, bit: usize) -> bool {
        self.collected & (1 << bit) != 0
    }
}

/// Result of [`step`].
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub next_state: EnvState,
    pub reward: f64,
    pub done: bool,
    /// `StepLimit` when the step limit cut the episode, otherwise equal to `outcome`.
    pub event: Event,
    /// What the action itself did; the reward is always determined by this.
    pub outcome: Event,
}

impl Transition {
    /// True when the episode ended on a real terminal state rather than the
    /// step limit; bootstrapping stops only in that case.
    pub fn is_terminal(&self) -> bool {
        self.done && self.event != Event::StepLimit
    }
}

/// Number of tabular states: `cells × 2^items`.
pub fn state_count(layout: &Layout) -> usize {
    layout.cell_count() << layout.item_count()
}

/// Bijective index of `(cell, collected)` in `[0, state_count)`.
pub fn state_index(state: &EnvState, layout: &Layout) -> usize {
    (layout.cell_number(state.cell) << layout.item_count()) | state.collected as usize
}

/// Inverse of [`state_index`].
pub fn state_from_index(index: usize, layout: &Layout) -> (Cell, u32) {
    let n = layout.item_count();
    (
        layout.cell_from_number(index >> n),
        (index & ((1 << n) - 1)) as u32,
    )
}

fn check_items(layout: &Layout, info: &InformationSpace) -> Result<()> {
    if layout.item_ids() != info.items() {
        return Err(Error::InvalidLayout {
            layout_id: layout.id().to_string(),
            constraint: "layout items must match the information space items".into(),
        });
    }
    Ok(())
}

/// Initial state of an episode. The environment is deterministic, so `seed`
/// does not influence the result; it is accepted for API symmetry with
/// stochastic environments.
pub fn reset(layout: &Layout, info: &InformationSpace, _seed: u64) -> Result<EnvState> {
    layout.validate()?;
    check_items(layout, info)?;
    Ok(EnvState {
        cell: layout.start(),
        collected: 0,
        steps: 0,
        collect_attempts: vec![0; layout.item_count()],
        done: false,
        mission_success: false,
    })
}

/// Applies `action` to `state`.
pub fn step(
    state: &EnvState,
    action: Action,
    layout: &Layout,
    info: &InformationSpace,
    rewards: &RewardConfig,
) -> Result<Transition> {
    if state.done {
        return Err(Error::EpisodeDone);
    }
    let mut next = state.clone();
    next.steps += 1;
    let cost = rewards.step_cost;
    let all_items = (1u32 << layout.item_count()) - 1;

    let (outcome, reward) = match action.delta() {
        Some((dr, dc)) => {
            let row = state.cell.row as isize + dr;
            let col = state.cell.col as isize + dc;
            if !layout.in_bounds(row, col) {
                (Event::Blocked, cost)
            } else {
                next.cell = Cell::new(row as usize, col as usize);
                if layout.is_ditch(next.cell) {
                    next.done = true;
                    (Event::Ditch, cost + rewards.ditch_penalty)
                } else if next.cell == layout.target() && next.collected == all_items {
                    next.done = true;
                    next.mission_success = true;
                    (Event::MissionComplete, cost + rewards.mission_reward)
                } else {
                    (Event::Moved, cost)
                }
            }
        }
        None => match layout.item_at(state.cell) {
            None => (
                Event::AttemptLimitExceeded,
                cost + rewards.action_limit_penalty,
            ),
            Some((bit, item)) => {
                next.collect_attempts[bit] += 1;
                if next.collect_attempts[bit] > rewards.collect_attempt_limit
                    || state.has_collected(bit)
                {
                    (
                        Event::AttemptLimitExceeded,
                        cost + rewards.action_limit_penalty,
                    )
                } else if next_required(state, layout, info) == Some(item) {
                    next.collected |= 1 << bit;
                    (Event::CollectedInOrder, cost + rewards.collect_reward)
                } else {
                    (
                        Event::CollectedOutOfOrderRejected,
                        cost + rewards.out_of_order_penalty,
                    )
                }
            }
        },
    };

    let mut event = outcome;
    if !next.done && next.steps >= rewards.step_limit {
        next.done = true;
        event = Event::StepLimit;
    }
    Ok(Transition {
        done: next.done,
        next_state: next,
        reward,
        event,
        outcome,
    })
}

/// Highest-priority item not yet collected.
pub fn next_required(state: &EnvState, layout: &Layout, info: &InformationSpace) -> Option<ItemId> {
    info.ordering().items().iter().copied().find(|item| {
        layout
            .item_bit(*item)
            .is_some_and(|bit| !state.has_collected(bit))
    })
}
