//! Value iteration on the tabular `(cell, collected)` MDP of one layout
//! under a fixed ordering. Used to verify learned greedy policies.
//!
//! Per-episode attempt counters and the step limit are not part of the
//! tabular state; the optimal policy never repeats a collect, so neither
//! affects the optimum.

use crate::critics::QTable;
use crate::env::{self, Action, EnvState, InformationSpace, Layout, RewardConfig};
use crate::error::Result;
use crate::policy::greedy;

#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub q: QTable,
    pub values: Vec<f64>,
    pub iterations: usize,
}

impl OracleSolution {
    pub fn greedy_action(&self, state: usize) -> Action {
        Action::ALL[greedy(self.q.row(state))]
    }
}

/// Successor, reward and terminal flag for every `(state, action)`.
struct Model {
    next: Vec<usize>,
    reward: Vec<f64>,
    terminal: Vec<bool>,
    /// States that can never be occupied mid-episode (ditches, or the target
    /// with every item collected).
    dead: Vec<bool>,
}

fn build_model(layout: &Layout, info: &InformationSpace, rewards: &RewardConfig) -> Result<Model> {
    let n = env::state_count(layout);
    let untimed = RewardConfig {
        step_limit: u32::MAX,
        ..rewards.clone()
    };
    let full = (1u32 << layout.item_count()) - 1;
    let mut model = Model {
        next: vec![0; n * Action::COUNT],
        reward: vec![0.0; n * Action::COUNT],
        terminal: vec![true; n * Action::COUNT],
        dead: vec![false; n],
    };
    let template = env::reset(layout, info, 0)?;
    for s in 0..n {
        let (cell, collected) = env::state_from_index(s, layout);
        if layout.is_ditch(cell) || (cell == layout.target() && collected == full) {
            model.dead[s] = true;
            continue;
        }
        let state = EnvState {
            cell,
            collected,
            ..template.clone()
        };
        for a in Action::ALL {
            let t = env::step(&state, a, layout, info, &untimed)?;
            let i = s * Action::COUNT + a.index();
            model.next[i] = env::state_index(&t.next_state, layout);
            model.reward[i] = t.reward;
            model.terminal[i] = t.is_terminal();
        }
    }
    Ok(model)
}

/// Runs value iteration until the largest update is below `tolerance`.
pub fn value_iteration(
    layout: &Layout,
    info: &InformationSpace,
    rewards: &RewardConfig,
    gamma: f64,
    tolerance: f64,
) -> Result<OracleSolution> {
    let model = build_model(layout, info, rewards)?;
    let n = env::state_count(layout);
    let mut q = QTable::zeros(n, Action::COUNT);
    let mut values = vec![0.0; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for s in (0..n).filter(|s| !model.dead[*s]) {
            for a in 0..Action::COUNT {
                let i = s * Action::COUNT + a;
                let bootstrap = if model.terminal[i] {
                    0.0
                } else {
                    values[model.next[i]]
                };
                q.set(s, a, model.reward[i] + gamma * bootstrap);
            }
        }
        for s in (0..n).filter(|s| !model.dead[*s]) {
            let v = q.max_value(s);
            delta = delta.max((v - values[s]).abs());
            values[s] = v;
        }
        if delta < tolerance || iterations >= 1_000_000 {
            break;
        }
    }
    Ok(OracleSolution {
        q,
        values,
        iterations,
    })
}

/// Undiscounted return of following `policy` greedily from the start cell
/// until the episode ends.
pub fn rollout_return(
    layout: &Layout,
    info: &InformationSpace,
    rewards: &RewardConfig,
    mut policy: impl FnMut(usize) -> Action,
) -> Result<(f64, EnvState)> {
    let mut state = env::reset(layout, info, 0)?;
    let mut total = 0.0;
    while !state.done {
        let a = policy(env::state_index(&state, layout));
        let t = env::step(&state, a, layout, info, rewards)?;
        total += t.reward;
        state = t.next_state;
    }
    Ok((total, state))
}

/// Episode return of the value-iteration greedy policy.
pub fn optimal_return(
    layout: &Layout,
    info: &InformationSpace,
    rewards: &RewardConfig,
    gamma: f64,
) -> Result<f64> {
    let sol = value_iteration(layout, info, rewards, gamma, 1e-12)?;
    Ok(rollout_return(layout, info, rewards, |s| sol.greedy_action(s))?.0)
}
