//! Per-run learner state and the per-step act/learn logic.

use serde::{Deserialize, Serialize};

use crate::adaptation::ShiftRecord;
use crate::critics::{
    alignment_reward, info_location_reward, intrinsic_reward, novelty_reward, CriticPair,
    IntrinsicComponents, IntrinsicWeights, LearningConfig,
};
use crate::env::{Action, Transition};
use crate::error::Result;
use crate::policy::{
    select_action_baseline, select_action_camiq, AgentKind, AgentRng, EpsilonSchedule,
};

/// Everything one agent owns during a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub kind: AgentKind,
    pub critics: CriticPair,
    pub schedule: EpsilonSchedule,
    /// Shifts this agent reacted to, in order.
    pub shift_log: Vec<ShiftRecord>,
    /// The detector stays silent before this episode.
    pub detector_quiet_until: usize,
}

/// What one step looked like from the learner's side.
#[derive(Clone, Copy, Debug)]
pub struct StepSample<'a> {
    pub state: usize,
    pub action: Action,
    pub next_state: usize,
    pub transition: &'a Transition,
    /// The post-action cell hosts an item.
    pub info_cell: bool,
}

impl Agent {
    pub fn new(kind: AgentKind, states: usize, schedule: EpsilonSchedule) -> Self {
        Self {
            kind,
            critics: CriticPair::new(states),
            schedule,
            shift_log: Vec::new(),
            detector_quiet_until: 0,
        }
    }

    pub fn act(&self, state: usize, eps: f64, rng: &mut AgentRng) -> Action {
        let q_e = self.critics.q_extrinsic.row(state);
        match self.kind {
            AgentKind::Camiq(_) => {
                select_action_camiq(q_e, self.critics.q_intrinsic.row(state), eps, rng).0
            }
            _ => select_action_baseline(q_e, eps, rng),
        }
    }

    /// Updates the critics from one transition. CA-MIQ records the visit
    /// first, then computes the intrinsic reward and updates both critics;
    /// baselines only update the extrinsic critic.
    pub fn learn(
        &mut self,
        sample: StepSample<'_>,
        learning: &LearningConfig,
        weights: &IntrinsicWeights,
    ) -> Result<Option<f64>> {
        let StepSample {
            state,
            action,
            next_state,
            transition,
            info_cell,
        } = sample;
        let a = action.index();
        let terminal = transition.is_terminal();
        self.critics.extrinsic_update(
            state,
            a,
            transition.reward,
            next_state,
            terminal,
            learning,
        )?;
        let AgentKind::Camiq(flags) = self.kind else {
            return Ok(None);
        };
        self.critics.record_visit(state, a, next_state, info_cell)?;
        let mut parts = IntrinsicComponents {
            novelty: novelty_reward(self.critics.visits(state, a), weights),
            info: info_location_reward(self.critics.info_visits(next_state), info_cell, weights),
            align: alignment_reward(transition.outcome, weights),
        };
        if flags.disable_novelty {
            parts.novelty = 0.0;
        }
        if flags.disable_priority_components {
            parts.info = 0.0;
            parts.align = 0.0;
        }
        let r_int = intrinsic_reward(parts, weights);
        self.critics
            .intrinsic_update(state, a, r_int, next_state, terminal, learning)?;
        Ok(Some(r_int))
    }
}
