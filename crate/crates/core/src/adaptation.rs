//! Priority-shift handling: detection, transient ε-boost and selective
//! critic reset.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::critics::CriticPair;
use crate::env::{Action, Ordering};
use crate::error::{Error, Result};
use crate::policy::{AgentKind, BoostState, EpsilonSchedule, ResetScope};

/// How the agent learns that priorities changed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMode {
    /// Operator notification only.
    Explicit,
    /// Success-rate drop detector only.
    Detected,
    /// Both; a notification or a detection silences the detector for one
    /// window.
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptationConfig {
    pub lambda_boost: f64,
    pub eps_max: f64,
    /// Boost length in episodes.
    pub d_boost: usize,
    pub lambda_reset: f64,
    pub detector_window: usize,
    /// Relative drop in windowed collection success that counts as a shift.
    pub detector_drop: f64,
    pub mode: DetectionMode,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            lambda_boost: 2.0,
            eps_max: 1.0,
            d_boost: 50,
            lambda_reset: 0.5,
            detector_window: 50,
            detector_drop: 0.5,
            mode: DetectionMode::Both,
        }
    }
}

impl AdaptationConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.into()))
            }
        };
        check(self.lambda_boost >= 1.0, "lambda_boost ≥ 1")?;
        check(
            self.lambda_reset > 0.0 && self.lambda_reset <= 1.0,
            "0 < lambda_reset ≤ 1",
        )?;
        check(self.eps_max > 0.0 && self.eps_max <= 1.0, "eps_max ≤ 1")?;
        check(self.d_boost >= 1, "d_boost ≥ 1")?;
        check(self.detector_window >= 1, "detector_window ≥ 1")?;
        check(
            self.detector_drop > 0.0 && self.detector_drop <= 1.0,
            "0 < detector_drop ≤ 1",
        )
    }

    pub fn uses_operator(&self) -> bool {
        matches!(self.mode, DetectionMode::Explicit | DetectionMode::Both)
    }

    pub fn uses_detector(&self) -> bool {
        matches!(self.mode, DetectionMode::Detected | DetectionMode::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSource {
    Operator,
    Detector,
}

/// A priority shift as seen by an agent. Detector records carry the
/// ordering active at detection time on both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub episode: usize,
    pub source: ShiftSource,
    pub old_ordering: Ordering,
    pub new_ordering: Ordering,
}

/// One event-log line: `episode,source,old->new`.
impl fmt::Display for ShiftRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match self.source {
            ShiftSource::Operator => "operator",
            ShiftSource::Detector => "detector",
        };
        write!(
            f,
            "{},{},{} => {}",
            self.episode, source, self.old_ordering, self.new_ordering
        )
    }
}

/// True when the recent window's mean success fell below
/// `(1 − drop) ×` the preceding window's mean.
pub fn detect_shift(history: &[bool], cfg: &AdaptationConfig) -> bool {
    let w = cfg.detector_window;
    if w == 0 || history.len() < 2 * w {
        return false;
    }
    let n = history.len();
    let mean = |s: &[bool]| s.iter().filter(|b| **b).count() as f64 / s.len() as f64;
    let recent = mean(&history[n - w..]);
    let prior = mean(&history[n - 2 * w..n - w]);
    prior > 0.0 && recent < (1.0 - cfg.detector_drop) * prior
}

/// Starts a boost at `episode` from `current_eps`: `min(ε_max, ε · λ_boost)`.
pub fn apply_boost(
    schedule: &EpsilonSchedule,
    current_eps: f64,
    cfg: &AdaptationConfig,
    episode: usize,
) -> EpsilonSchedule {
    let mut next = schedule.clone();
    next.boost = Some(BoostState {
        start_episode: episode,
        eps_boosted: (current_eps * cfg.lambda_boost).min(cfg.eps_max),
        duration: cfg.d_boost,
        eps_max: cfg.eps_max,
    });
    next
}

/// ε `k` episodes into a boost.
pub fn boosted_epsilon(boost: &BoostState, k: usize) -> f64 {
    boost.value(k)
}

/// Scales the collection-action columns of the selected tables by `lambda`;
/// every other entry is left untouched.
pub fn selective_reset(
    critics: &mut CriticPair,
    collection_actions: &[Action],
    lambda: f64,
    scope: ResetScope,
) -> Result<()> {
    if collection_actions.is_empty() {
        return Err(Error::Config(
            "collection action set must not be empty".into(),
        ));
    }
    for a in collection_actions {
        if matches!(scope, ResetScope::Both | ResetScope::ExtrinsicOnly) {
            critics.q_extrinsic.scale_column(a.index(), lambda);
        }
        if matches!(scope, ResetScope::Both | ResetScope::IntrinsicOnly) {
            critics.q_intrinsic.scale_column(a.index(), lambda);
        }
    }
    Ok(())
}

/// Reacts to a shift according to the agent kind and logs the record.
/// Baselines do not adapt; the boosted baseline only gets the ε-boost.
pub fn on_shift(
    agent: &mut Agent,
    cfg: &AdaptationConfig,
    episode: usize,
    record: ShiftRecord,
) -> Result<()> {
    match agent.kind {
        AgentKind::Baseline => {}
        AgentKind::BaselineBoosted => {
            let eps = agent.schedule.epsilon_at(episode);
            agent.schedule = apply_boost(&agent.schedule, eps, cfg, episode);
        }
        AgentKind::Camiq(flags) => {
            if !flags.disable_boost {
                let eps = agent.schedule.epsilon_at(episode);
                agent.schedule = apply_boost(&agent.schedule, eps, cfg, episode);
            }
            if !flags.disable_reset {
                selective_reset(
                    &mut agent.critics,
                    &[Action::Collect],
                    cfg.lambda_reset,
                    flags.reset_scope,
                )?;
            }
        }
    }
    agent.shift_log.push(record);
    Ok(())
}
