//! Exploration schedule and action selection for CA-MIQ and the baselines.
//!
//! Random draws follow a fixed order so seeded runs are reproducible: one
//! uniform `f64` in `[0, 1)` decides the branch, and the baseline's
//! exploratory branch takes one more draw for the uniform action. The
//! generator is ChaCha8 ([`AgentRng`]), seeded via `seed_from_u64` with the
//! run index as the stream id.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::Action;

pub type AgentRng = ChaCha8Rng;

/// Transient exploration boost started by a priority shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostState {
    pub start_episode: usize,
    /// ε right after the boost, already clipped to `eps_max`.
    pub eps_boosted: f64,
    pub duration: usize,
    pub eps_max: f64,
}

impl BoostState {
    /// Boost envelope `k` episodes after the start: `ε_boosted · exp(−k/D)`.
    pub fn value(&self, k: usize) -> f64 {
        if k == 0 {
            self.eps_boosted
        } else {
            self.eps_boosted * (-(k as f64) / self.duration as f64).exp()
        }
    }

    /// Active for `0 ≤ k < D`.
    pub fn is_active(&self, episode: usize) -> bool {
        episode >= self.start_episode && episode - self.start_episode < self.duration
    }
}

/// Linear ε decay over the training horizon with an optional boost envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub eps0: f64,
    pub eps_min: f64,
    pub horizon: usize,
    pub boost: Option<BoostState>,
}

impl EpsilonSchedule {
    pub fn new(eps0: f64, eps_min: f64, horizon: usize) -> Self {
        Self {
            eps0,
            eps_min,
            horizon,
            boost: None,
        }
    }

    /// Unboosted value; episodes past the horizon clamp to `eps_min`.
    pub fn linear_at(&self, episode: usize) -> f64 {
        if self.horizon == 0 || episode >= self.horizon {
            return self.eps_min;
        }
        let frac = episode as f64 / self.horizon as f64;
        (self.eps0 - (self.eps0 - self.eps_min) * frac).max(self.eps_min)
    }

    /// ε used at `episode`: the linear value, raised to the boost envelope
    /// while a boost is active.
    pub fn epsilon_at(&self, episode: usize) -> f64 {
        let linear = self.linear_at(episode);
        match &self.boost {
            Some(b) if b.is_active(episode) => {
                let boosted = b.value(episode - b.start_episode).min(b.eps_max);
                linear.max(boosted).max(self.eps_min)
            }
            _ => linear,
        }
    }
}

/// Which critic tables a selective reset touches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetScope {
    #[default]
    Both,
    IntrinsicOnly,
    ExtrinsicOnly,
}

/// Component switches for ablation runs; all off means full CA-MIQ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationFlags {
    pub disable_novelty: bool,
    /// Drops both the information-location and the alignment terms.
    pub disable_priority_components: bool,
    pub disable_boost: bool,
    pub disable_reset: bool,
    pub reset_scope: ResetScope,
}

/// The three agents under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// ε-greedy Q-learning on task reward.
    Baseline,
    /// Baseline plus a transient ε-boost after each priority change.
    BaselineBoosted,
    Camiq(AblationFlags),
}

impl AgentKind {
    pub fn camiq() -> Self {
        AgentKind::Camiq(AblationFlags::default())
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Baseline => "baseline",
            AgentKind::BaselineBoosted => "baseline_boosted",
            AgentKind::Camiq(_) => "camiq",
        }
    }

    pub fn is_camiq(&self) -> bool {
        matches!(self, AgentKind::Camiq(_))
    }
}

impl std::str::FromStr for AgentKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "baseline" => Ok(AgentKind::Baseline),
            "baseline_boosted" | "boosted" => Ok(AgentKind::BaselineBoosted),
            "camiq" | "ca-miq" => Ok(AgentKind::camiq()),
            other => Err(crate::error::Error::Config(format!(
                "unknown agent {other:?}"
            ))),
        }
    }
}

/// Which critic drove a CA-MIQ decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Intrinsic,
    Extrinsic,
}

/// Index of the largest value; ties go to the lowest index.
pub fn greedy(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// ε-gated choice between the intrinsic and extrinsic greedy actions.
pub fn select_action_camiq(
    q_extrinsic_row: &[f64],
    q_intrinsic_row: &[f64],
    eps: f64,
    rng: &mut AgentRng,
) -> (Action, Branch) {
    let u: f64 = rng.gen();
    let (row, branch) = if u < eps {
        (q_intrinsic_row, Branch::Intrinsic)
    } else {
        (q_extrinsic_row, Branch::Extrinsic)
    };
    (Action::ALL[greedy(row)], branch)
}

/// ε-greedy over the extrinsic critic.
pub fn select_action_baseline(q_extrinsic_row: &[f64], eps: f64, rng: &mut AgentRng) -> Action {
    let u: f64 = rng.gen();
    if u < eps {
        Action::ALL[rng.gen_range(0..Action::COUNT)]
    } else {
        Action::ALL[greedy(q_extrinsic_row)]
    }
}
