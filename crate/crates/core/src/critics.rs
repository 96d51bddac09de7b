//! Extrinsic and intrinsic tabular critics and the composite intrinsic reward.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::env::{Action, Event};
use crate::error::{Error, Result};

/// Dense `states × actions` table of action values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
}

const MATRIX_MAGIC: &[u8; 4] = b"QTB1";

impl QTable {
    pub fn zeros(states: usize, actions: usize) -> Self {
        Self {
            states,
            actions,
            values: vec![0.0; states * actions],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    fn check(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                len: self.states,
            });
        }
        if a >= self.actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                len: self.actions,
            });
        }
        Ok(())
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// One-step temporal-difference update toward `r + γ max Q(s', ·)`; the
    /// bootstrap term is dropped when `terminal`. Returns the new entry.
    pub fn td_update(
        &mut self,
        s: usize,
        a: usize,
        r: f64,
        s_next: usize,
        terminal: bool,
        cfg: &LearningConfig,
    ) -> Result<f64> {
        self.check(s, a)?;
        self.check(s_next, 0)?;
        let bootstrap = if terminal {
            0.0
        } else {
            self.max_value(s_next)
        };
        let old = self.get(s, a);
        let new = old + cfg.alpha * (r + cfg.gamma * bootstrap - old);
        self.set(s, a, new);
        Ok(new)
    }

    /// Multiplies column `a` by `factor` in every row.
    pub fn scale_column(&mut self, a: usize, factor: f64) {
        for s in 0..self.states {
            let i = s * self.actions + a;
            self.values[i] *= factor;
        }
    }

    /// Text matrix: one line per state, action values separated by spaces.
    /// Values use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in 0..self.states {
            let row: Vec<String> = self.row(s).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut actions = None;
        let mut states = 0;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: n + 1,
                    message: e.to_string(),
                })?;
            match actions {
                None => actions = Some(row.len()),
                Some(a) if a != row.len() => {
                    return Err(Error::Parse {
                        line: n + 1,
                        message: format!("expected {a} columns, found {}", row.len()),
                    })
                }
                _ => {}
            }
            values.extend(row);
            states += 1;
        }
        Ok(Self {
            states,
            actions: actions.unwrap_or(0),
            values,
        })
    }

    /// Binary form: `QTB1`, rows and columns as little-endian u64, then the
    /// values as little-endian f64 in row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MATRIX_MAGIC)?;
        w.write_all(&(self.states as u64).to_le_bytes())?;
        w.write_all(&(self.actions as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MATRIX_MAGIC {
            return Err(Error::Serde("not a Q-table matrix".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let states = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let actions = u64::from_le_bytes(word) as usize;
        let len = states
            .checked_mul(actions)
            .ok_or_else(|| Error::Serde("matrix dimensions overflow".into()))?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok(Self {
            states,
            actions,
            values,
        })
    }
}

/// Learning rate and discount shared by both critics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningConfig {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.99,
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config("0 < alpha ≤ 1".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("0 ≤ gamma < 1".into()));
        }
        Ok(())
    }
}

/// Coefficients of the three intrinsic components and their mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntrinsicWeights {
    /// Novelty scale.
    pub beta1: f64,
    /// Information-location scale.
    pub beta2: f64,
    /// Bonus for in-order collection.
    pub beta3: f64,
    /// Penalty for out-of-order collection.
    pub beta4: f64,
    pub w_novelty: f64,
    pub w_info: f64,
    pub w_align: f64,
}

impl Default for IntrinsicWeights {
    fn default() -> Self {
        Self {
            beta1: 1.0,
            beta2: 1.0,
            beta3: 1.0,
            beta4: 1.0,
            w_novelty: 0.3,
            w_info: 0.4,
            w_align: 0.3,
        }
    }
}

impl IntrinsicWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.beta1,
            self.beta2,
            self.beta3,
            self.beta4,
            self.w_novelty,
            self.w_info,
            self.w_align,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "intrinsic betas and weights must be non-negative".into(),
            ));
        }
        let sum = self.w_novelty + self.w_info + self.w_align;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config("w_novelty + w_info + w_align = 1".into()));
        }
        Ok(())
    }
}

/// The three raw intrinsic signals for one transition.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntrinsicComponents {
    pub novelty: f64,
    pub info: f64,
    pub align: f64,
}

/// `β1 / sqrt(N(s,a))`.
///
/// # Panics
/// When `n_sa == 0`; visits are recorded before the reward is computed.
pub fn novelty_reward(n_sa: u64, w: &IntrinsicWeights) -> f64 {
    assert!(n_sa >= 1, "novelty requires a recorded visit");
    w.beta1 / (n_sa as f64).sqrt()
}

/// `β2 / sqrt(N_info(s))` on item cells, zero elsewhere.
pub fn info_location_reward(n_info: u64, is_info_cell: bool, w: &IntrinsicWeights) -> f64 {
    if !is_info_cell {
        return 0.0;
    }
    debug_assert!(n_info >= 1);
    w.beta2 / (n_info.max(1) as f64).sqrt()
}

/// `+β3` for an in-order collect, `−β4` for a rejected one, zero otherwise.
pub fn alignment_reward(event: Event, w: &IntrinsicWeights) -> f64 {
    match event {
        Event::CollectedInOrder => w.beta3,
        Event::CollectedOutOfOrderRejected => -w.beta4,
        _ => 0.0,
    }
}

pub fn intrinsic_reward(c: IntrinsicComponents, w: &IntrinsicWeights) -> f64 {
    w.w_novelty * c.novelty + w.w_info * c.info + w.w_align * c.align
}

/// Both critics plus the visit counters feeding the intrinsic reward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticPair {
    pub q_extrinsic: QTable,
    pub q_intrinsic: QTable,
    visits: Vec<u64>,
    info_visits: Vec<u64>,
}

impl CriticPair {
    pub fn new(states: usize) -> Self {
        Self {
            q_extrinsic: QTable::zeros(states, Action::COUNT),
            q_intrinsic: QTable::zeros(states, Action::COUNT),
            visits: vec![0; states * Action::COUNT],
            info_visits: vec![0; states],
        }
    }

    pub fn states(&self) -> usize {
        self.info_visits.len()
    }

    pub fn extrinsic_update(
        &mut self,
        s: usize,
        a: usize,
        r: f64,
        s_next: usize,
        terminal: bool,
        cfg: &LearningConfig,
    ) -> Result<f64> {
        self.q_extrinsic.td_update(s, a, r, s_next, terminal, cfg)
    }

    pub fn intrinsic_update(
        &mut self,
        s: usize,
        a: usize,
        r_int: f64,
        s_next: usize,
        terminal: bool,
        cfg: &LearningConfig,
    ) -> Result<f64> {
        self.q_intrinsic
            .td_update(s, a, r_int, s_next, terminal, cfg)
    }

    /// `N(s,a) += 1`; `N_info(info_state) += 1` when the visited cell hosts
    /// an item. Counts survive episodes and priority shifts.
    pub fn record_visit(
        &mut self,
        s: usize,
        a: usize,
        info_state: usize,
        is_info_cell: bool,
    ) -> Result<()> {
        self.q_extrinsic.check(s, a)?;
        self.q_extrinsic.check(info_state, 0)?;
        self.visits[s * Action::COUNT + a] += 1;
        if is_info_cell {
            self.info_visits[info_state] += 1;
        }
        Ok(())
    }

    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visits[s * Action::COUNT + a]
    }

    pub fn info_visits(&self, s: usize) -> u64 {
        self.info_visits[s]
    }
}
