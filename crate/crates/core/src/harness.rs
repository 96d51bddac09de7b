//! Training runs, recovery metrics, aggregation and the ablation grid.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{detect_shift, on_shift, AdaptationConfig, ShiftRecord, ShiftSource};
use crate::agent::{Agent, StepSample};
use crate::critics::{IntrinsicWeights, LearningConfig};
use crate::env::{self, InformationSpace, Layout, Ordering, RewardConfig};
use crate::error::{Error, Result};
use crate::policy::{AblationFlags, AgentKind, AgentRng, EpsilonSchedule, ResetScope};

/// The three experimental settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Static,
    SingleShift,
    MultiShift,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Scenario::Static),
            "single_shift" | "single" => Ok(Scenario::SingleShift),
            "multi_shift" | "multi" | "multiple" => Ok(Scenario::MultiShift),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Static => "static",
            Scenario::SingleShift => "single_shift",
            Scenario::MultiShift => "multi_shift",
        }
    }
}

pub const PAPER_EPISODES: usize = 5000;
const FIRST_SHIFT: usize = 1700;
const SECOND_SHIFT: usize = 3500;

/// What to run: horizon, shift schedule, pool and seeding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub episodes: usize,
    pub shift_schedule: Vec<(usize, Ordering)>,
    pub runs: usize,
    pub layout_pool: Vec<Layout>,
    pub initial_ordering: Ordering,
    pub seed: u64,
}

impl ScenarioSpec {
    /// The standard schedule: X→Y→Z, then Y→Z→X at 1700 and Z→X→Y at 3500
    /// of 5000 episodes. Other horizons scale the shift episodes
    /// proportionally.
    pub fn standard(
        scenario: Scenario,
        episodes: usize,
        runs: usize,
        seed: u64,
        pool: Vec<Layout>,
    ) -> Self {
        let at = |e: usize| e * episodes / PAPER_EPISODES;
        let ord = |s: &str| s.parse::<Ordering>().expect("literal ordering");
        let shift_schedule = match scenario {
            Scenario::Static => vec![],
            Scenario::SingleShift => vec![(at(FIRST_SHIFT), ord("Y->Z->X"))],
            Scenario::MultiShift => vec![
                (at(FIRST_SHIFT), ord("Y->Z->X")),
                (at(SECOND_SHIFT), ord("Z->X->Y")),
            ],
        };
        Self {
            episodes,
            shift_schedule,
            runs,
            layout_pool: pool,
            initial_ordering: ord("X->Y->Z"),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Scenario("episodes must be positive".into()));
        }
        if self.runs == 0 {
            return Err(Error::Scenario("runs must be positive".into()));
        }
        if self.layout_pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let mut last = None;
        for (e, _) in &self.shift_schedule {
            if *e >= self.episodes || last.is_some_and(|l| *e <= l) || *e == 0 {
                return Err(Error::Scenario(
                    "shift episodes must be strictly increasing, positive and below the horizon"
                        .into(),
                ));
            }
            last = Some(*e);
        }
        for l in &self.layout_pool {
            l.validate()?;
            if l.item_ids() != {
                let mut items = self.initial_ordering.items().to_vec();
                items.sort();
                items
            } {
                return Err(Error::Scenario(format!(
                    "layout {} items do not match the ordering {}",
                    l.id(),
                    self.initial_ordering
                )));
            }
        }
        Ok(())
    }
}

/// How recovery after a shift is judged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryParams {
    pub window: usize,
    /// Fraction of the pre-shift success rate that counts as recovered.
    pub fraction: f64,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        Self {
            window: 50,
            fraction: 0.8,
        }
    }
}

/// All learner-side hyper-parameters shared by every agent kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub eps0: f64,
    pub eps_min: f64,
    pub rewards: RewardConfig,
    pub learning: LearningConfig,
    pub weights: IntrinsicWeights,
    pub adaptation: AdaptationConfig,
    pub recovery: RecoveryParams,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            eps_min: 0.1,
            rewards: RewardConfig::default(),
            learning: LearningConfig::default(),
            weights: IntrinsicWeights::default(),
            adaptation: AdaptationConfig::default(),
            recovery: RecoveryParams::default(),
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 >= self.eps_min && self.eps_min >= 0.0 && self.eps0 <= 1.0) {
            return Err(Error::Config("1 ≥ eps0 ≥ eps_min ≥ 0".into()));
        }
        self.rewards.validate()?;
        self.learning.validate()?;
        self.weights.validate()?;
        self.adaptation.validate()?;
        if self.recovery.window == 0
            || !(self.recovery.fraction > 0.0 && self.recovery.fraction <= 1.0)
        {
            return Err(Error::Config(
                "recovery window ≥ 1 and 0 < recovery fraction ≤ 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub total_reward: f64,
    pub mission_success: bool,
    /// Every item collected (in order) by the end of the episode.
    pub info_collection_success: bool,
    pub steps: u32,
    pub epsilon_used: f64,
    /// Generator position (in 32-bit words) after the episode.
    pub rng_words: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    pub shift_episode: usize,
    pub recovered: bool,
    pub recovery_time: Option<usize>,
    /// Pre-shift success rate was zero, so recovery is undefined.
    pub degenerate_baseline: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub agent: AgentKind,
    pub layout_id: String,
    pub records: Vec<EpisodeRecord>,
    /// Priority changes applied to the environment.
    pub shifts: Vec<ShiftRecord>,
    /// Shifts the agent reacted to, including detector firings.
    pub agent_events: Vec<ShiftRecord>,
    /// One entry per environment shift.
    pub recovery: Vec<Recovery>,
}

impl RunMetrics {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }
}

/// Plays one episode with learning.
pub fn run_episode(
    agent: &mut Agent,
    layout: &Layout,
    info: &InformationSpace,
    cfg: &TrainingConfig,
    episode: usize,
    rng: &mut AgentRng,
) -> Result<EpisodeRecord> {
    let eps = agent.schedule.epsilon_at(episode);
    let mut state = env::reset(layout, info, episode as u64)?;
    let mut total = 0.0;
    while !state.done {
        let s = env::state_index(&state, layout);
        let action = agent.act(s, eps, rng);
        let t = env::step(&state, action, layout, info, &cfg.rewards)?;
        let s_next = env::state_index(&t.next_state, layout);
        agent.learn(
            StepSample {
                state: s,
                action,
                next_state: s_next,
                transition: &t,
                info_cell: layout.item_at(t.next_state.cell).is_some(),
            },
            &cfg.learning,
            &cfg.weights,
        )?;
        total += t.reward;
        state = t.next_state;
    }
    let all = (1u32 << layout.item_count()) - 1;
    Ok(EpisodeRecord {
        episode,
        total_reward: total,
        mission_success: state.mission_success,
        info_collection_success: state.collected == all,
        steps: state.steps,
        epsilon_used: eps,
        rng_words: rng.get_word_pos() as u64,
    })
}

/// Generator for run `run_index`: ChaCha8 seeded with the base seed, on
/// stream `run_index`.
pub fn run_rng(seed: u64, run_index: usize) -> AgentRng {
    let mut rng = AgentRng::seed_from_u64(seed);
    rng.set_stream(run_index as u64);
    rng
}

/// Trains one agent for the whole horizon.
pub fn run_training(
    spec: &ScenarioSpec,
    kind: AgentKind,
    cfg: &TrainingConfig,
    run_index: usize,
) -> Result<RunMetrics> {
    train(spec, kind, cfg, run_index).map(|(_, metrics)| metrics)
}

/// Like [`run_training`], also returning the trained agent and the
/// information space as it stood at the end of the run.
pub fn train(
    spec: &ScenarioSpec,
    kind: AgentKind,
    cfg: &TrainingConfig,
    run_index: usize,
) -> Result<(TrainedAgent, RunMetrics)> {
    spec.validate()?;
    cfg.validate()?;
    let mut rng = run_rng(spec.seed, run_index);
    let layout = &spec.layout_pool[rng.gen_range(0..spec.layout_pool.len())];
    let mut info = InformationSpace::new(spec.initial_ordering.clone());
    let schedule = EpsilonSchedule::new(cfg.eps0, cfg.eps_min, spec.episodes);
    let mut agent = Agent::new(kind, env::state_count(layout), schedule);
    let adapt = &cfg.adaptation;
    let mut shifts = Vec::new();
    let mut records = Vec::with_capacity(spec.episodes);
    let mut success_history = Vec::with_capacity(spec.episodes);
    let mut pending = spec.shift_schedule.iter().peekable();

    for episode in 0..spec.episodes {
        if let Some((_, ordering)) = pending.next_if(|(e, _)| *e == episode) {
            let change = info.swap_priorities(ordering.clone(), episode)?;
            let record = ShiftRecord {
                episode,
                source: ShiftSource::Operator,
                old_ordering: change.from.clone(),
                new_ordering: change.to.clone(),
            };
            shifts.push(record.clone());
            let notify = match kind {
                AgentKind::Baseline => false,
                AgentKind::BaselineBoosted => true,
                AgentKind::Camiq(_) => adapt.uses_operator(),
            };
            if notify {
                on_shift(&mut agent, adapt, episode, record)?;
                agent.detector_quiet_until = episode + adapt.detector_window;
            }
        }

        let rec = run_episode(&mut agent, layout, &info, cfg, episode, &mut rng)?;
        success_history.push(rec.info_collection_success);
        records.push(rec);

        let next = episode + 1;
        if kind.is_camiq()
            && adapt.uses_detector()
            && next < spec.episodes
            && next >= agent.detector_quiet_until
            && detect_shift(&success_history, adapt)
        {
            let record = ShiftRecord {
                episode: next,
                source: ShiftSource::Detector,
                old_ordering: info.ordering().clone(),
                new_ordering: info.ordering().clone(),
            };
            on_shift(&mut agent, adapt, next, record)?;
            agent.detector_quiet_until = next + adapt.detector_window;
        }
    }

    let recovery = shifts
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let end = shifts.get(i + 1).map_or(spec.episodes, |n| n.episode);
            compute_recovery(&records, s.episode, end, &cfg.recovery)
        })
        .collect();
    let metrics = RunMetrics {
        agent: kind,
        layout_id: layout.id().to_string(),
        records,
        shifts,
        agent_events: agent.shift_log.clone(),
        recovery,
    };
    Ok((
        TrainedAgent {
            agent,
            layout: layout.clone(),
            info,
        },
        metrics,
    ))
}

/// Final learner state of a run.
#[derive(Clone, Debug)]
pub struct TrainedAgent {
    pub agent: Agent,
    pub layout: Layout,
    pub info: InformationSpace,
}

impl TrainedAgent {
    /// Undiscounted return of the greedy extrinsic policy (ε = 0).
    pub fn greedy_return(&self, rewards: &RewardConfig) -> Result<f64> {
        let q = &self.agent.critics.q_extrinsic;
        crate::oracle::rollout_return(&self.layout, &self.info, rewards, |s| {
            crate::env::Action::ALL[crate::policy::greedy(q.row(s))]
        })
        .map(|(r, _)| r)
    }
}

/// Runs `spec.runs` independent runs, in parallel on up to `workers`
/// threads. Results are ordered by run index regardless of scheduling.
pub fn run_many(
    spec: &ScenarioSpec,
    kind: AgentKind,
    cfg: &TrainingConfig,
    workers: usize,
) -> Result<Vec<RunMetrics>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        (0..spec.runs)
            .into_par_iter()
            .map(|i| run_training(spec, kind, cfg, i))
            .collect()
    })
}

/// Recovery after the shift at `shift_episode`, searched up to (excluding)
/// `end`. The reference is the mission-success rate over the `window`
/// episodes before the shift; recovery is the first post-shift episode
/// whose trailing window (entirely after the shift) reaches `fraction` of
/// it. Recovery time counts post-shift episodes up to and including that
/// one, so the earliest possible value is `window`.
pub fn compute_recovery(
    records: &[EpisodeRecord],
    shift_episode: usize,
    end: usize,
    params: &RecoveryParams,
) -> Recovery {
    let w = params.window;
    let end = end.min(records.len());
    let rate = |slice: &[EpisodeRecord]| {
        slice.iter().filter(|r| r.mission_success).count() as f64 / slice.len() as f64
    };
    let mut out = Recovery {
        shift_episode,
        recovered: false,
        recovery_time: None,
        degenerate_baseline: false,
    };
    if shift_episode == 0 || shift_episode > records.len() {
        out.degenerate_baseline = true;
        return out;
    }
    let pre = &records[shift_episode.saturating_sub(w)..shift_episode];
    let reference = rate(pre);
    if reference <= 0.0 {
        out.degenerate_baseline = true;
        return out;
    }
    let threshold = params.fraction * reference;
    let mut hits = records[shift_episode..(shift_episode + w).min(end)]
        .iter()
        .filter(|r| r.mission_success)
        .count();
    let mut last = shift_episode + w;
    if last > end {
        return out;
    }
    loop {
        if hits as f64 / w as f64 >= threshold {
            out.recovered = true;
            out.recovery_time = Some(last - shift_episode);
            return out;
        }
        if last >= end {
            return out;
        }
        hits += records[last].mission_success as usize;
        hits -= records[last - w].mission_success as usize;
        last += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean_reward: f64,
    /// Standard error of the mean across runs.
    pub stderr: f64,
}

/// Aggregate statistics for one agent configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub runs: usize,
    pub mission_success_pct: f64,
    pub info_collection_pct: f64,
    /// `None` when the scenario has no shifts.
    pub recovery_success_pct: Option<f64>,
    /// Mean over recovered (run, shift) pairs; `None` if none recovered.
    pub mean_recovery_time: Option<f64>,
    pub mean_reward_per_episode: f64,
    /// Mission success over episodes at or after the first shift.
    pub post_shift_mission_pct: f64,
    /// Recovery success per shift index.
    pub recovery_by_shift_pct: Vec<f64>,
    /// Mean recovery time per shift index over recovered runs.
    pub recovery_time_by_shift: Vec<Option<f64>>,
    /// Runs that recovered after every shift.
    pub all_shifts_recovered_pct: Option<f64>,
    pub curve: Vec<CurvePoint>,
}

/// Rows of summaries in a fixed order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<Summary>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Pools all runs of one configuration.
pub fn aggregate(label: &str, runs: &[RunMetrics]) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("aggregate needs at least one run"));
    }
    let episodes: usize = runs.iter().map(|r| r.records.len()).sum();
    let all = runs.iter().flat_map(|r| r.records.iter());
    let missions = all.clone().filter(|r| r.mission_success).count();
    let collections = all.clone().filter(|r| r.info_collection_success).count();
    let reward_sum: f64 = all.map(|r| r.total_reward).sum();

    let mut post_total = 0;
    let mut post_hits = 0;
    for run in runs {
        let from = run.shifts.first().map_or(0, |s| s.episode);
        post_total += run.records.len().saturating_sub(from);
        post_hits += run
            .records
            .iter()
            .skip(from)
            .filter(|r| r.mission_success)
            .count();
    }

    let pairs: Vec<&Recovery> = runs.iter().flat_map(|r| r.recovery.iter()).collect();
    let recovered: Vec<&&Recovery> = pairs.iter().filter(|r| r.recovered).collect();
    let recovery_success_pct = (!pairs.is_empty()).then(|| pct(recovered.len(), pairs.len()));
    let mean_recovery_time = (!recovered.is_empty()).then(|| {
        recovered
            .iter()
            .filter_map(|r| r.recovery_time)
            .sum::<usize>() as f64
            / recovered.len() as f64
    });
    let shift_count = runs.iter().map(|r| r.recovery.len()).max().unwrap_or(0);
    let recovery_by_shift_pct = (0..shift_count)
        .map(|i| {
            let with = runs.iter().filter_map(|r| r.recovery.get(i));
            pct(with.clone().filter(|r| r.recovered).count(), with.count())
        })
        .collect();
    let recovery_time_by_shift = (0..shift_count)
        .map(|i| {
            let times: Vec<usize> = runs
                .iter()
                .filter_map(|r| r.recovery.get(i).and_then(|r| r.recovery_time))
                .collect();
            (!times.is_empty()).then(|| times.iter().sum::<usize>() as f64 / times.len() as f64)
        })
        .collect();
    let all_shifts_recovered_pct = (shift_count > 0).then(|| {
        let ok = runs
            .iter()
            .filter(|r| !r.recovery.is_empty() && r.recovery.iter().all(|x| x.recovered))
            .count();
        pct(ok, runs.len())
    });

    let horizon = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    let n = runs.len() as f64;
    let curve = (0..horizon)
        .map(|e| {
            let mean = runs.iter().map(|r| r.records[e].total_reward).sum::<f64>() / n;
            let stderr = if runs.len() > 1 {
                let var = runs
                    .iter()
                    .map(|r| (r.records[e].total_reward - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            CurvePoint {
                episode: e,
                mean_reward: mean,
                stderr,
            }
        })
        .collect();

    Ok(Summary {
        label: label.to_string(),
        runs: runs.len(),
        mission_success_pct: pct(missions, episodes),
        info_collection_pct: pct(collections, episodes),
        recovery_success_pct,
        mean_recovery_time,
        mean_reward_per_episode: if episodes == 0 {
            0.0
        } else {
            reward_sum / episodes as f64
        },
        post_shift_mission_pct: pct(post_hits, post_total),
        recovery_by_shift_pct,
        recovery_time_by_shift,
        all_shifts_recovered_pct,
        curve,
    })
}

/// The six ablations plus the full agent, in table order.
pub fn ablation_configs() -> Vec<(&'static str, AblationFlags)> {
    let full = AblationFlags::default();
    vec![
        ("Full CA-MIQ", full),
        (
            "w/o Priority Alignment + Awareness",
            AblationFlags {
                disable_priority_components: true,
                ..full
            },
        ),
        (
            "w/o State Novelty",
            AblationFlags {
                disable_novelty: true,
                ..full
            },
        ),
        (
            "w/o Exploration Boost",
            AblationFlags {
                disable_boost: true,
                ..full
            },
        ),
        (
            "w/o Selective Reset",
            AblationFlags {
                disable_reset: true,
                ..full
            },
        ),
        (
            "Intrinsic Reset Only",
            AblationFlags {
                reset_scope: ResetScope::IntrinsicOnly,
                ..full
            },
        ),
        (
            "Extrinsic Reset Only",
            AblationFlags {
                reset_scope: ResetScope::ExtrinsicOnly,
                ..full
            },
        ),
    ]
}

/// Runs every ablation configuration on the same run seeds.
pub fn run_ablation(
    spec: &ScenarioSpec,
    cfg: &TrainingConfig,
    workers: usize,
) -> Result<Vec<(String, Summary, Vec<RunMetrics>)>> {
    ablation_configs()
        .into_iter()
        .map(|(label, flags)| {
            let runs = run_many(spec, AgentKind::Camiq(flags), cfg, workers)?;
            let summary = aggregate(label, &runs)?;
            Ok((label.to_string(), summary, runs))
        })
        .collect()
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.digits$}"))
}

/// Tab-separated summary with columns in the order: mission success,
/// information collection, recovery success, recovery time, reward.
pub fn summary_tsv(rows: &[Summary]) -> String {
    let mut out = String::from(
        "agent\tmission_success_pct\tinfo_collection_pct\trecovery_success_pct\trecovery_time_ep\treward_per_ep\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{:.1}\t{:.1}\t{}\t{}\t{:.1}",
            r.label,
            r.mission_success_pct,
            r.info_collection_pct,
            opt(r.recovery_success_pct, 1),
            opt(r.mean_recovery_time, 0),
            r.mean_reward_per_episode
        );
    }
    out
}

/// Tab-separated ablation table: adaptation time, mission success and
/// information collection, with relative change against the first row.
pub fn ablation_tsv(rows: &[Summary]) -> String {
    let mut out = String::from(
        "configuration\tadapt_time_ep\tmission_success_pct\tinfo_collection_pct\tmission_change_pct\tcollection_change_pct\n",
    );
    let Some(full) = rows.first() else {
        return out;
    };
    let change = |v: f64, base: f64| {
        if base == 0.0 {
            0.0
        } else {
            100.0 * (v - base) / base
        }
    };
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.1}\t{:.1}\t{:+.1}\t{:+.1}",
            r.label,
            opt(r.mean_recovery_time, 1),
            r.mission_success_pct,
            r.info_collection_pct,
            change(r.mission_success_pct, full.mission_success_pct),
            change(r.info_collection_pct, full.info_collection_pct),
        );
    }
    out
}

/// Learning curve as `episode,mean_reward,stderr` lines with a header.
pub fn curve_csv(summary: &Summary) -> String {
    let mut out = String::from("episode,mean_reward,stderr\n");
    for p in &summary.curve {
        let _ = writeln!(out, "{},{},{}", p.episode, p.mean_reward, p.stderr);
    }
    out
}

/// Event log: shifts applied to the environment, then agent reactions.
pub fn event_log(label: &str, runs: &[RunMetrics]) -> String {
    let mut out = String::new();
    for (i, run) in runs.iter().enumerate() {
        for s in &run.shifts {
            let _ = writeln!(out, "{label},run={i},shift,{s}");
        }
        for s in run
            .agent_events
            .iter()
            .filter(|s| s.source == ShiftSource::Detector)
        {
            let _ = writeln!(out, "{label},run={i},detection,{s}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(episode: usize, success: bool) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            total_reward: 0.0,
            mission_success: success,
            info_collection_success: success,
            steps: 1,
            epsilon_used: 0.0,
            rng_words: 0,
        }
    }

    fn records(pattern: impl Fn(usize) -> bool, n: usize) -> Vec<EpisodeRecord> {
        (0..n).map(|e| rec(e, pattern(e))).collect()
    }

    #[test]
    fn recovery_with_zero_baseline_is_degenerate() {
        let r = records(|e| e >= 100, 300);
        let out = compute_recovery(&r, 100, 300, &RecoveryParams::default());
        assert!(!out.recovered && out.degenerate_baseline);
    }

    #[test]
    fn immediate_recovery_takes_one_window() {
        let r = records(|e| e % 2 == 0, 400);
        let out = compute_recovery(&r, 200, 400, &RecoveryParams::default());
        assert!(out.recovered);
        assert_eq!(out.recovery_time, Some(50));
    }

    #[test]
    fn late_recovery_and_failure() {
        // success everywhere except 100 post-shift episodes
        let r = records(|e| !(200..300).contains(&e), 600);
        let out = compute_recovery(&r, 200, 600, &RecoveryParams::default());
        // trailing window needs 40 of 50 successes: episodes 300..=339
        assert_eq!(out.recovery_time, Some(140));
        let out = compute_recovery(&r, 200, 320, &RecoveryParams::default());
        assert!(!out.recovered && !out.degenerate_baseline);
    }

    #[test]
    fn aggregate_means() {
        let run = |rate_even: bool| RunMetrics {
            agent: AgentKind::Baseline,
            layout_id: "L".into(),
            records: records(|e| if rate_even { e % 5 < 2 } else { e % 5 < 3 }, 100),
            shifts: vec![],
            agent_events: vec![],
            recovery: vec![],
        };
        let s = aggregate("b", &[run(true), run(false)]).unwrap();
        assert!((s.mission_success_pct - 50.0).abs() < 1e-12);
        assert_eq!(s.recovery_success_pct, None);
        let all = RunMetrics {
            records: records(|_| true, 10),
            ..run(true)
        };
        assert_eq!(aggregate("a", &[all]).unwrap().mission_success_pct, 100.0);
        assert!(aggregate("x", &[]).is_err());
    }

    #[test]
    fn standard_schedules() {
        let pool = env::default_pool();
        let s = ScenarioSpec::standard(Scenario::MultiShift, 5000, 1, 0, pool.clone());
        assert_eq!(
            s.shift_schedule.iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![1700, 3500]
        );
        assert!(s.validate().is_ok());
        let s = ScenarioSpec::standard(Scenario::SingleShift, 500, 1, 0, pool.clone());
        assert_eq!(s.shift_schedule[0].0, 170);
        let mut bad = ScenarioSpec::standard(Scenario::MultiShift, 5000, 1, 0, pool);
        bad.shift_schedule.swap(0, 1);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ablation_grid_has_seven_rows() {
        let c = ablation_configs();
        assert_eq!(c.len(), 7);
        assert_eq!(c[0].1, AblationFlags::default());
    }
}
