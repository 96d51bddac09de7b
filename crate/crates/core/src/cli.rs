//! Run configuration, subcommand bodies and output writing for the `camiq`
//! binary.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adaptation::AdaptationConfig;
use crate::critics::{IntrinsicWeights, LearningConfig};
use crate::env::{self, Layout, RewardConfig};
use crate::error::{Error, Result};
use crate::harness::{
    ablation_tsv, aggregate, curve_csv, event_log, run_ablation, run_many, summary_tsv,
    RecoveryParams, Scenario, ScenarioSpec, Summary, TrainingConfig,
};
use crate::policy::AgentKind;

/// Agents selected by `--agent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentChoice {
    Baseline,
    BaselineBoosted,
    Camiq,
    All,
}

impl AgentChoice {
    pub fn kinds(self) -> Vec<AgentKind> {
        match self {
            AgentChoice::Baseline => vec![AgentKind::Baseline],
            AgentChoice::BaselineBoosted => vec![AgentKind::BaselineBoosted],
            AgentChoice::Camiq => vec![AgentKind::camiq()],
            AgentChoice::All => vec![
                AgentKind::Baseline,
                AgentKind::BaselineBoosted,
                AgentKind::camiq(),
            ],
        }
    }
}

impl std::str::FromStr for AgentChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(AgentChoice::All),
            "baseline" => Ok(AgentChoice::Baseline),
            "baseline_boosted" | "boosted" => Ok(AgentChoice::BaselineBoosted),
            "camiq" | "ca-miq" => Ok(AgentChoice::Camiq),
            other => Err(Error::Config(format!("unknown agent {other:?}"))),
        }
    }
}

pub const PAPER_RUNS: usize = 100;

/// Fully resolved configuration of one invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub agent: AgentChoice,
    pub runs: usize,
    pub episodes: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Layout pool file; the bundled pool when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool: Option<PathBuf>,
    pub eps0: f64,
    pub eps_min: f64,
    pub rewards: RewardConfig,
    pub learning: LearningConfig,
    pub weights: IntrinsicWeights,
    pub adaptation: AdaptationConfig,
    pub recovery: RecoveryParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            scenario: Scenario::SingleShift,
            agent: AgentChoice::All,
            runs: 10,
            episodes: crate::harness::PAPER_EPISODES,
            seed: 0,
            out: PathBuf::from("out"),
            pool: None,
            eps0: t.eps0,
            eps_min: t.eps_min,
            rewards: t.rewards,
            learning: t.learning,
            weights: t.weights,
            adaptation: t.adaptation,
            recovery: t.recovery,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub agent: Option<AgentChoice>,
    pub runs: Option<usize>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    /// Sets runs to [`PAPER_RUNS`] unless `runs` is also given.
    pub paper_scale: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.paper_scale {
            self.runs = PAPER_RUNS;
        }
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &o.$f {
                    self.$f = v.clone();
                }
            )*};
        }
        set!(scenario, agent, runs, episodes, seed, out);
        if o.pool.is_some() {
            self.pool = o.pool.clone();
        }
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            eps0: self.eps0,
            eps_min: self.eps_min,
            rewards: self.rewards.clone(),
            learning: self.learning.clone(),
            weights: self.weights.clone(),
            adaptation: self.adaptation.clone(),
            recovery: self.recovery.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs ≥ 1".into()));
        }
        if self.episodes == 0 {
            return Err(Error::Config("episodes ≥ 1".into()));
        }
        self.training().validate()
    }

    pub fn layout_pool(&self) -> Result<Vec<Layout>> {
        match &self.pool {
            Some(path) => env::parse_pool(&std::fs::read_to_string(path)?),
            None => Ok(env::default_pool()),
        }
    }

    pub fn scenario_spec(&self) -> Result<ScenarioSpec> {
        let spec = ScenarioSpec::standard(
            self.scenario,
            self.episodes,
            self.runs,
            self.seed,
            self.layout_pool()?,
        );
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads `file` (if any), applies `overrides` and validates the result.
pub fn parse_config(file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Trains every selected agent and writes `config.toml`, `summary.tsv`,
/// `curve_<agent>.csv` and `events.log` into the output directory.
pub fn cmd_run(cfg: &RunConfig, workers: usize) -> Result<Vec<Summary>> {
    let spec = cfg.scenario_spec()?;
    let training = cfg.training();
    std::fs::create_dir_all(&cfg.out)?;
    let mut rows = Vec::new();
    let mut events = String::new();
    for kind in cfg.agent.kinds() {
        let runs = run_many(&spec, kind, &training, workers)?;
        let summary = aggregate(kind.label(), &runs)?;
        events.push_str(&event_log(kind.label(), &runs));
        rows.push(summary);
    }
    // Outputs are written only after every run succeeded.
    write_atomic(&cfg.out.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    for row in &rows {
        write_atomic(
            &cfg.out.join(format!("curve_{}.csv", row.label)),
            curve_csv(row).as_bytes(),
        )?;
    }
    write_atomic(&cfg.out.join("events.log"), events.as_bytes())?;
    write_atomic(&cfg.out.join("summary.tsv"), summary_tsv(&rows).as_bytes())?;
    Ok(rows)
}

/// Runs the full agent and its six ablations with paired seeds and writes
/// `ablation.tsv` next to the usual outputs.
pub fn cmd_ablate(cfg: &RunConfig, workers: usize) -> Result<Vec<Summary>> {
    if cfg.scenario != Scenario::MultiShift {
        return Err(Error::Config(
            "ablations need scenario = multi_shift".into(),
        ));
    }
    let spec = cfg.scenario_spec()?;
    let results = run_ablation(&spec, &cfg.training(), workers)?;
    std::fs::create_dir_all(&cfg.out)?;
    let mut events = String::new();
    for (label, _, runs) in &results {
        events.push_str(&event_log(label, runs));
    }
    let rows: Vec<Summary> = results.into_iter().map(|(_, s, _)| s).collect();
    write_atomic(&cfg.out.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    write_atomic(&cfg.out.join("events.log"), events.as_bytes())?;
    write_atomic(&cfg.out.join("summary.tsv"), summary_tsv(&rows).as_bytes())?;
    write_atomic(
        &cfg.out.join("ablation.tsv"),
        ablation_tsv(&rows).as_bytes(),
    )?;
    Ok(rows)
}
