use std::path::PathBuf;
use std::process::ExitCode;

use camiq::cli::{cmd_ablate, cmd_run, parse_config, AgentChoice, Overrides};
use camiq::env::{self, InformationSpace, Layout, Ordering};
use camiq::harness::{summary_tsv, Scenario};
use camiq::{oracle, Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "camiq",
    version,
    about = "CA-MIQ and baselines in a search-and-rescue gridworld"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the selected agents on a scenario and write summaries.
    Run {
        #[command(flatten)]
        common: Common,
        /// Run the seven-row ablation grid instead.
        #[arg(long)]
        ablation: bool,
    },
    /// Full CA-MIQ plus six ablations on the multi-shift scenario.
    Ablate {
        #[command(flatten)]
        common: Common,
    },
    /// Validate a layout pool and print it in canonical form.
    Layouts {
        #[arg(long)]
        pool: Option<PathBuf>,
    },
    /// Print the value-iteration optimal return of each layout.
    Oracle {
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Only this layout id.
        #[arg(long)]
        layout: Option<String>,
        #[arg(long, default_value = "X->Y->Z")]
        ordering: String,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<String>,
    /// baseline | baseline_boosted | camiq | all
    #[arg(long)]
    agent: Option<String>,
    #[arg(long, conflicts_with = "paper_scale")]
    runs: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// 100 runs per configuration.
    #[arg(long)]
    paper_scale: bool,
}

impl Common {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            scenario: self
                .scenario
                .as_deref()
                .map(str::parse::<Scenario>)
                .transpose()?,
            agent: self
                .agent
                .as_deref()
                .map(str::parse::<AgentChoice>)
                .transpose()?,
            runs: self.runs,
            episodes: self.episodes,
            seed: self.seed,
            out: self.out.clone(),
            pool: self.pool.clone(),
            paper_scale: self.paper_scale,
        })
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn load_pool(path: Option<&PathBuf>) -> Result<Vec<Layout>> {
    match path {
        Some(p) => env::parse_pool(&std::fs::read_to_string(p)?),
        None => Ok(env::default_pool()),
    }
}

fn ablate(common: &Common) -> Result<()> {
    let mut o = common.overrides()?;
    o.scenario.get_or_insert(Scenario::MultiShift);
    let cfg = parse_config(common.config.as_deref(), &o)?;
    let rows = cmd_ablate(&cfg, common.workers())?;
    print!("{}", camiq::harness::ablation_tsv(&rows));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            ablation: true,
        }
        | Command::Ablate { common } => ablate(&common),
        Command::Run {
            common,
            ablation: false,
        } => {
            let cfg = parse_config(common.config.as_deref(), &common.overrides()?)?;
            let rows = cmd_run(&cfg, common.workers())?;
            print!("{}", summary_tsv(&rows));
            Ok(())
        }
        Command::Layouts { pool } => {
            let pool = load_pool(pool.as_ref())?;
            print!("{}", env::serialize_pool(&pool));
            eprintln!("{} layouts ok", pool.len());
            Ok(())
        }
        Command::Oracle {
            pool,
            layout,
            ordering,
            gamma,
        } => {
            let ordering: Ordering = ordering.parse()?;
            let pool = load_pool(pool.as_ref())?;
            let selected: Vec<&Layout> = pool
                .iter()
                .filter(|l| layout.as_deref().is_none_or(|id| l.id() == id))
                .collect();
            if selected.is_empty() {
                return Err(Error::Config(format!(
                    "no layout {:?} in pool",
                    layout.unwrap_or_default()
                )));
            }
            let info = InformationSpace::new(ordering);
            let rewards = env::RewardConfig::default();
            for l in selected {
                println!(
                    "{}\t{}",
                    l.id(),
                    oracle::optimal_return(l, &info, &rewards, gamma)?
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("camiq: {e}");
            ExitCode::FAILURE
        }
    }
}
