use camiq::adaptation::ShiftSource;
use camiq::agent::Agent;
use camiq::cli::{cmd_ablate, cmd_run, AgentChoice, RunConfig};
use camiq::env::{self, Action, InformationSpace, Layout};
use camiq::harness::*;
use camiq::oracle::value_iteration;
use camiq::policy::{AgentKind, EpsilonSchedule};

fn greedy_agent(kind: AgentKind, layout: &Layout) -> Agent {
    Agent::new(
        kind,
        env::state_count(layout),
        EpsilonSchedule::new(0.0, 0.0, 10),
    )
}

fn spec(scenario: Scenario, episodes: usize, runs: usize) -> ScenarioSpec {
    ScenarioSpec::standard(scenario, episodes, runs, 7, env::default_pool())
}

#[test]
fn oracle_critic_plays_the_optimal_episode() {
    let layout = Layout::from_rows("tiny", &["AX", ".T"]).unwrap();
    let info = InformationSpace::new("X".parse().unwrap());
    let cfg = TrainingConfig::default();
    let mut agent = greedy_agent(AgentKind::Baseline, &layout);
    agent.critics.q_extrinsic = value_iteration(&layout, &info, &cfg.rewards, 0.99, 1e-12)
        .unwrap()
        .q;
    let mut rng = run_rng(0, 0);
    let rec = run_episode(&mut agent, &layout, &info, &cfg, 0, &mut rng).unwrap();
    assert_eq!(rec.total_reward, 117.0);
    assert_eq!(rec.steps, 3);
    assert!(rec.mission_success && rec.info_collection_success);
}

#[test]
fn rigged_critic_walks_into_the_ditch() {
    let layout = Layout::from_rows("pit", &["AD", "XT"]).unwrap();
    let info = InformationSpace::new("X".parse().unwrap());
    let cfg = TrainingConfig::default();
    let mut agent = greedy_agent(AgentKind::Baseline, &layout);
    let start = 0;
    agent
        .critics
        .q_extrinsic
        .set(start, Action::Right.index(), 10.0);
    let mut rng = run_rng(0, 0);
    let rec = run_episode(&mut agent, &layout, &info, &cfg, 0, &mut rng).unwrap();
    assert_eq!(rec.total_reward, -51.0);
    assert_eq!(rec.steps, 1);
    assert!(!rec.mission_success);
    // Terminal: no bootstrap term.
    let q = agent.critics.q_extrinsic.get(start, Action::Right.index());
    assert!((q - (10.0 + 0.1 * (-51.0 - 10.0))).abs() < 1e-12);
}

#[test]
fn blocked_agent_hits_the_step_limit() {
    let layout = env::default_pool().remove(0);
    let info = InformationSpace::new("XYZ".parse().unwrap());
    let cfg = TrainingConfig::default();
    let mut agent = greedy_agent(AgentKind::Baseline, &layout);
    for s in 0..env::state_count(&layout) {
        agent.critics.q_extrinsic.set(s, Action::Up.index(), 1e6);
    }
    let mut rng = run_rng(0, 0);
    let rec = run_episode(&mut agent, &layout, &info, &cfg, 0, &mut rng).unwrap();
    // Start is in the top row; Up is blocked every step.
    assert_eq!(rec.steps, 100);
    assert_eq!(rec.total_reward, -100.0);
    assert!(!rec.mission_success && !rec.info_collection_success);
}

#[test]
fn training_is_deterministic() {
    let s = spec(Scenario::MultiShift, 600, 2);
    let cfg = TrainingConfig::default();
    for kind in [
        AgentKind::Baseline,
        AgentKind::BaselineBoosted,
        AgentKind::camiq(),
    ] {
        let a = run_training(&s, kind, &cfg, 1).unwrap();
        let b = run_training(&s, kind, &cfg, 1).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
    let serial = run_many(&s, AgentKind::camiq(), &cfg, 1).unwrap();
    let parallel = run_many(&s, AgentKind::camiq(), &cfg, 4).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn shift_records_follow_the_schedule() {
    let cfg = TrainingConfig::default();
    let expect = [
        (Scenario::Static, vec![]),
        (Scenario::SingleShift, vec![340]),
        (Scenario::MultiShift, vec![340, 700]),
    ];
    for (scenario, episodes) in expect {
        let s = spec(scenario, 1000, 1);
        for kind in [
            AgentKind::Baseline,
            AgentKind::BaselineBoosted,
            AgentKind::camiq(),
        ] {
            let m = run_training(&s, kind, &cfg, 0).unwrap();
            let got: Vec<usize> = m.shifts.iter().map(|r| r.episode).collect();
            assert_eq!(got, episodes);
            assert_eq!(m.recovery.len(), episodes.len());
            let operator = m
                .agent_events
                .iter()
                .filter(|e| e.source == ShiftSource::Operator)
                .count();
            match kind {
                AgentKind::Baseline => assert!(m.agent_events.is_empty()),
                AgentKind::BaselineBoosted => assert_eq!(m.agent_events.len(), episodes.len()),
                AgentKind::Camiq(_) => assert_eq!(operator, episodes.len()),
            }
        }
    }
}

#[test]
fn orderings_rotate_through_the_schedule() {
    let m = run_training(
        &spec(Scenario::MultiShift, 500, 1),
        AgentKind::Baseline,
        &TrainingConfig::default(),
        0,
    )
    .unwrap();
    let text: Vec<String> = m.shifts.iter().map(|s| s.to_string()).collect();
    assert_eq!(
        text,
        [
            "170,operator,X->Y->Z => Y->Z->X",
            "350,operator,Y->Z->X => Z->X->Y"
        ]
    );
}

#[test]
fn camiq_consumes_one_draw_per_step() {
    let m = run_training(
        &spec(Scenario::SingleShift, 300, 1),
        AgentKind::camiq(),
        &TrainingConfig::default(),
        0,
    )
    .unwrap();
    for w in m.records.windows(2) {
        // One f64 per step, two 32-bit words each.
        assert_eq!(w[1].rng_words - w[0].rng_words, 2 * w[1].steps as u64);
    }
}

#[test]
fn ablations_share_streams_until_behaviour_diverges() {
    let s = spec(Scenario::MultiShift, 600, 1);
    let cfg = TrainingConfig::default();
    let full = run_training(&s, AgentKind::camiq(), &cfg, 0).unwrap();
    let shift = s.shift_schedule[0].0;
    for (label, flags) in ablation_configs().into_iter().skip(1) {
        let other = run_training(&s, AgentKind::Camiq(flags), &cfg, 0).unwrap();
        let diverge = full
            .records
            .iter()
            .zip(&other.records)
            .position(|(a, b)| a.steps != b.steps || a.total_reward != b.total_reward)
            .unwrap_or(full.records.len());
        for e in 0..diverge {
            assert_eq!(
                full.records[e].rng_words, other.records[e].rng_words,
                "{label} episode {e}"
            );
        }
        if flags.disable_boost || flags.disable_reset || flags.reset_scope != Default::default() {
            assert!(
                diverge >= shift,
                "{label} diverged at {diverge} before the shift"
            );
        }
    }
}

#[test]
fn full_ablation_row_equals_plain_training() {
    let s = spec(Scenario::MultiShift, 400, 3);
    let cfg = TrainingConfig::default();
    let rows = run_ablation(&s, &cfg, 2).unwrap();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0].0, "Full CA-MIQ");
    let plain = run_many(&s, AgentKind::camiq(), &cfg, 1).unwrap();
    assert_eq!(rows[0].2, plain);
    assert_eq!(rows[0].1, aggregate("Full CA-MIQ", &plain).unwrap());
}

#[test]
fn run_metrics_round_trip_through_json() {
    let m = run_training(
        &spec(Scenario::MultiShift, 400, 1),
        AgentKind::camiq(),
        &TrainingConfig::default(),
        0,
    )
    .unwrap();
    let back = RunMetrics::from_json(&m.to_json().unwrap()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn recovery_time_is_at_least_one_window() {
    let runs = run_many(
        &spec(Scenario::MultiShift, 2000, 4),
        AgentKind::camiq(),
        &TrainingConfig::default(),
        4,
    )
    .unwrap();
    for r in runs.iter().flat_map(|m| &m.recovery) {
        if let Some(t) = r.recovery_time {
            assert!(r.recovered && t >= 50);
        }
        if r.degenerate_baseline {
            assert!(!r.recovered);
        }
    }
}

fn small_config(dir: &std::path::Path) -> RunConfig {
    RunConfig {
        scenario: Scenario::SingleShift,
        agent: AgentChoice::All,
        runs: 2,
        episodes: 300,
        out: dir.to_path_buf(),
        ..Default::default()
    }
}

fn read_dir_sorted(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn run_outputs_are_complete_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let rows = cmd_run(&cfg, 2).unwrap();
    assert_eq!(rows.len(), 3);
    let first = read_dir_sorted(dir.path());
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "config.toml",
            "curve_baseline.csv",
            "curve_baseline_boosted.csv",
            "curve_camiq.csv",
            "events.log",
            "summary.tsv"
        ]
    );
    cmd_run(&cfg, 1).unwrap();
    assert_eq!(read_dir_sorted(dir.path()), first);

    let echoed = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert_eq!(RunConfig::from_toml(&echoed).unwrap(), cfg);
    let curve = std::fs::read_to_string(dir.path().join("curve_camiq.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("episode,mean_reward,stderr"));
    assert_eq!(curve.lines().count(), 301);
}

#[test]
fn failed_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let pool = dir.path().join("pool.txt");
    std::fs::write(&pool, "[bad]\nAT\n..\n").unwrap();
    let out = dir.path().join("out");
    let cfg = RunConfig {
        pool: Some(pool),
        ..small_config(&out)
    };
    assert!(cmd_run(&cfg, 1).is_err());
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn ablate_writes_seven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        scenario: Scenario::MultiShift,
        agent: AgentChoice::Camiq,
        ..small_config(dir.path())
    };
    let rows = cmd_ablate(&cfg, 2).unwrap();
    assert_eq!(rows.len(), 7);
    let table = std::fs::read_to_string(dir.path().join("ablation.tsv")).unwrap();
    assert_eq!(table.lines().count(), 8);
    assert!(cmd_ablate(
        &RunConfig {
            scenario: Scenario::Static,
            ..cfg
        },
        1
    )
    .is_err());
}
