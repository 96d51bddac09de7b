//! Cross-checks against independent oracles: closed-form values, BFS
//! shortest paths and sampling frequencies.

use std::collections::VecDeque;

use camiq::critics::{LearningConfig, QTable};
use camiq::env::{self, Action, Cell, InformationSpace, Layout, Ordering, RewardConfig};
use camiq::harness::{train, Scenario, ScenarioSpec, TrainingConfig};
use camiq::oracle::{optimal_return, value_iteration};
use camiq::policy::{select_action_baseline, select_action_camiq, AgentKind, AgentRng, Branch};
use rand::SeedableRng;

const DRAWS: usize = 100_000;

#[test]
fn camiq_branch_frequency_matches_epsilon() {
    let mut rng = AgentRng::seed_from_u64(3);
    let qe = [0.0, 1.0, 0.0, 0.0, 0.0];
    let qi = [0.0, 0.0, 0.0, 0.0, 1.0];
    let mut intrinsic = 0;
    for _ in 0..DRAWS {
        let (a, b) = select_action_camiq(&qe, &qi, 0.3, &mut rng);
        match b {
            Branch::Intrinsic => {
                intrinsic += 1;
                assert_eq!(a, Action::Collect);
            }
            Branch::Extrinsic => assert_eq!(a, Action::Down),
        }
    }
    let f = intrinsic as f64 / DRAWS as f64;
    assert!((f - 0.3).abs() < 0.005, "{f}");
}

#[test]
fn baseline_exploration_is_uniform() {
    let mut rng = AgentRng::seed_from_u64(4);
    let qe = [0.0, 1.0, 0.0, 0.0, 0.0];
    let mut counts = [0usize; 5];
    for _ in 0..DRAWS {
        counts[select_action_baseline(&qe, 0.2, &mut rng).index()] += 1;
    }
    // Greedy with probability 0.8 + 0.2/5, every other action 0.2/5.
    let f = |i: usize| counts[i] as f64 / DRAWS as f64;
    assert!((f(1) - 0.84).abs() < 0.004, "{}", f(1));
    for i in [0, 2, 3, 4] {
        assert!((f(i) - 0.04).abs() < 0.004, "{i}: {}", f(i));
    }
}

#[test]
fn td_updates_converge_to_closed_form_on_two_state_mdp() {
    // s0: a0 -> s1 (r 1), a1 -> s0 (r 0); s1: a0 -> s0 (r 2), a1 ends (r 5).
    let gamma = 0.9;
    let cfg = LearningConfig { alpha: 0.5, gamma };
    let mut q = QTable::zeros(2, 2);
    for _ in 0..2000 {
        q.td_update(0, 0, 1.0, 1, false, &cfg).unwrap();
        q.td_update(0, 1, 0.0, 0, false, &cfg).unwrap();
        q.td_update(1, 0, 2.0, 0, false, &cfg).unwrap();
        q.td_update(1, 1, 5.0, 1, true, &cfg).unwrap();
    }
    // V0 = 1 + γ V1, V1 = 2 + γ V0.
    let v0 = (1.0 + gamma * 2.0) / (1.0 - gamma * gamma);
    let v1 = 2.0 + gamma * v0;
    let expected = [[1.0 + gamma * v1, gamma * v0], [2.0 + gamma * v0, 5.0]];
    for (s, row) in expected.iter().enumerate() {
        for (a, want) in row.iter().enumerate() {
            assert!(
                (q.get(s, a) - want).abs() < 1e-9,
                "Q({s},{a}) = {}",
                q.get(s, a)
            );
        }
    }
}

fn bfs(layout: &Layout, from: Cell, to: Cell) -> Option<usize> {
    let mut dist = vec![usize::MAX; layout.cell_count()];
    let mut queue = VecDeque::from([from]);
    dist[layout.cell_number(from)] = 0;
    while let Some(c) = queue.pop_front() {
        if c == to {
            return Some(dist[layout.cell_number(c)]);
        }
        for (dr, dc) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            let (r, col) = (c.row as isize + dr, c.col as isize + dc);
            if !layout.in_bounds(r, col) {
                continue;
            }
            let n = Cell::new(r as usize, col as usize);
            if layout.is_ditch(n) || dist[layout.cell_number(n)] != usize::MAX {
                continue;
            }
            dist[layout.cell_number(n)] = dist[layout.cell_number(c)] + 1;
            queue.push_back(n);
        }
    }
    None
}

/// Return of the shortest ditch-free tour start → items in order → target
/// with one collect per item.
fn tour_return(layout: &Layout, ordering: &Ordering, r: &RewardConfig) -> f64 {
    let mut stops = vec![layout.start()];
    stops.extend(
        ordering
            .items()
            .iter()
            .map(|i| layout.item_cell(*i).unwrap()),
    );
    stops.push(layout.target());
    let moves: usize = stops
        .windows(2)
        .map(|w| bfs(layout, w[0], w[1]).unwrap())
        .sum();
    let n = ordering.len() as f64;
    (moves as f64 + n) * r.step_cost + n * r.collect_reward + r.mission_reward
}

#[test]
fn optimal_return_equals_shortest_tour() {
    let r = RewardConfig::default();
    for layout in env::default_pool() {
        for ord in ["XYZ", "YZX", "ZXY", "ZYX"] {
            let ordering: Ordering = ord.parse().unwrap();
            let info = InformationSpace::new(ordering.clone());
            let got = optimal_return(&layout, &info, &r, 0.99).unwrap();
            assert_eq!(
                got,
                tour_return(&layout, &ordering, &r),
                "{} {ord}",
                layout.id()
            );
        }
    }
}

#[test]
fn value_iteration_satisfies_bellman_optimality() {
    let r = RewardConfig::default();
    let layout = env::default_pool().remove(0);
    let info = InformationSpace::new("XYZ".parse().unwrap());
    let sol = value_iteration(&layout, &info, &r, 0.99, 1e-12).unwrap();
    let template = env::reset(&layout, &info, 0).unwrap();
    let untimed = RewardConfig {
        step_limit: u32::MAX,
        ..r
    };
    for s in 0..env::state_count(&layout) {
        let (cell, collected) = env::state_from_index(s, &layout);
        if layout.is_ditch(cell) || (cell == layout.target() && collected == 7) {
            continue;
        }
        let state = env::EnvState {
            cell,
            collected,
            ..template.clone()
        };
        let best = Action::ALL
            .iter()
            .map(|a| {
                let t = env::step(&state, *a, &layout, &info, &untimed).unwrap();
                let next = if t.is_terminal() {
                    0.0
                } else {
                    sol.values[env::state_index(&t.next_state, &layout)]
                };
                t.reward + 0.99 * next
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - sol.values[s]).abs() < 1e-9, "state {s}");
    }
}

#[test]
fn every_agent_reaches_the_optimum_on_some_layout() {
    let cfg = TrainingConfig::default();
    let info = InformationSpace::new("XYZ".parse().unwrap());
    for kind in [
        AgentKind::Baseline,
        AgentKind::BaselineBoosted,
        AgentKind::camiq(),
    ] {
        let hits = env::default_pool()
            .into_iter()
            .filter(|layout| {
                let opt = optimal_return(layout, &info, &cfg.rewards, 0.99).unwrap();
                let spec =
                    ScenarioSpec::standard(Scenario::Static, 5000, 1, 0, vec![layout.clone()]);
                let (trained, _) = train(&spec, kind, &cfg, 0).unwrap();
                (trained.greedy_return(&cfg.rewards).unwrap() - opt).abs() < 1e-6
            })
            .count();
        assert!(hits >= 1, "{kind:?} never reached the optimum");
    }
}

#[test]
fn baseline_with_full_exploration_is_uniform() {
    let mut rng = AgentRng::seed_from_u64(5);
    let qe = [0.0, 0.0, 9.0, 0.0, 0.0];
    let mut counts = [0usize; 5];
    for _ in 0..DRAWS {
        counts[select_action_baseline(&qe, 1.0, &mut rng).index()] += 1;
    }
    for (i, c) in counts.iter().enumerate() {
        let f = *c as f64 / DRAWS as f64;
        assert!((f - 0.2).abs() < 0.004, "{i}: {f}");
    }
}
