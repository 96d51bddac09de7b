//! Property suites: argmax ties, ε schedule and boost envelope, mission
//! implies collection, detector silence on flat histories, reward
//! decomposition over every event, and state-index bijectivity.

use std::collections::HashSet;

use camiq::adaptation::{detect_shift, AdaptationConfig};
use camiq::env::{
    self, Action, Cell, EnvState, Event, InformationSpace, Layout, Ordering, RewardConfig,
};
use camiq::harness::{run_training, Scenario, ScenarioSpec, TrainingConfig};
use camiq::policy::{greedy, AgentKind, BoostState, EpsilonSchedule};
use proptest::prelude::*;

fn orderings() -> Vec<Ordering> {
    ["XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

proptest! {
    #[test]
    fn argmax_picks_first_maximum(
        row in proptest::collection::vec(prop_oneof![Just(0.0f64), Just(1.0), Just(-1.0), -5.0f64..5.0], 5)
    ) {
        let i = greedy(&row);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(row[i], max);
        prop_assert!(row[..i].iter().all(|v| *v < max));
        prop_assert_eq!(greedy(&row), i);
    }

    #[test]
    fn schedule_is_monotone_without_boost(
        eps0 in 0.2f64..1.0,
        eps_min in 0.0f64..0.2,
        horizon in 1usize..6000,
        e in 0usize..7000,
    ) {
        let s = EpsilonSchedule::new(eps0, eps_min, horizon);
        prop_assert!(s.epsilon_at(e + 1) <= s.epsilon_at(e));
        prop_assert!(s.epsilon_at(e) >= eps_min && s.epsilon_at(e) <= eps0);
    }

    #[test]
    fn boost_envelope_decays_and_hands_off(
        start in 0usize..4900,
        eps in 0.1f64..1.0,
        lambda in 1.0f64..4.0,
        d in 1usize..200,
        k in 0usize..400,
    ) {
        let mut s = EpsilonSchedule::new(1.0, 0.1, 5000);
        let boosted = (eps * lambda).min(1.0);
        s.boost = Some(BoostState { start_episode: start, eps_boosted: boosted, duration: d, eps_max: 1.0 });
        let e = start + k;
        let v = s.epsilon_at(e);
        prop_assert!(v <= 1.0 && v >= s.linear_at(e));
        if k < d {
            let envelope = boosted * (-(k as f64) / d as f64).exp();
            prop_assert!((v - envelope.max(s.linear_at(e))).abs() < 1e-12);
            prop_assert!(s.epsilon_at(e + 1) <= v + 1e-12);
        } else {
            prop_assert_eq!(v, s.linear_at(e));
        }
    }

    #[test]
    fn detector_is_silent_on_constant_histories(
        value in any::<bool>(),
        len in 0usize..400,
        window in 1usize..100,
        drop in 0.01f64..0.99,
    ) {
        let cfg = AdaptationConfig { detector_window: window, detector_drop: drop, ..Default::default() };
        let history = vec![value; len];
        for n in 0..=len {
            prop_assert!(!detect_shift(&history[..n], &cfg));
        }
    }
}

#[test]
fn mission_implies_collection_in_training() {
    let cfg = TrainingConfig::default();
    for scenario in [
        Scenario::Static,
        Scenario::SingleShift,
        Scenario::MultiShift,
    ] {
        let spec = ScenarioSpec::standard(scenario, 400, 3, 11, env::default_pool());
        for kind in [
            AgentKind::Baseline,
            AgentKind::BaselineBoosted,
            AgentKind::camiq(),
        ] {
            for run in 0..spec.runs {
                let m = run_training(&spec, kind, &cfg, run).unwrap();
                for r in &m.records {
                    assert!(
                        !r.mission_success || r.info_collection_success,
                        "{kind:?} run {run} ep {}",
                        r.episode
                    );
                }
            }
        }
    }
}

/// Reward implied by the action's outcome, built from the config fields.
fn decomposed(outcome: Event, r: &RewardConfig) -> f64 {
    r.step_cost
        + match outcome {
            Event::Moved | Event::Blocked => 0.0,
            Event::Ditch => r.ditch_penalty,
            Event::CollectedInOrder => r.collect_reward,
            Event::CollectedOutOfOrderRejected => r.out_of_order_penalty,
            Event::AttemptLimitExceeded => r.action_limit_penalty,
            Event::MissionComplete => r.mission_reward,
            Event::StepLimit => unreachable!("step limit is never an outcome"),
        }
}

/// Outcome predicted from the rules alone.
fn predicted(
    state: &EnvState,
    action: Action,
    layout: &Layout,
    info: &InformationSpace,
    r: &RewardConfig,
) -> Event {
    let full = (1u32 << layout.item_count()) - 1;
    let moves = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)];
    if action == Action::Collect {
        let Some((bit, item)) = layout.item_at(state.cell) else {
            return Event::AttemptLimitExceeded;
        };
        if state.collected & (1 << bit) != 0
            || state.collect_attempts[bit] >= r.collect_attempt_limit
        {
            return Event::AttemptLimitExceeded;
        }
        let first_missing = info
            .ordering()
            .items()
            .iter()
            .find(|i| state.collected & (1 << layout.item_bit(**i).unwrap()) == 0);
        return if first_missing == Some(&item) {
            Event::CollectedInOrder
        } else {
            Event::CollectedOutOfOrderRejected
        };
    }
    let (dr, dc) = moves[action.index()];
    let (row, col) = (state.cell.row as isize + dr, state.cell.col as isize + dc);
    if row < 0 || col < 0 || row >= layout.height() as isize || col >= layout.width() as isize {
        return Event::Blocked;
    }
    let cell = Cell::new(row as usize, col as usize);
    if layout.ditches().contains(&cell) {
        Event::Ditch
    } else if cell == layout.target() && state.collected == full {
        Event::MissionComplete
    } else {
        Event::Moved
    }
}

#[test]
fn reward_decomposes_exhaustively() {
    let rewards = [
        RewardConfig::default(),
        RewardConfig {
            step_cost: -0.5,
            ditch_penalty: -7.0,
            collect_reward: 3.0,
            out_of_order_penalty: -2.25,
            mission_reward: 11.0,
            action_limit_penalty: -1.5,
            collect_attempt_limit: 2,
            step_limit: 3,
        },
    ];
    let mut seen = HashSet::new();
    for r in &rewards {
        for layout in env::default_pool() {
            for ordering in orderings() {
                let info = InformationSpace::new(ordering);
                let template = env::reset(&layout, &info, 0).unwrap();
                for s in 0..env::state_count(&layout) {
                    let (cell, collected) = env::state_from_index(s, &layout);
                    if layout.is_ditch(cell) {
                        continue;
                    }
                    for attempts in 0..=r.collect_attempt_limit {
                        for steps in [0, r.step_limit - 1] {
                            let state = EnvState {
                                cell,
                                collected,
                                steps,
                                collect_attempts: vec![attempts; layout.item_count()],
                                ..template.clone()
                            };
                            for a in Action::ALL {
                                let t = env::step(&state, a, &layout, &info, r).unwrap();
                                assert_eq!(t.outcome, predicted(&state, a, &layout, &info, r));
                                assert_eq!(t.reward, decomposed(t.outcome, r), "{:?}", t.outcome);
                                let ends =
                                    matches!(t.outcome, Event::Ditch | Event::MissionComplete);
                                if !ends && steps + 1 >= r.step_limit {
                                    assert_eq!(t.event, Event::StepLimit);
                                    assert!(t.done && !t.is_terminal());
                                } else {
                                    assert_eq!(t.event, t.outcome);
                                    assert_eq!(t.done, ends);
                                }
                                assert_eq!(
                                    t.next_state.mission_success,
                                    t.outcome == Event::MissionComplete
                                );
                                seen.insert(t.event);
                                seen.insert(t.outcome);
                            }
                        }
                    }
                }
            }
        }
    }
    assert_eq!(seen.len(), 8, "every event type is exercised: {seen:?}");
}

#[test]
fn state_index_is_a_bijection() {
    for layout in env::default_pool() {
        let info = InformationSpace::new("XYZ".parse().unwrap());
        let template = env::reset(&layout, &info, 0).unwrap();
        let n = env::state_count(&layout);
        assert_eq!(n, 128);
        let mut hit = vec![false; n];
        for row in 0..layout.height() {
            for col in 0..layout.width() {
                for mask in 0..(1u32 << layout.item_count()) {
                    let state = EnvState {
                        cell: Cell::new(row, col),
                        collected: mask,
                        ..template.clone()
                    };
                    let i = env::state_index(&state, &layout);
                    assert!(!hit[i], "index {i} reused");
                    hit[i] = true;
                    assert_eq!(
                        env::state_from_index(i, &layout),
                        (Cell::new(row, col), mask)
                    );
                }
            }
        }
        assert!(hit.iter().all(|h| *h));
    }
}
