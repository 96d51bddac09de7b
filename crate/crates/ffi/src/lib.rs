//! C ABI for the `camiq` crate.
//!
//! Every function returns a [`CamiqStatus`]; on failure the message is kept
//! per thread and can be read with [`camiq_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function. Strings are
//! NUL-terminated UTF-8. No function panics across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use camiq::env::{self, Action, EnvState, Event, InformationSpace, Layout, Ordering, RewardConfig};
use camiq::harness::{aggregate, run_many, Scenario, ScenarioSpec, TrainingConfig};
use camiq::policy::AgentKind;
use camiq::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CamiqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidLayout = 4,
    InvalidOrdering = 5,
    EpisodeDone = 6,
    OutOfRange = 7,
    Config = 8,
    Io = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CamiqEvent {
    Moved = 0,
    Blocked = 1,
    Ditch = 2,
    CollectedInOrder = 3,
    CollectedOutOfOrderRejected = 4,
    AttemptLimitExceeded = 5,
    MissionComplete = 6,
    StepLimit = 7,
}

impl From<Event> for CamiqEvent {
    fn from(e: Event) -> Self {
        match e {
            Event::Moved => CamiqEvent::Moved,
            Event::Blocked => CamiqEvent::Blocked,
            Event::Ditch => CamiqEvent::Ditch,
            Event::CollectedInOrder => CamiqEvent::CollectedInOrder,
            Event::CollectedOutOfOrderRejected => CamiqEvent::CollectedOutOfOrderRejected,
            Event::AttemptLimitExceeded => CamiqEvent::AttemptLimitExceeded,
            Event::MissionComplete => CamiqEvent::MissionComplete,
            Event::StepLimit => CamiqEvent::StepLimit,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CamiqScenario {
    Static = 0,
    SingleShift = 1,
    MultiShift = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CamiqAgent {
    Baseline = 0,
    BaselineBoosted = 1,
    Camiq = 2,
}

/// Outcome of one environment step.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CamiqStep {
    pub next_state: usize,
    pub reward: f64,
    pub done: bool,
    pub mission_success: bool,
    /// `StepLimit` when the step limit cut the episode.
    pub event: i32,
    /// What the action itself did.
    pub outcome: i32,
}

/// Aggregate metrics of a training batch. Recovery fields are NaN when the
/// scenario has no shifts or no run recovered.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CamiqSummary {
    pub runs: usize,
    pub mission_success_pct: f64,
    pub info_collection_pct: f64,
    pub recovery_success_pct: f64,
    pub mean_recovery_time: f64,
    pub mean_reward_per_episode: f64,
    pub post_shift_mission_pct: f64,
}

/// Validated set of layouts.
pub struct CamiqPool {
    layouts: Vec<Layout>,
}

/// One layout with its information space and current episode state.
pub struct CamiqEnv {
    layout: Layout,
    info: InformationSpace,
    rewards: RewardConfig,
    state: EnvState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CamiqStatus {
    match e {
        Error::Parse { .. } => CamiqStatus::Parse,
        Error::EmptyPool | Error::InvalidLayout { .. } => CamiqStatus::InvalidLayout,
        Error::InvalidOrdering(_) => CamiqStatus::InvalidOrdering,
        Error::UnknownAction(_) => CamiqStatus::InvalidArgument,
        Error::EpisodeDone => CamiqStatus::EpisodeDone,
        Error::IndexOutOfRange { .. } => CamiqStatus::OutOfRange,
        Error::Config(_) | Error::Scenario(_) | Error::EmptyInput(_) => CamiqStatus::Config,
        Error::Io(_) => CamiqStatus::Io,
        Error::Serde(_) => CamiqStatus::Internal,
    }
}

struct Fail(CamiqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CamiqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CamiqStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CamiqStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CamiqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CamiqStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn camiq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The bundled five-layout pool.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn camiq_pool_default(out: *mut *mut CamiqPool) -> CamiqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(CamiqPool {
            layouts: env::default_pool(),
        }));
        Ok(())
    })
}

/// Parses a pool document.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn camiq_pool_parse(
    text: *const c_char,
    out: *mut *mut CamiqPool,
) -> CamiqStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        let layouts = env::parse_pool(text)?;
        *out = Box::into_raw(Box::new(CamiqPool { layouts }));
        Ok(())
    })
}

/// # Safety
/// `pool` must come from a `camiq_pool_*` constructor and `len` be valid.
#[no_mangle]
pub unsafe extern "C" fn camiq_pool_len(pool: *const CamiqPool, len: *mut usize) -> CamiqStatus {
    guard(|| {
        *out_arg(len, "len")? = ref_arg(pool, "pool")?.layouts.len();
        Ok(())
    })
}

/// # Safety
/// `pool` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn camiq_pool_free(pool: *mut CamiqPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

fn layout_at(pool: &CamiqPool, index: usize) -> Result<&Layout, Fail> {
    pool.layouts.get(index).ok_or_else(|| {
        Fail::from(Error::IndexOutOfRange {
            what: "layout",
            index,
            len: pool.layouts.len(),
        })
    })
}

/// Value-iteration optimal episode return of layout `index` under
/// `ordering` with default rewards.
///
/// # Safety
/// Pointers must be valid; `ordering` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn camiq_oracle_optimal_return(
    pool: *const CamiqPool,
    index: usize,
    ordering: *const c_char,
    gamma: f64,
    out: *mut f64,
) -> CamiqStatus {
    guard(|| {
        let layout = layout_at(ref_arg(pool, "pool")?, index)?;
        let ordering: Ordering = str_arg(ordering, "ordering")?.parse()?;
        let out = out_arg(out, "out")?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(Fail(CamiqStatus::InvalidArgument, "0 ≤ gamma < 1".into()));
        }
        let info = InformationSpace::new(ordering);
        *out = camiq::oracle::optimal_return(layout, &info, &RewardConfig::default(), gamma)?;
        Ok(())
    })
}

/// Environment on layout `index` of `pool` with the given ordering and
/// default rewards, already reset.
///
/// # Safety
/// Pointers must be valid; `ordering` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_new(
    pool: *const CamiqPool,
    index: usize,
    ordering: *const c_char,
    out: *mut *mut CamiqEnv,
) -> CamiqStatus {
    guard(|| {
        let layout = layout_at(ref_arg(pool, "pool")?, index)?.clone();
        let ordering: Ordering = str_arg(ordering, "ordering")?.parse()?;
        let out = out_arg(out, "out")?;
        let info = InformationSpace::new(ordering);
        let state = env::reset(&layout, &info, 0)?;
        *out = Box::into_raw(Box::new(CamiqEnv {
            layout,
            info,
            rewards: RewardConfig::default(),
            state,
        }));
        Ok(())
    })
}

/// # Safety
/// `env` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_free(env: *mut CamiqEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Number of tabular states of the environment's layout.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_state_count(
    env: *const CamiqEnv,
    out: *mut usize,
) -> CamiqStatus {
    guard(|| {
        *out_arg(out, "out")? = env::state_count(&ref_arg(env, "env")?.layout);
        Ok(())
    })
}

/// Starts a new episode and writes the start state index.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_reset(env: *mut CamiqEnv, state: *mut usize) -> CamiqStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        let state = out_arg(state, "state")?;
        env.state = env::reset(&env.layout, &env.info, 0)?;
        *state = env::state_index(&env.state, &env.layout);
        Ok(())
    })
}

/// Applies `action` (0 up, 1 down, 2 left, 3 right, 4 collect).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_step(
    env: *mut CamiqEnv,
    action: u32,
    out: *mut CamiqStep,
) -> CamiqStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        let out = out_arg(out, "out")?;
        let action = Action::from_index(action as usize)?;
        let t = env::step(&env.state, action, &env.layout, &env.info, &env.rewards)?;
        *out = CamiqStep {
            next_state: env::state_index(&t.next_state, &env.layout),
            reward: t.reward,
            done: t.done,
            mission_success: t.next_state.mission_success,
            event: CamiqEvent::from(t.event) as i32,
            outcome: CamiqEvent::from(t.outcome) as i32,
        };
        env.state = t.next_state;
        Ok(())
    })
}

/// Replaces the collection ordering; takes effect from the next step.
///
/// # Safety
/// Pointers must be valid; `ordering` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn camiq_env_set_ordering(
    env: *mut CamiqEnv,
    ordering: *const c_char,
    episode: usize,
) -> CamiqStatus {
    guard(|| {
        let env = out_arg(env, "env")?;
        let ordering: Ordering = str_arg(ordering, "ordering")?.parse()?;
        env.info.swap_priorities(ordering, episode)?;
        Ok(())
    })
}

/// Trains `runs` agents of one kind on the standard schedule with default
/// hyper-parameters and writes the aggregate.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn camiq_train(
    pool: *const CamiqPool,
    scenario: CamiqScenario,
    agent: CamiqAgent,
    runs: usize,
    episodes: usize,
    seed: u64,
    workers: usize,
    out: *mut CamiqSummary,
) -> CamiqStatus {
    guard(|| {
        let pool = ref_arg(pool, "pool")?;
        let out = out_arg(out, "out")?;
        let scenario = match scenario {
            CamiqScenario::Static => Scenario::Static,
            CamiqScenario::SingleShift => Scenario::SingleShift,
            CamiqScenario::MultiShift => Scenario::MultiShift,
        };
        let kind = match agent {
            CamiqAgent::Baseline => AgentKind::Baseline,
            CamiqAgent::BaselineBoosted => AgentKind::BaselineBoosted,
            CamiqAgent::Camiq => AgentKind::camiq(),
        };
        let spec = ScenarioSpec::standard(scenario, episodes, runs, seed, pool.layouts.clone());
        spec.validate()?;
        let results = run_many(&spec, kind, &TrainingConfig::default(), workers)?;
        let s = aggregate(kind.label(), &results)?;
        *out = CamiqSummary {
            runs: s.runs,
            mission_success_pct: s.mission_success_pct,
            info_collection_pct: s.info_collection_pct,
            recovery_success_pct: s.recovery_success_pct.unwrap_or(f64::NAN),
            mean_recovery_time: s.mean_recovery_time.unwrap_or(f64::NAN),
            mean_reward_per_episode: s.mean_reward_per_episode,
            post_shift_mission_pct: s.post_shift_mission_pct,
        };
        Ok(())
    })
}
