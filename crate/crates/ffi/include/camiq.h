#ifndef CAMIQ_H
#define CAMIQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CamiqAgent {
  CAMIQ_AGENT_BASELINE = 0,
  CAMIQ_AGENT_BASELINE_BOOSTED = 1,
  CAMIQ_AGENT_CAMIQ = 2,
} CamiqAgent;

typedef enum CamiqEvent {
  CAMIQ_EVENT_MOVED = 0,
  CAMIQ_EVENT_BLOCKED = 1,
  CAMIQ_EVENT_DITCH = 2,
  CAMIQ_EVENT_COLLECTED_IN_ORDER = 3,
  CAMIQ_EVENT_COLLECTED_OUT_OF_ORDER_REJECTED = 4,
  CAMIQ_EVENT_ATTEMPT_LIMIT_EXCEEDED = 5,
  CAMIQ_EVENT_MISSION_COMPLETE = 6,
  CAMIQ_EVENT_STEP_LIMIT = 7,
} CamiqEvent;

typedef enum CamiqScenario {
  CAMIQ_SCENARIO_STATIC = 0,
  CAMIQ_SCENARIO_SINGLE_SHIFT = 1,
  CAMIQ_SCENARIO_MULTI_SHIFT = 2,
} CamiqScenario;

/**
 * Result code of every call.
 */
typedef enum CamiqStatus {
  CAMIQ_STATUS_OK = 0,
  CAMIQ_STATUS_NULL_POINTER = 1,
  CAMIQ_STATUS_INVALID_ARGUMENT = 2,
  CAMIQ_STATUS_PARSE = 3,
  CAMIQ_STATUS_INVALID_LAYOUT = 4,
  CAMIQ_STATUS_INVALID_ORDERING = 5,
  CAMIQ_STATUS_EPISODE_DONE = 6,
  CAMIQ_STATUS_OUT_OF_RANGE = 7,
  CAMIQ_STATUS_CONFIG = 8,
  CAMIQ_STATUS_IO = 9,
  CAMIQ_STATUS_INTERNAL = 10,
} CamiqStatus;

/**
 * One layout with its information space and current episode state.
 */
typedef struct CamiqEnv CamiqEnv;

/**
 * Validated set of layouts.
 */
typedef struct CamiqPool CamiqPool;

/**
 * Outcome of one environment step.
 */
typedef struct CamiqStep {
  size_t next_state;
  double reward;
  bool done;
  bool mission_success;
  /**
   * `StepLimit` when the step limit cut the episode.
   */
  int32_t event;
  /**
   * What the action itself did.
   */
  int32_t outcome;
} CamiqStep;

/**
 * Aggregate metrics of a training batch. Recovery fields are NaN when the
 * scenario has no shifts or no run recovered.
 */
typedef struct CamiqSummary {
  size_t runs;
  double mission_success_pct;
  double info_collection_pct;
  double recovery_success_pct;
  double mean_recovery_time;
  double mean_reward_per_episode;
  double post_shift_mission_pct;
} CamiqSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *camiq_last_error_message(void);

/**
 * The bundled five-layout pool.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CamiqStatus camiq_pool_default(struct CamiqPool **out);

/**
 * Parses a pool document.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CamiqStatus camiq_pool_parse(const char *text, struct CamiqPool **out);

/**
 * # Safety
 * `pool` must come from a `camiq_pool_*` constructor and `len` be valid.
 */
enum CamiqStatus camiq_pool_len(const struct CamiqPool *pool, size_t *len);

/**
 * # Safety
 * `pool` must be null or a handle not yet freed.
 */
void camiq_pool_free(struct CamiqPool *pool);

/**
 * Value-iteration optimal episode return of layout `index` under
 * `ordering` with default rewards.
 *
 * # Safety
 * Pointers must be valid; `ordering` NUL-terminated.
 */
enum CamiqStatus camiq_oracle_optimal_return(const struct CamiqPool *pool,
                                             size_t index,
                                             const char *ordering,
                                             double gamma,
                                             double *out);

/**
 * Environment on layout `index` of `pool` with the given ordering and
 * default rewards, already reset.
 *
 * # Safety
 * Pointers must be valid; `ordering` NUL-terminated.
 */
enum CamiqStatus camiq_env_new(const struct CamiqPool *pool,
                               size_t index,
                               const char *ordering,
                               struct CamiqEnv **out);

/**
 * # Safety
 * `env` must be null or a handle not yet freed.
 */
void camiq_env_free(struct CamiqEnv *env);

/**
 * Number of tabular states of the environment's layout.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CamiqStatus camiq_env_state_count(const struct CamiqEnv *env, size_t *out);

/**
 * Starts a new episode and writes the start state index.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CamiqStatus camiq_env_reset(struct CamiqEnv *env, size_t *state);

/**
 * Applies `action` (0 up, 1 down, 2 left, 3 right, 4 collect).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CamiqStatus camiq_env_step(struct CamiqEnv *env, uint32_t action, struct CamiqStep *out);

/**
 * Replaces the collection ordering; takes effect from the next step.
 *
 * # Safety
 * Pointers must be valid; `ordering` NUL-terminated.
 */
enum CamiqStatus camiq_env_set_ordering(struct CamiqEnv *env, const char *ordering, size_t episode);

/**
 * Trains `runs` agents of one kind on the standard schedule with default
 * hyper-parameters and writes the aggregate.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CamiqStatus camiq_train(const struct CamiqPool *pool,
                             enum CamiqScenario scenario,
                             enum CamiqAgent agent,
                             size_t runs,
                             size_t episodes,
                             uint64_t seed,
                             size_t workers,
                             struct CamiqSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAMIQ_H */
