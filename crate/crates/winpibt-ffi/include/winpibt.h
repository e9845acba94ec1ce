/* C interface for the winpibt multi-agent path finding library. */

#ifndef WINPIBT_H
#define WINPIBT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Solver selector for the solve entry points.
typedef enum WinpibtSolverKind {
  WINPIBT_SOLVER_KIND_PIBT = 0,
  WINPIBT_SOLVER_KIND_WINPIBT = 1,
  WINPIBT_SOLVER_KIND_WINPIBT_ITER = 2,
} WinpibtSolverKind;

// Status codes returned by fallible calls. Zero is success.
typedef enum WinpibtStatus {
  WINPIBT_STATUS_OK = 0,
  WINPIBT_STATUS_NULL_POINTER = -1,
  WINPIBT_STATUS_INVALID_ARGUMENT = -2,
  WINPIBT_STATUS_PARSE_FAILED = -3,
  WINPIBT_STATUS_INVALID_INSTANCE = -4,
  WINPIBT_STATUS_INVALID_UTF8 = -5,
  WINPIBT_STATUS_OUT_OF_RANGE = -6,
  WINPIBT_STATUS_SOLVER_PANICKED = -7,
} WinpibtStatus;

// Opaque graph handle.
typedef struct WinpibtGraph WinpibtGraph;

// Opaque run-result handle.
typedef struct WinpibtResult WinpibtResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse MovingAI map text into a graph handle.
//
// # Safety
// `text` must be a valid NUL-terminated string; `out` must be a valid
// pointer to receive the handle.
enum WinpibtStatus winpibt_graph_from_map_text(const char *text, struct WinpibtGraph **out);

// Build a 4-connected grid graph from a row-major passable mask
// (`width * height` bytes, nonzero = passable).
//
// # Safety
// `passable` must point to `width * height` readable bytes; `out` must be
// valid.
enum WinpibtStatus winpibt_graph_build_grid(uint32_t width,
                                            uint32_t height,
                                            const uint8_t *passable,
                                            struct WinpibtGraph **out);

// # Safety
// `graph` must be a live handle from a constructor, or null.
void winpibt_graph_free(struct WinpibtGraph *graph);

// # Safety
// `graph` must be a live handle.
uint32_t winpibt_graph_node_count(const struct WinpibtGraph *graph);

// # Safety
// `graph` must be a live handle.
uint64_t winpibt_graph_edge_count(const struct WinpibtGraph *graph);

// Node id at grid cell (x, y), or -1 when blocked, out of bounds, or the
// graph is not grid-backed.
//
// # Safety
// `graph` must be a live handle.
int64_t winpibt_graph_node_at(const struct WinpibtGraph *graph, uint32_t x, uint32_t y);

// Grid cell of a node id.
//
// # Safety
// All pointers must be valid; `graph` must be a live handle.
enum WinpibtStatus winpibt_graph_node_xy(const struct WinpibtGraph *graph,
                                         uint32_t node,
                                         uint32_t *x,
                                         uint32_t *y);

// Returns 1 when every adjacent pair lies on a simple cycle of length at
// least 3, otherwise 0 with one violating edge written to the out
// parameters (when non-null). Null graph returns -1.
//
// # Safety
// `graph` must be a live handle; out pointers may be null.
int32_t winpibt_graph_check_condition(const struct WinpibtGraph *graph,
                                      uint32_t *witness_from,
                                      uint32_t *witness_to);

// Shortest-path hop count between two nodes.
//
// # Safety
// Pointers must be valid; `graph` must be a live handle.
enum WinpibtStatus winpibt_graph_dist(const struct WinpibtGraph *graph,
                                      uint32_t from,
                                      uint32_t to,
                                      uint32_t *out);

// Solve a fixed-goal instance. The run may end at the timestep limit; that
// is reported through `winpibt_result_success`, not the status code.
//
// # Safety
// `starts` and `goals` must point to `n_agents` node ids each; `graph` must
// be a live handle; `out` must be valid.
enum WinpibtStatus winpibt_solve_classical(const struct WinpibtGraph *graph,
                                           const uint32_t *starts,
                                           const uint32_t *goals,
                                           uintptr_t n_agents,
                                           enum WinpibtSolverKind solver,
                                           uint32_t window,
                                           uint32_t timestep_limit,
                                           uint64_t seed,
                                           struct WinpibtResult **out);

// Solve a task-stream instance: every arrival issues a fresh random goal
// drawn from `goal_seed`, until `task_count` tasks have completed.
//
// # Safety
// `starts` must point to `n_agents` node ids; `graph` must be a live
// handle; `out` must be valid.
enum WinpibtStatus winpibt_solve_task_stream(const struct WinpibtGraph *graph,
                                             const uint32_t *starts,
                                             uintptr_t n_agents,
                                             uint32_t task_count,
                                             uint64_t goal_seed,
                                             enum WinpibtSolverKind solver,
                                             uint32_t window,
                                             uint32_t timestep_limit,
                                             struct WinpibtResult **out);

// # Safety
// `result` must be a live handle from a solve call, or null.
void winpibt_result_free(struct WinpibtResult *result);

// # Safety
// `result` must be a live handle.
int32_t winpibt_result_success(const struct WinpibtResult *result);

// # Safety
// `result` must be a live handle.
uint64_t winpibt_result_soc(const struct WinpibtResult *result);

// # Safety
// `result` must be a live handle.
uint64_t winpibt_result_makespan(const struct WinpibtResult *result);

// Mean service time of the terminating tasks; NaN for classical runs.
//
// # Safety
// `result` must be a live handle.
double winpibt_result_service_mean(const struct WinpibtResult *result);

// # Safety
// `result` must be a live handle.
uintptr_t winpibt_result_agent_count(const struct WinpibtResult *result);

// Number of recorded timesteps (path length) for one agent; 0 when out of
// range.
//
// # Safety
// `result` must be a live handle.
uintptr_t winpibt_result_path_len(const struct WinpibtResult *result, uintptr_t agent);

// Copy one agent's executed node ids into `buf` (up to `cap` entries);
// the number written lands in `written` when non-null.
//
// # Safety
// `buf` must point to at least `cap` writable u32s; `result` must be a
// live handle.
enum WinpibtStatus winpibt_result_path_nodes(const struct WinpibtResult *result,
                                             uintptr_t agent,
                                             uint32_t *buf,
                                             uintptr_t cap,
                                             uintptr_t *written);

// Full result record as a JSON string; null on error. Free with
// `winpibt_string_free`.
//
// # Safety
// `result` must be a live handle.
char *winpibt_result_to_json(const struct WinpibtResult *result);

// # Safety
// `s` must have been returned by `winpibt_result_to_json` and not yet
// freed.
void winpibt_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WINPIBT_H */
