#ifndef MDEVSP_H
#define MDEVSP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a solve.
 */
typedef enum MdevspSolveStatus {
  MDEVSP_SOLVE_STATUS_OPTIMAL = 0,
  MDEVSP_SOLVE_STATUS_FEASIBLE = 1,
  MDEVSP_SOLVE_STATUS_INFEASIBLE = 2,
  MDEVSP_SOLVE_STATUS_TIME_LIMIT = 3,
} MdevspSolveStatus;

/**
 * Result code of every fallible call.
 */
typedef enum MdevspStatus {
  MDEVSP_STATUS_OK = 0,
  MDEVSP_STATUS_NULL_POINTER = 1,
  MDEVSP_STATUS_INVALID_UTF8 = 2,
  MDEVSP_STATUS_IO = 3,
  MDEVSP_STATUS_PARSE = 4,
  MDEVSP_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The solution failed validation.
   */
  MDEVSP_STATUS_VALIDATION = 6,
  MDEVSP_STATUS_SOLVER = 7,
  /**
   * The instance has no feasible schedule.
   */
  MDEVSP_STATUS_INFEASIBLE = 8,
  /**
   * The time limit was reached before an incumbent was found.
   */
  MDEVSP_STATUS_TIME_LIMIT = 9,
  MDEVSP_STATUS_PANIC = 10,
} MdevspStatus;

typedef struct MdevspGraph MdevspGraph;

typedef struct MdevspInstance MdevspInstance;

typedef struct MdevspSolution MdevspSolution;

typedef struct MdevspObjective {
  uint32_t n_vehicles;
  uint32_t n_charges;
  double deadhead_energy;
} MdevspObjective;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *mdevsp_last_error_message(void);

/**
 * Library version, a static string.
 */
const char *mdevsp_version(void);

/**
 * Loads an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MdevspStatus mdevsp_instance_load(const char *path, struct MdevspInstance **out);

/**
 * Parses an instance from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MdevspStatus mdevsp_instance_from_json(const char *json, struct MdevspInstance **out);

/**
 * Generates a seeded random benchmark instance.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MdevspStatus mdevsp_instance_generate_benchmark(size_t n_trips,
                                                     size_t n_depots,
                                                     size_t n_stations,
                                                     uint64_t seed,
                                                     struct MdevspInstance **out);

/**
 * # Safety
 * `instance` must come from this library and not be used afterwards.
 */
void mdevsp_instance_free(struct MdevspInstance *instance);

/**
 * Number of service trips; 0 for a null pointer.
 *
 * # Safety
 * `instance` must be null or valid.
 */
size_t mdevsp_instance_num_trips(const struct MdevspInstance *instance);

/**
 * # Safety
 * `instance` must be null or valid.
 */
size_t mdevsp_instance_num_depots(const struct MdevspInstance *instance);

/**
 * Maximum number of overlapping trips, a lower bound on the fleet.
 *
 * # Safety
 * `instance` must be null or valid.
 */
size_t mdevsp_instance_fleet_lower_bound(const struct MdevspInstance *instance);

/**
 * Serializes an instance to JSON. Returns null on failure.
 *
 * # Safety
 * `instance` must be null or valid.
 */
char *mdevsp_instance_to_json(const struct MdevspInstance *instance);

/**
 * Builds the pruned scheduling graph.
 *
 * # Safety
 * `instance` must be valid and `out` a valid pointer.
 */
enum MdevspStatus mdevsp_graph_build(const struct MdevspInstance *instance,
                                     struct MdevspGraph **out);

/**
 * # Safety
 * `graph` must be null or valid.
 */
size_t mdevsp_graph_num_nodes(const struct MdevspGraph *graph);

/**
 * # Safety
 * `graph` must be null or valid.
 */
size_t mdevsp_graph_num_arcs(const struct MdevspGraph *graph);

/**
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void mdevsp_graph_free(struct MdevspGraph *graph);

/**
 * Solves `instance` under `setting` (for example `2i-CC+VI+I+All`; null
 * selects the default). A non-positive `time_limit_s` keeps the default
 * limit. Infeasible instances and time limits still produce a solution
 * object; query it with [`mdevsp_solution_status`].
 *
 * # Safety
 * `instance` must be valid, `setting` null or NUL-terminated, `out` valid.
 */
enum MdevspStatus mdevsp_solve(const struct MdevspInstance *instance,
                               const char *setting,
                               double time_limit_s,
                               struct MdevspSolution **out);

/**
 * # Safety
 * `solution` must be valid.
 */
enum MdevspSolveStatus mdevsp_solution_status(const struct MdevspSolution *solution);

/**
 * Writes the objective triple of the incumbent. Fails with `Infeasible` or
 * `TimeLimit` when there is none.
 *
 * # Safety
 * `solution` must be valid and `out` a valid pointer.
 */
enum MdevspStatus mdevsp_solution_objective(const struct MdevspSolution *solution,
                                            struct MdevspObjective *out);

/**
 * Number of cuts added by the separation loop.
 *
 * # Safety
 * `solution` must be null or valid.
 */
size_t mdevsp_solution_num_cuts(const struct MdevspSolution *solution);

/**
 * The full solution as JSON. Returns null on failure.
 *
 * # Safety
 * `solution` must be null or valid.
 */
char *mdevsp_solution_to_json(const struct MdevspSolution *solution);

/**
 * # Safety
 * `solution` must come from this library and not be used afterwards.
 */
void mdevsp_solution_free(struct MdevspSolution *solution);

/**
 * Validates schedules given as JSON, either a solution object or a bare
 * list. Returns `Ok` when they pass and `Validation` otherwise. When
 * `report` is not null it receives the report as JSON.
 *
 * # Safety
 * `instance` must be valid, `schedules_json` NUL-terminated, `report` null
 * or valid.
 */
enum MdevspStatus mdevsp_validate(const struct MdevspInstance *instance,
                                  const char *schedules_json,
                                  char **report);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void mdevsp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDEVSP_H */
