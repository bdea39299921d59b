// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

/* C interface to the dernet elastic-net simulator.
 *
 * Every function returns a dernet_status. On failure a message is available
 * from dernet_last_error() on the same thread until the next call. Objects
 * are opaque and released with their _free function; passing NULL to a
 * _free function is allowed. */

#ifndef DERNET_DERNET_H_
#define DERNET_DERNET_H_

#include <stddef.h>

#if defined(_WIN32)
#define DERNET_API __declspec(dllexport)
#else
#define DERNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dernet_status {
  DERNET_OK = 0,
  DERNET_INVALID_ARGUMENT = 1,
  DERNET_INVALID_MESH = 2,
  DERNET_INVALID_CONFIG = 3,
  DERNET_PARSE_ERROR = 4,
  DERNET_IO_ERROR = 5,
  DERNET_NONCONVERGENCE = 6,
  DERNET_SOLVER_ERROR = 7,
  DERNET_CONTACT_ERROR = 8,
  DERNET_NUMERICAL_ERROR = 9,
  DERNET_DOMAIN_ERROR = 10,
  DERNET_SINGULARITY = 11,
  DERNET_INTERNAL_ERROR = 99
} dernet_status;

DERNET_API const char* dernet_version(void);
DERNET_API const char* dernet_status_string(dernet_status status);
/* Message of the last failed call on this thread, "" if none. */
DERNET_API const char* dernet_last_error(void);

/* ---- meshes ---------------------------------------------------------- */

typedef struct dernet_mesh dernet_mesh;

typedef struct dernet_material {
  double young_modulus; /* Pa */
  double rod_radius;    /* m */
  double density;       /* kg/m^3 */
} dernet_material;

/* E = 1 GPa, r0 = 1 mm, rho = 1000 kg/m^3. */
DERNET_API dernet_material dernet_default_material(void);

typedef struct dernet_mesh_counts {
  int nodes;
  int stretch;
  int bend;
  int junctions;
  int corners;
} dernet_mesh_counts;

/* Planar hexagonal web. material may be NULL for the default. */
DERNET_API dernet_status dernet_mesh_generate_web(double side_length, double grid_interval, int subdivisions,
                                                  const dernet_material* material, dernet_mesh** out);
DERNET_API dernet_status dernet_mesh_generate_rod(double length, int nodes, const dernet_material* material,
                                                  dernet_mesh** out);
DERNET_API dernet_status dernet_mesh_load(const char* path, const dernet_material* material, dernet_mesh** out);
DERNET_API dernet_status dernet_mesh_save(const dernet_mesh* mesh, const char* path);
DERNET_API dernet_status dernet_mesh_get_counts(const dernet_mesh* mesh, dernet_mesh_counts* out);
/* Copies 3 * nodes reference coordinates into xyz (capacity in doubles). */
DERNET_API dernet_status dernet_mesh_get_positions(const dernet_mesh* mesh, double* xyz, size_t capacity);
DERNET_API void dernet_mesh_free(dernet_mesh* mesh);

/* ---- step reports and runs ------------------------------------------ */

typedef struct dernet_step_report {
  int newton_iterations;
  double residual_norm;
  int linear_solves;
  int contact_passes;
  int contacts;
  int half_steps;
} dernet_step_report;

typedef void (*dernet_progress_fn)(void* user, int step, double t, const dernet_step_report* report);

typedef struct dernet_run_options {
  const char* out_dir;       /* NULL means "out" */
  double frame_interval;     /* s; <= 0 disables frames */
  dernet_progress_fn progress; /* may be NULL */
  void* user;
} dernet_run_options;

DERNET_API dernet_run_options dernet_default_run_options(void);

typedef struct dernet_run_summary {
  char content_hash[41];
  int steps;
  int frames;
  double simulated_time;
  double wall_time;
  int completed;
  dernet_step_report last_step;
} dernet_run_summary;

/* Runs the scenario in a config file and writes its outputs. summary may be
 * NULL; when given it is filled in on failure too (steps done so far and the
 * last accepted step). */
DERNET_API dernet_status dernet_simulate(const char* config_path, const dernet_run_options* options,
                                         dernet_run_summary* summary);

/* ---- scenarios stepped by the caller --------------------------------- */

typedef struct dernet_scenario dernet_scenario;

DERNET_API dernet_status dernet_scenario_load(const char* config_path, dernet_scenario** out);
DERNET_API dernet_status dernet_scenario_step(dernet_scenario* scenario, dernet_step_report* report);
DERNET_API dernet_status dernet_scenario_time(const dernet_scenario* scenario, double* t);
DERNET_API dernet_status dernet_scenario_node_count(const dernet_scenario* scenario, int* nodes);
/* Current positions (3 * nodes doubles). velocities may be NULL. */
DERNET_API dernet_status dernet_scenario_get_state(const dernet_scenario* scenario, double* positions,
                                                   double* velocities, size_t capacity);
/* Value of a named metric at the current state (see the README). */
DERNET_API dernet_status dernet_scenario_metric(const dernet_scenario* scenario, const char* name, double* value);
DERNET_API void dernet_scenario_free(dernet_scenario* scenario);

/* ---- benchmark ------------------------------------------------------- */

typedef struct dernet_bench_mesh {
  double side_length;
  double grid_interval;
  int subdivisions;
} dernet_bench_mesh;

typedef struct dernet_bench_row {
  int nodes;
  int stretch;
  int bend;
  double time_step;
  int steps;
  double simulated_time;
  double wall_time;
  double ratio; /* wall / simulated */
} dernet_bench_row;

typedef void (*dernet_bench_fn)(void* user, const dernet_bench_row* row);

typedef struct dernet_bench_options {
  const dernet_bench_mesh* meshes; /* NULL for the default sizes */
  size_t mesh_count;
  const double* time_steps; /* NULL for {0.01, 0.001} */
  size_t time_step_count;
  int steps; /* per run, <= 0 for 100 */
  dernet_bench_fn on_row; /* may be NULL */
  void* user;
} dernet_bench_options;

/* Writes up to capacity rows; *count is the number produced. */
DERNET_API dernet_status dernet_bench(const dernet_bench_options* options, dernet_bench_row* rows, size_t capacity,
                                      size_t* count);

/* ---- oracle validation ----------------------------------------------- */

typedef struct dernet_check {
  char name[64];
  double measured;
  double tolerance;
  int pass;
  char detail[256];
} dernet_check;

typedef struct dernet_validate_options {
  int derivative_states;     /* <= 0 for 40 */
  int include_catenary;
  int corrupt_bend_gradient; /* negative control */
} dernet_validate_options;

DERNET_API dernet_validate_options dernet_default_validate_options(void);

/* Runs the oracle suite. *count receives the number of checks. */
DERNET_API dernet_status dernet_validate(const dernet_validate_options* options, dernet_check* checks,
                                         size_t capacity, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* DERNET_DERNET_H_ */
