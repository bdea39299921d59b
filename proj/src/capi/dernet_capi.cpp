// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "dernet/dernet.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "core/config_file.hpp"
#include "core/error.hpp"
#include "core/mesh_io.hpp"
#include "core/run.hpp"
#include "core/scenarios.hpp"
#include "core/validation.hpp"

struct dernet_mesh {
  dernet::NetMesh mesh;
};

struct dernet_scenario {
  std::unique_ptr<dernet::Scenario> scenario;
};

namespace {

thread_local std::string last_error;

dernet_status fail(dernet_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

dernet_status status_of(dernet::ErrorCode code) {
  const int value = static_cast<int>(code);
  return value >= DERNET_INVALID_ARGUMENT && value <= DERNET_SINGULARITY ? static_cast<dernet_status>(value)
                                                                          : DERNET_INTERNAL_ERROR;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
dernet_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return DERNET_OK;
  } catch (const dernet::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DERNET_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(DERNET_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(DERNET_INTERNAL_ERROR, "unknown exception");
  }
}

#define DERNET_REQUIRE(cond, what) \
  if (!(cond)) return fail(DERNET_INVALID_ARGUMENT, what)

dernet::MaterialParams material_of(const dernet_material* m) {
  const dernet_material d = m ? *m : dernet_default_material();
  return dernet::MaterialParams::make(d.young_modulus, d.rod_radius, d.density);
}

dernet_step_report report_of(const dernet::StepReport& r) {
  return {r.newton_iterations, r.residual_norm, r.linear_solves, r.contact_passes, r.contacts, r.half_steps ? 1 : 0};
}

void copy_text(char* dst, std::size_t size, const std::string& src) {
  const std::size_t n = std::min(size - 1, src.size());
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

}  // namespace

extern "C" {

const char* dernet_version(void) { return "0.1.0"; }

const char* dernet_status_string(dernet_status status) {
  switch (status) {
    case DERNET_OK:
      return "ok";
    case DERNET_INTERNAL_ERROR:
      return "internal error";
    default:
      break;
  }
  if (status >= DERNET_INVALID_ARGUMENT && status <= DERNET_SINGULARITY) {
    return dernet::to_string(static_cast<dernet::ErrorCode>(status));
  }
  return "unknown status";
}

const char* dernet_last_error(void) { return last_error.c_str(); }

dernet_material dernet_default_material(void) { return {1.0e9, 1.0e-3, 1000.0}; }

dernet_status dernet_mesh_generate_web(double side_length, double grid_interval, int subdivisions,
                                       const dernet_material* material, dernet_mesh** out) {
  DERNET_REQUIRE(out, "out is NULL");
  return guarded([&] {
    auto m = std::make_unique<dernet_mesh>();
    m->mesh = dernet::generate_hexagonal_web(side_length, grid_interval, subdivisions,
                                             dernet::WebLayout::rings_and_radials, material_of(material));
    *out = m.release();
  });
}

dernet_status dernet_mesh_generate_rod(double length, int nodes, const dernet_material* material,
                                       dernet_mesh** out) {
  DERNET_REQUIRE(out, "out is NULL");
  return guarded([&] {
    auto m = std::make_unique<dernet_mesh>();
    m->mesh = dernet::generate_rod(length, nodes, material_of(material));
    *out = m.release();
  });
}

dernet_status dernet_mesh_load(const char* path, const dernet_material* material, dernet_mesh** out) {
  DERNET_REQUIRE(path && out, "path or out is NULL");
  return guarded([&] {
    auto m = std::make_unique<dernet_mesh>();
    m->mesh = dernet::load_mesh(path, material_of(material));
    *out = m.release();
  });
}

dernet_status dernet_mesh_save(const dernet_mesh* mesh, const char* path) {
  DERNET_REQUIRE(mesh && path, "mesh or path is NULL");
  return guarded([&] { dernet::save_mesh(mesh->mesh, path); });
}

dernet_status dernet_mesh_get_counts(const dernet_mesh* mesh, dernet_mesh_counts* out) {
  DERNET_REQUIRE(mesh && out, "mesh or out is NULL");
  const dernet::MeshCounts c = mesh->mesh.counts();
  *out = {c.nodes, c.stretch, c.bend, static_cast<int>(mesh->mesh.junction_nodes.size()),
          static_cast<int>(mesh->mesh.corner_nodes.size())};
  return DERNET_OK;
}

dernet_status dernet_mesh_get_positions(const dernet_mesh* mesh, double* xyz, size_t capacity) {
  DERNET_REQUIRE(mesh && xyz, "mesh or xyz is NULL");
  const std::size_t need = 3 * mesh->mesh.nodes.size();
  DERNET_REQUIRE(capacity >= need, "buffer too small");
  for (std::size_t i = 0; i < mesh->mesh.nodes.size(); ++i) {
    for (int d = 0; d < 3; ++d) xyz[3 * i + d] = mesh->mesh.nodes[i][d];
  }
  return DERNET_OK;
}

void dernet_mesh_free(dernet_mesh* mesh) { delete mesh; }

dernet_run_options dernet_default_run_options(void) { return {nullptr, 0.01, nullptr, nullptr}; }

dernet_status dernet_simulate(const char* config_path, const dernet_run_options* options,
                              dernet_run_summary* summary) {
  DERNET_REQUIRE(config_path, "config_path is NULL");
  const dernet_run_options o = options ? *options : dernet_default_run_options();
  dernet::RunOptions run;
  run.out_dir = o.out_dir ? o.out_dir : "out";
  run.frame_interval = o.frame_interval;
  dernet_run_summary partial{};
  run.progress = [&](int step, double t, const dernet::StepReport& r) {
    partial.steps = step;
    partial.simulated_time = t;
    partial.last_step = report_of(r);
    if (o.progress) {
      const dernet_step_report c = partial.last_step;
      o.progress(o.user, step, t, &c);
    }
  };
  const dernet_status status = guarded([&] {
    const dernet::RunSummary s = dernet::simulate_file(config_path, run);
    copy_text(partial.content_hash, sizeof partial.content_hash, s.content_hash);
    partial.steps = s.steps;
    partial.frames = s.frames;
    partial.simulated_time = s.simulated_time;
    partial.wall_time = s.wall_time;
    partial.completed = s.completed ? 1 : 0;
    partial.last_step = report_of(s.last_step);
  });
  if (summary) *summary = partial;
  return status;
}

dernet_status dernet_scenario_load(const char* config_path, dernet_scenario** out) {
  DERNET_REQUIRE(config_path && out, "config_path or out is NULL");
  return guarded([&] {
    const dernet::ScenarioConfig config = dernet::load_config(config_path);
    auto s = std::make_unique<dernet_scenario>();
    s->scenario = std::make_unique<dernet::Scenario>(config, dernet::scenario_mesh(config));
    *out = s.release();
  });
}

dernet_status dernet_scenario_step(dernet_scenario* scenario, dernet_step_report* report) {
  DERNET_REQUIRE(scenario, "scenario is NULL");
  return guarded([&] {
    const dernet::StepReport r = scenario->scenario->step();
    if (report) *report = report_of(r);
  });
}

dernet_status dernet_scenario_time(const dernet_scenario* scenario, double* t) {
  DERNET_REQUIRE(scenario && t, "scenario or t is NULL");
  *t = scenario->scenario->time();
  return DERNET_OK;
}

dernet_status dernet_scenario_node_count(const dernet_scenario* scenario, int* nodes) {
  DERNET_REQUIRE(scenario && nodes, "scenario or nodes is NULL");
  *nodes = scenario->scenario->simulator().state().node_count();
  return DERNET_OK;
}

dernet_status dernet_scenario_get_state(const dernet_scenario* scenario, double* positions, double* velocities,
                                        size_t capacity) {
  DERNET_REQUIRE(scenario && positions, "scenario or positions is NULL");
  const dernet::State& s = scenario->scenario->simulator().state();
  const auto n = static_cast<std::size_t>(s.q.size());
  DERNET_REQUIRE(capacity >= n, "buffer too small");
  std::copy(s.q.data(), s.q.data() + n, positions);
  if (velocities) std::copy(s.v.data(), s.v.data() + n, velocities);
  return DERNET_OK;
}

dernet_status dernet_scenario_metric(const dernet_scenario* scenario, const char* name, double* value) {
  DERNET_REQUIRE(scenario && name && value, "scenario, name or value is NULL");
  return guarded([&] {
    for (const auto& [key, v] : scenario->scenario->metrics()) {
      if (key == name) {
        *value = v;
        return;
      }
    }
    throw dernet::Error(dernet::ErrorCode::invalid_argument, std::string("no metric named '") + name + "'");
  });
}

void dernet_scenario_free(dernet_scenario* scenario) { delete scenario; }

dernet_status dernet_bench(const dernet_bench_options* options, dernet_bench_row* rows, size_t capacity,
                           size_t* count) {
  DERNET_REQUIRE(count, "count is NULL");
  DERNET_REQUIRE(rows || capacity == 0, "rows is NULL");
  *count = 0;
  dernet::BenchOptions b;
  const dernet_bench_options o = options ? *options : dernet_bench_options{};
  if (o.meshes && o.mesh_count > 0) {
    b.meshes.clear();
    for (std::size_t i = 0; i < o.mesh_count; ++i) {
      b.meshes.push_back({o.meshes[i].side_length, o.meshes[i].grid_interval, o.meshes[i].subdivisions});
    }
  }
  if (o.time_steps && o.time_step_count > 0) b.time_steps.assign(o.time_steps, o.time_steps + o.time_step_count);
  if (o.steps > 0) b.steps = o.steps;
  return guarded([&] {
    dernet::bench(b, [&](const dernet::BenchRow& r) {
      const dernet_bench_row row{r.nodes, r.stretch, r.bend, r.time_step, r.steps, r.simulated_time, r.wall_time,
                                 r.ratio};
      if (*count < capacity) rows[*count] = row;
      ++*count;
      if (o.on_row) o.on_row(o.user, &row);
    });
  });
}

dernet_validate_options dernet_default_validate_options(void) { return {40, 1, 0}; }

dernet_status dernet_validate(const dernet_validate_options* options, dernet_check* checks, size_t capacity,
                              size_t* count) {
  DERNET_REQUIRE(count, "count is NULL");
  DERNET_REQUIRE(checks || capacity == 0, "checks is NULL");
  const dernet_validate_options o = options ? *options : dernet_default_validate_options();
  dernet::validation::SuiteOptions s;
  s.derivative_states = o.derivative_states > 0 ? o.derivative_states : 40;
  s.include_catenary = o.include_catenary != 0;
  s.corrupt_bend_gradient = o.corrupt_bend_gradient != 0;
  return guarded([&] {
    const auto results = dernet::validation::run_suite(s);
    *count = results.size();
    for (std::size_t i = 0; i < results.size() && i < capacity; ++i) {
      dernet_check& c = checks[i];
      copy_text(c.name, sizeof c.name, results[i].name);
      copy_text(c.detail, sizeof c.detail, results[i].detail);
      c.measured = results[i].measured;
      c.tolerance = results[i].tolerance;
      c.pass = results[i].pass ? 1 : 0;
    }
  });
}

}  // extern "C"
