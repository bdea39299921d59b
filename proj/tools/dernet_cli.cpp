// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the simulator only through the C API.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dernet/dernet.h"
#include "json.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNonconvergence = 3;

int exit_code(dernet_status status) {
  switch (status) {
    case DERNET_OK:
      return 0;
    case DERNET_INVALID_ARGUMENT:
    case DERNET_INVALID_MESH:
    case DERNET_INVALID_CONFIG:
    case DERNET_PARSE_ERROR:
    case DERNET_IO_ERROR:
      return kExitUsage;
    case DERNET_NONCONVERGENCE:
      return kExitNonconvergence;
    default:
      return kExitFailure;
  }
}

int report_failure(dernet_status status) {
  std::fprintf(stderr, "dernet: %s: %s\n", dernet_status_string(status), dernet_last_error());
  return exit_code(status);
}

void print_step(std::FILE* out, const dernet_step_report& r) {
  std::fprintf(out, "  newton iterations %d, residual %.3e N, linear solves %d, contact passes %d, contacts %d%s\n",
               r.newton_iterations, r.residual_norm, r.linear_solves, r.contact_passes, r.contacts,
               r.half_steps ? ", split step" : "");
}

struct SimulateArgs {
  std::string config;
  std::string out = "out";
  double frames_every = 0.01;
  bool quiet = false;
};

struct Progress {
  bool quiet = false;
  std::chrono::steady_clock::time_point last = std::chrono::steady_clock::now();
};

int run_simulate(const SimulateArgs& a) {
  Progress progress{a.quiet};
  dernet_run_options o = dernet_default_run_options();
  o.out_dir = a.out.c_str();
  o.frame_interval = a.frames_every;
  o.user = &progress;
  o.progress = [](void* user, int step, double t, const dernet_step_report* r) {
    auto* p = static_cast<Progress*>(user);
    const auto now = std::chrono::steady_clock::now();
    if (p->quiet || now - p->last < std::chrono::seconds(1)) return;
    p->last = now;
    std::fprintf(stderr, "step %d  t = %.4f s  newton %d  contacts %d\n", step, t, r->newton_iterations,
                 r->contacts);
  };
  dernet_run_summary s{};
  const dernet_status status = dernet_simulate(a.config.c_str(), &o, &s);
  if (status != DERNET_OK) {
    const int code = report_failure(status);
    if (status == DERNET_NONCONVERGENCE) {
      std::fprintf(stderr, "last accepted step %d at t = %.6g s:\n", s.steps, s.simulated_time);
      print_step(stderr, s.last_step);
    }
    return code;
  }
  if (!a.quiet) {
    std::printf("completed %d steps, %.6g s simulated in %.3f s wall (ratio %.3f)\n", s.steps, s.simulated_time,
                s.wall_time, s.wall_time / s.simulated_time);
    std::printf("frames %d, content hash %s, output %s\n", s.frames, s.content_hash, a.out.c_str());
  }
  return 0;
}

struct BenchArgs {
  std::vector<std::string> meshes;
  std::vector<double> time_steps = {0.01, 0.001};
  int steps = 100;
  std::string csv;
};

int run_bench(const BenchArgs& a) {
  std::vector<dernet_bench_mesh> meshes;
  for (const std::string& m : a.meshes) {
    dernet_bench_mesh b{};
    if (std::sscanf(m.c_str(), "%lf,%lf,%d", &b.side_length, &b.grid_interval, &b.subdivisions) != 3) {
      std::fprintf(stderr, "dernet: --mesh expects side,grid,subdivisions (got '%s')\n", m.c_str());
      return kExitUsage;
    }
    meshes.push_back(b);
  }
  dernet_bench_options o{};
  o.meshes = meshes.empty() ? nullptr : meshes.data();
  o.mesh_count = meshes.size();
  o.time_steps = a.time_steps.data();
  o.time_step_count = a.time_steps.size();
  o.steps = a.steps;
  o.on_row = [](void*, const dernet_bench_row* r) {
    std::printf("%8d %8d %8d %10.4g %7d %10.4g %10.4f %10.4f\n", r->nodes, r->stretch, r->bend, r->time_step,
                r->steps, r->simulated_time, r->wall_time, r->ratio);
    std::fflush(stdout);
  };
  std::printf("%8s %8s %8s %10s %7s %10s %10s %10s\n", "N", "N_s", "N_b", "h", "steps", "sim_s", "wall_s", "ratio");
  std::vector<dernet_bench_row> rows(64);
  size_t count = 0;
  const dernet_status status = dernet_bench(&o, rows.data(), rows.size(), &count);
  if (status != DERNET_OK) return report_failure(status);
  rows.resize(std::min(count, rows.size()));

  for (double h : a.time_steps) {
    bool monotone = true;
    double previous = -1.0;
    int previous_n = -1;
    for (const auto& r : rows) {
      if (r.time_step != h) continue;
      if (r.nodes >= previous_n && r.ratio < previous) monotone = false;
      previous = r.ratio;
      previous_n = r.nodes;
    }
    std::printf("h = %g: ratio non-decreasing in N: %s\n", h, monotone ? "yes" : "no");
  }
  for (const auto& r : rows) {
    if (r.time_step == 0.01 && r.nodes >= 800 && r.nodes <= 1200) {
      std::printf("N = %d, h = 0.01: ratio %.3f (%s real time)\n", r.nodes, r.ratio,
                  r.ratio <= 1.0 ? "within" : "slower than");
    }
  }
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) {
      std::fprintf(stderr, "dernet: cannot write '%s'\n", a.csv.c_str());
      return kExitUsage;
    }
    out << "nodes,stretch,bend,h,steps,simulated_time,wall_time,ratio\n";
    for (const auto& r : rows) {
      out << r.nodes << ',' << r.stretch << ',' << r.bend << ',' << r.time_step << ',' << r.steps << ','
          << r.simulated_time << ',' << r.wall_time << ',' << r.ratio << '\n';
    }
  }
  return 0;
}

struct ValidateArgs {
  int states = 40;
  bool no_catenary = false;
  bool corrupt = false;
  bool json = false;
};

int run_validate(const ValidateArgs& a) {
  dernet_validate_options o = dernet_default_validate_options();
  o.derivative_states = a.states;
  o.include_catenary = a.no_catenary ? 0 : 1;
  o.corrupt_bend_gradient = a.corrupt ? 1 : 0;
  std::vector<dernet_check> checks(32);
  size_t count = 0;
  const dernet_status status = dernet_validate(&o, checks.data(), checks.size(), &count);
  if (status != DERNET_OK) return report_failure(status);
  checks.resize(std::min(count, checks.size()));
  bool all = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    if (a.json) {
      report.push_back({{"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance},
                        {"pass", c.pass != 0}, {"detail", c.detail}});
    } else {
      std::printf("%s %-30s measured %.3e  tolerance %.1e  %s\n", c.pass ? "PASS" : "FAIL", c.name, c.measured,
                  c.tolerance, c.detail);
    }
  }
  if (a.json) std::printf("%s\n", report.dump(2).c_str());
  if (!all) std::fprintf(stderr, "dernet: validation failed\n");
  return all ? 0 : kExitFailure;
}

struct MeshArgs {
  double side = 10.0;
  double grid = 1.0;
  int subdivisions = 5;
  double rod_length = 0.0;
  int rod_nodes = 0;
  std::string output;
  std::string input;
};

void print_counts(const dernet_mesh_counts& c) {
  std::printf("nodes %d, stretch %d, bend %d, junctions %d, corners %d\n", c.nodes, c.stretch, c.bend, c.junctions,
              c.corners);
}

int run_mesh_generate(const MeshArgs& a) {
  dernet_mesh* mesh = nullptr;
  dernet_status status = a.rod_nodes > 0 ? dernet_mesh_generate_rod(a.rod_length, a.rod_nodes, nullptr, &mesh)
                                         : dernet_mesh_generate_web(a.side, a.grid, a.subdivisions, nullptr, &mesh);
  if (status != DERNET_OK) return report_failure(status);
  dernet_mesh_counts c{};
  dernet_mesh_get_counts(mesh, &c);
  status = dernet_mesh_save(mesh, a.output.c_str());
  dernet_mesh_free(mesh);
  if (status != DERNET_OK) return report_failure(status);
  print_counts(c);
  return 0;
}

int run_mesh_info(const MeshArgs& a) {
  dernet_mesh* mesh = nullptr;
  const dernet_status status = dernet_mesh_load(a.input.c_str(), nullptr, &mesh);
  if (status != DERNET_OK) return report_failure(status);
  dernet_mesh_counts c{};
  dernet_mesh_get_counts(mesh, &c);
  dernet_mesh_free(mesh);
  print_counts(c);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dernet: discrete elastic-net dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dernet_version()));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario config and write its outputs");
  simulate->add_option("config", sim.config, "Scenario config file")->required();
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--frames-every", sim.frames_every, "Frame interval in simulated seconds (0 disables)")
      ->capture_default_str();
  simulate->add_flag("--quiet", sim.quiet, "Only report errors");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the vibration scenario over mesh sizes");
  bench_cmd->add_option("--mesh", bench.meshes, "side,grid,subdivisions (repeatable)");
  bench_cmd->add_option("--dt", bench.time_steps, "Time steps (s)")->capture_default_str();
  bench_cmd->add_option("--steps", bench.steps, "Steps per run")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--csv", bench.csv, "Also write the table as CSV");

  ValidateArgs val;
  auto* validate = app.add_subcommand("validate", "Run the oracle checks");
  validate->add_option("--states", val.states, "Random states for derivative checks")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  validate->add_flag("--no-catenary", val.no_catenary, "Skip the catenary relaxations");
  validate->add_flag("--corrupt-bend-gradient", val.corrupt, "Negative control: must fail");
  validate->add_flag("--json", val.json, "Machine-readable output");

  MeshArgs mesh;
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or inspect meshes");
  mesh_cmd->require_subcommand(1);
  auto* generate = mesh_cmd->add_subcommand("generate", "Write a generated web or rod");
  generate->add_option("--side", mesh.side, "Hexagon side length (m)")->capture_default_str();
  generate->add_option("--grid", mesh.grid, "Grid interval (m)")->capture_default_str();
  generate->add_option("--subdivisions", mesh.subdivisions, "Elements per cell edge")->capture_default_str();
  generate->add_option("--rod-length", mesh.rod_length, "Generate a rod of this length instead");
  generate->add_option("--rod-nodes", mesh.rod_nodes, "Node count of the rod");
  generate->add_option("-o,--output", mesh.output, "Mesh file")->required();
  auto* info = mesh_cmd->add_subcommand("info", "Print element counts of a mesh file");
  info->add_option("mesh", mesh.input, "Mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*simulate) return run_simulate(sim);
  if (*bench_cmd) return run_bench(bench);
  if (*validate) return run_validate(val);
  if (*generate) return run_mesh_generate(mesh);
  if (*info) return run_mesh_info(mesh);
  return kExitUsage;
}
