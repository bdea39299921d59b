// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/scenarios.hpp"

namespace dernet {

/// Lowercase hex SHA-1 of `data` framed as a git blob ("blob <n>\0" prefix),
/// so it matches `git hash-object`.
std::string git_blob_hash(const std::string& data);

/// Hash over the mesh text, the resolved config (path keys left out so the
/// hash does not depend on where files live) and the initial state file.
std::string content_hash(const NetMesh& mesh, const ScenarioConfig& config);

/// DERNET_THREADS, default 1. Throws InvalidConfigError for values that are
/// not positive integers.
int threads_from_env();

struct RunOptions {
  std::string out_dir = "out";
  double frame_interval = 0.01;  // s; <= 0 disables frames
  /// Called after every step.
  std::function<void(int step, double t, const StepReport& report)> progress;
};

struct RunSummary {
  std::string out_dir;
  std::string content_hash;
  int steps = 0;
  int frames = 0;
  double simulated_time = 0.0;
  double wall_time = 0.0;
  bool completed = false;
  StepReport last_step;
  std::string error;
};

/// Runs one scenario and writes manifest.json, config.txt, mesh.txt,
/// metrics.csv, the primary series, steps.csv, stress_final.csv and
/// frames/. The manifest is written before the first step and rewritten at
/// the end. On failure the manifest records the error and the exception is
/// rethrown after every output is flushed; `summary` then holds the last
/// step report.
RunSummary simulate(const ScenarioConfig& config, const NetMesh& mesh, const RunOptions& options);
RunSummary simulate_file(const std::string& config_path, const RunOptions& options);

/// File holding the scenario's headline series, e.g. "midpoint.csv".
std::string primary_series_file(ScenarioKind kind);

struct BenchCase {
  double side_length = 10.0;
  double grid_interval = 1.0;
  int subdivisions = 0;
};

struct BenchOptions {
  std::vector<BenchCase> meshes = {{5.0, 1.0, 0}, {10.0, 1.0, 0}, {10.0, 1.0, 1}, {10.0, 1.0, 2}, {10.0, 1.0, 5}};
  std::vector<double> time_steps = {0.01, 0.001};
  /// Simulated time per run is `steps` steps of the run's h.
  int steps = 100;
};

struct BenchRow {
  int nodes = 0;
  int stretch = 0;
  int bend = 0;
  double time_step = 0.0;
  int steps = 0;
  double simulated_time = 0.0;
  double wall_time = 0.0;
  double ratio = 0.0;  // wall / simulated
};

/// Vibration scenario timings, one row per mesh and time step.
std::vector<BenchRow> bench(const BenchOptions& options,
                            const std::function<void(const BenchRow&)>& on_row = {});

}  // namespace dernet
