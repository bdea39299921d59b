// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/run.hpp"

#include <Eigen/Core>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/config_file.hpp"
#include "core/error.hpp"
#include "core/frames.hpp"
#include "core/mesh_io.hpp"
#include "json.hpp"

namespace dernet {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorCode::io, fmt::format("write failed for '{}'", path.string()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes frames on a worker thread, in submission order.
class FrameWriter {
 public:
  explicit FrameWriter(fs::path dir) : dir_(std::move(dir)), worker_([this] { loop(); }) {}
  ~FrameWriter() { finish(); }

  /// Returns the file name relative to the output directory.
  std::string submit(int index, const State& state) {
    std::string name = fmt::format("frames/frame_{:06d}.csv", index);
    {
      std::lock_guard lock(mutex_);
      queue_.push_back({dir_ / fmt::format("frame_{:06d}.csv", index), state});
    }
    ready_.notify_one();
    return name;
  }

  /// Drains the queue and joins. Rethrows the first write error.
  void finish() {
    {
      std::lock_guard lock(mutex_);
      if (done_) return;
      done_ = true;
    }
    ready_.notify_one();
    worker_.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  struct Job {
    fs::path path;
    State state;
  };

  void loop() {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [&] { return done_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      if (error_) continue;
      try {
        auto out = open_output(job.path);
        write_frame(out, job.state);
        out.flush();
        if (!out) throw Error(ErrorCode::io, "write failed for " + job.path.string());
      } catch (...) {
        error_ = std::current_exception();
      }
    }
  }

  fs::path dir_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Job> queue_;
  bool done_ = false;
  std::exception_ptr error_;
  std::thread worker_;
};

const char* primary_metric(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::vibration:
      return "midpoint_deflection";
    case ScenarioKind::contact_drop:
      return "contacts";
    case ScenarioKind::fold:
      return "junction_offset";
    case ScenarioKind::shoot:
    case ScenarioKind::close:
      return "spread_area";
  }
  return "";
}

nlohmann::json report_json(const StepReport& r) {
  return {{"newton_iterations", r.newton_iterations}, {"residual_norm", r.residual_norm},
          {"linear_solves", r.linear_solves},         {"contact_passes", r.contact_passes},
          {"contacts", r.contacts},                   {"half_steps", r.half_steps}};
}

}  // namespace

std::string git_blob_hash(const std::string& data) {
  const std::string framed = fmt::format("blob {}", data.size()) + '\0' + data;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(framed.data(), framed.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw Error(ErrorCode::numerical, "SHA-1 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string content_hash(const NetMesh& mesh, const ScenarioConfig& config) {
  std::ostringstream text;
  write_mesh(text, mesh);
  std::istringstream lines(format_config(config));
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("mesh =", 0) == 0 || line.rfind("initial_state =", 0) == 0) continue;
    text << line << '\n';
  }
  if (!config.initial_state.empty()) text << read_file(config.initial_state);
  return git_blob_hash(text.str());
}

int threads_from_env() {
  const char* value = std::getenv("DERNET_THREADS");
  if (value == nullptr || *value == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    throw InvalidConfigError(fmt::format("DERNET_THREADS must be a positive integer (got '{}')", value));
  }
  return static_cast<int>(n);
}

std::string primary_series_file(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::vibration:
      return "midpoint.csv";
    case ScenarioKind::contact_drop:
      return "contacts.csv";
    case ScenarioKind::fold:
      return "junction_offset.csv";
    case ScenarioKind::shoot:
    case ScenarioKind::close:
      return "spread_area.csv";
  }
  return "series.csv";
}

RunSummary simulate(const ScenarioConfig& config, const NetMesh& mesh, const RunOptions& options) {
  const int threads = threads_from_env();
  Eigen::setNbThreads(threads);
  const auto start = Clock::now();
  const fs::path dir(options.out_dir);
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw Error(ErrorCode::io, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  // Stale frames from an earlier run would not be listed in the manifest.
  for (const auto& entry : fs::directory_iterator(dir / "frames")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".csv") fs::remove(entry.path());
  }

  RunSummary summary;
  summary.out_dir = dir.string();
  summary.content_hash = content_hash(mesh, config);

  const std::string primary = primary_series_file(config.kind);
  std::vector<std::string> files = {"manifest.json", "config.txt", "mesh.txt", "metrics.csv",
                                    primary, "steps.csv", "stress_final.csv"};
  write_text(dir / "config.txt", format_config(config));
  save_mesh(mesh, (dir / "mesh.txt").string());

  nlohmann::json manifest;
  manifest["dernet_version"] = "0.1.0";
  manifest["scenario"] = to_string(config.kind);
  manifest["content_hash"] = summary.content_hash;
  manifest["output_dir"] = fs::absolute(dir).lexically_normal().string();
  nlohmann::json resolved = nlohmann::json::object();
  {
    std::istringstream lines(format_config(config));
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find(" = ");
      resolved[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  manifest["config"] = resolved;
  const MeshCounts counts = mesh.counts();
  manifest["mesh"] = {{"nodes", counts.nodes}, {"stretch", counts.stretch}, {"bend", counts.bend},
                      {"junctions", mesh.junction_nodes.size()}};
  manifest["frame_interval"] = options.frame_interval;
  manifest["threads"] = threads;
  manifest["status"] = "running";
  manifest["files"] = files;
  manifest["frames"] = nlohmann::json::array();
  manifest["step_wall_time"] = nlohmann::json::array();
  auto write_manifest = [&] { write_text(dir / "manifest.json", manifest.dump(2) + "\n"); };
  write_manifest();

  auto metrics = open_output(dir / "metrics.csv");
  auto series = open_output(dir / primary);
  auto steps = open_output(dir / "steps.csv");
  const char* headline = primary_metric(config.kind);
  metrics << "t,name,value\n";
  series << "t," << headline << '\n';
  steps << "step,t,newton_iterations,residual_norm,linear_solves,contact_passes,contacts,half_steps,wall_time\n";

  FrameWriter frames(dir / "frames");
  std::vector<double> wall;
  std::exception_ptr failure;
  std::unique_ptr<Scenario> scenario;
  try {
    scenario = std::make_unique<Scenario>(config, mesh);
    int frame_index = 0;
    auto step_start = Clock::now();
    ScenarioObserver observer;
    observer.metric = [&](double t, std::string_view name, double value) {
      metrics << fmt::format("{:.12g},{},{:.17g}\n", t, name, value);
      if (name == headline) series << fmt::format("{:.12g},{:.17g}\n", t, value);
    };
    if (options.frame_interval > 0.0) {
      observer.frame = [&](double t, const State& state) {
        manifest["frames"].push_back({{"t", t}, {"file", frames.submit(frame_index++, state)}});
      };
    }
    observer.step = [&](int k, const State& state, const StepReport& r) {
      const double dt = seconds_since(step_start);
      wall.push_back(dt);
      steps << fmt::format("{},{:.12g},{},{:.6e},{},{},{},{},{:.6e}\n", k, state.t, r.newton_iterations,
                           r.residual_norm, r.linear_solves, r.contact_passes, r.contacts, r.half_steps ? 1 : 0,
                           dt);
      summary.steps = k;
      summary.simulated_time = state.t;
      summary.last_step = r;
      if (options.progress) options.progress(k, state.t, r);
      step_start = Clock::now();
    };
    scenario->run(observer, options.frame_interval);
    summary.completed = true;
  } catch (const Error& e) {
    summary.error = e.what();
    failure = std::current_exception();
  }

  if (scenario) {
    const Simulator& sim = scenario->simulator();
    const StressField stress = stress_field(sim.mesh(), sim.params(), sim.state().q, config.curvature);
    auto out = open_output(dir / "stress_final.csv");
    out << "elem_type,elem_id,sigma\n";
    for (std::size_t i = 0; i < stress.stretch.size(); ++i) out << fmt::format("stretch,{},{:.17g}\n", i, stress.stretch[i]);
    for (std::size_t i = 0; i < stress.bend.size(); ++i) out << fmt::format("bend,{},{:.17g}\n", i, stress.bend[i]);
    for (std::size_t i = 0; i < stress.edge_total.size(); ++i) {
      out << fmt::format("edge_total,{},{:.17g}\n", i, stress.edge_total[i]);
    }
  } else {
    write_text(dir / "stress_final.csv", "elem_type,elem_id,sigma\n");
  }
  metrics.close();
  series.close();
  steps.close();
  frames.finish();

  summary.frames = static_cast<int>(manifest["frames"].size());
  summary.wall_time = seconds_since(start);
  for (const auto& f : manifest["frames"]) manifest["files"].push_back(f["file"]);
  manifest["status"] = summary.completed ? "completed" : "failed";
  manifest["steps"] = summary.steps;
  manifest["simulated_time"] = summary.simulated_time;
  manifest["wall_time"] = summary.wall_time;
  manifest["step_wall_time"] = wall;
  manifest["last_step"] = report_json(summary.last_step);
  if (!summary.completed) manifest["error"] = summary.error;
  write_manifest();
  if (failure) std::rethrow_exception(failure);
  return summary;
}

RunSummary simulate_file(const std::string& config_path, const RunOptions& options) {
  const ScenarioConfig config = load_config(config_path);
  return simulate(config, scenario_mesh(config), options);
}

std::vector<BenchRow> bench(const BenchOptions& options, const std::function<void(const BenchRow&)>& on_row) {
  if (options.steps < 1) throw InvalidConfigError("bench steps must be >= 1");
  std::vector<BenchRow> rows;
  for (double h : options.time_steps) {
    for (const BenchCase& m : options.meshes) {
      ScenarioConfig c = ScenarioConfig::defaults(ScenarioKind::vibration);
      c.side_length = m.side_length;
      c.grid_interval = m.grid_interval;
      c.subdivisions = m.subdivisions;
      c.time_step = h;
      c.duration = h * options.steps;
      c.validate();
      NetMesh mesh = scenario_mesh(c);
      BenchRow row;
      const MeshCounts counts = mesh.counts();
      row.nodes = counts.nodes;
      row.stretch = counts.stretch;
      row.bend = counts.bend;
      row.time_step = h;
      Scenario scenario(c, std::move(mesh));
      const auto start = Clock::now();
      for (int k = 0; k < options.steps; ++k) scenario.step();
      row.wall_time = seconds_since(start);
      row.steps = options.steps;
      row.simulated_time = h * options.steps;
      row.ratio = row.wall_time / row.simulated_time;
      rows.push_back(row);
      if (on_row) on_row(row);
    }
  }
  return rows;
}

}  // namespace dernet
