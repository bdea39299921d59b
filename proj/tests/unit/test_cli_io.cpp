// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "core/config_file.hpp"
#include "core/error.hpp"
#include "core/mesh_io.hpp"
#include "core/run.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace dernet;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text, const std::string& base = ".") {
  std::istringstream in(text);
  return read_config(in, "test.cfg", base);
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dernet_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ScenarioConfig tiny_vibration() {
  return parse(
      "scenario = vibration\n"
      "side_length = 2\n"
      "grid_interval = 1\n"
      "subdivisions = 1\n"
      "duration = 0.2\n"
      "metric_interval = 0.05\n");
}

}  // namespace

TEST_CASE("config grammar") {
  const auto c = parse(
      "# comment line\n"
      "scenario = contact-drop   # trailing comment\n"
      "\n"
      "  mu=0.5\n"
      "gravity = 0, 0, -9.81\n"
      "scheme = newmark\n"
      "trigger = off\n");
  CHECK(c.kind == ScenarioKind::contact_drop);
  CHECK(c.damping == 0.5);
  CHECK(c.gravity.z() == -9.81);
  CHECK(c.scheme == Scheme::newmark_beta);
  CHECK_FALSE(c.trigger_enabled);
  CHECK(c.duration == 8.0);  // kind default
}

TEST_CASE("config errors name the line") {
  CHECK(error_line("scenario = fold\nbogus = 1\n") == 2);
  CHECK(error_line("scenario = fold\nmu 1\n") == 2);
  CHECK(error_line("scenario = fold\nmu = 1\nmu = 2\n") == 3);
  CHECK(error_line("\n\nscenario = spin\n") == 3);
  CHECK(error_line("scenario = fold\nh = fast\n") == 2);
  CHECK(error_line("scenario = fold\ngravity = 1 2\n") == 2);
  CHECK(error_line("scenario = fold\nscheme = rk4\n") == 2);
  CHECK_THROWS_AS(parse("mu = 1\n"), InvalidConfigError);
  CHECK_THROWS_AS(parse("scenario = fold\nh = -1\n"), InvalidConfigError);
  CHECK_THROWS_AS(parse("scenario = shoot\nshoot_angle = 90\n"), InvalidConfigError);
}

TEST_CASE("relative paths resolve against the config directory") {
  const auto c = parse("scenario = vibration\nmesh = meshes/net.txt\ninitial_state = /abs/f.csv\n", "/data/run");
  CHECK(c.mesh_path == "/data/run/meshes/net.txt");
  CHECK(c.initial_state == "/abs/f.csv");
}

TEST_CASE("resolved config round trips") {
  for (auto kind : {ScenarioKind::vibration, ScenarioKind::contact_drop, ScenarioKind::fold, ScenarioKind::shoot,
                    ScenarioKind::close}) {
    ScenarioConfig c = ScenarioConfig::defaults(kind);
    c.damping = 0.1 + 1e-16;
    c.destination = Vec3(0.1, -2.0 / 3.0, 4);
    const std::string text = format_config(c);
    const std::string again = format_config(parse(text));
    CHECK(text == again);
  }
  CHECK(config_keys().front() == "scenario");
  CHECK(config_keys().size() == 35);
}

TEST_CASE("missing config file is an io error") {
  try {
    load_config("/nonexistent/run.cfg");
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("git blob hash matches git hash-object") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("content hash is stable and sensitive") {
  ScenarioConfig c = tiny_vibration();
  const NetMesh m = scenario_mesh(c);
  const std::string a = content_hash(m, c);
  CHECK(a == content_hash(m, c));
  CHECK(a.size() == 40);
  ScenarioConfig moved = c;
  moved.mesh_path = "";  // paths do not enter the hash
  CHECK(content_hash(m, moved) == a);
  ScenarioConfig other = c;
  other.damping = 0.2;
  CHECK(content_hash(m, other) != a);
}

TEST_CASE("DERNET_THREADS") {
  ::unsetenv("DERNET_THREADS");
  CHECK(threads_from_env() == 1);
  ::setenv("DERNET_THREADS", "3", 1);
  CHECK(threads_from_env() == 3);
  ::setenv("DERNET_THREADS", "0", 1);
  CHECK_THROWS_AS(threads_from_env(), InvalidConfigError);
  ::setenv("DERNET_THREADS", "two", 1);
  CHECK_THROWS_AS(threads_from_env(), InvalidConfigError);
  ::unsetenv("DERNET_THREADS");
}

TEST_CASE("simulate writes a complete, deterministic run") {
  const ScenarioConfig c = tiny_vibration();
  const NetMesh m = scenario_mesh(c);
  RunOptions o;
  o.out_dir = scratch("run_a").string();
  o.frame_interval = 0.05;
  int progress = 0;
  o.progress = [&](int, double, const StepReport&) { ++progress; };
  const RunSummary s = simulate(c, m, o);
  CHECK(s.completed);
  CHECK(s.steps == 20);
  CHECK(progress == 20);
  CHECK(s.frames == 5);

  const fs::path dir(o.out_dir);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "completed");
  CHECK(manifest["content_hash"] == s.content_hash);
  CHECK(manifest["step_wall_time"].size() == 20);
  CHECK(manifest["config"]["scenario"] == "vibration");

  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f.get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) present.insert(fs::relative(e.path(), dir).string());
  }
  CHECK(listed == present);
  CHECK(listed.count("midpoint.csv") == 1);
  CHECK(listed.count("frames/frame_000004.csv") == 1);

  const std::string midpoint = slurp(dir / "midpoint.csv");
  CHECK(midpoint.rfind("t,midpoint_deflection\n0,0\n", 0) == 0);
  CHECK(slurp(dir / "stress_final.csv").rfind("elem_type,elem_id,sigma\nstretch,0,", 0) == 0);

  RunOptions again = o;
  again.out_dir = scratch("run_b").string();
  simulate(c, m, again);
  CHECK(slurp(dir / "metrics.csv") == slurp(fs::path(again.out_dir) / "metrics.csv"));
  CHECK(slurp(dir / "frames/frame_000004.csv") == slurp(fs::path(again.out_dir) / "frames/frame_000004.csv"));
}

TEST_CASE("rerun into the same directory leaves no stale frames") {
  ScenarioConfig c = tiny_vibration();
  const NetMesh m = scenario_mesh(c);
  RunOptions o;
  o.out_dir = scratch("rerun").string();
  o.frame_interval = 0.01;
  simulate(c, m, o);
  o.frame_interval = 0.1;
  const auto s = simulate(c, m, o);
  int count = 0;
  for (const auto& e : fs::directory_iterator(fs::path(o.out_dir) / "frames")) count += e.is_regular_file();
  CHECK(count == s.frames);
  CHECK(s.frames == 3);
}

TEST_CASE("nonconvergence is recorded and rethrown") {
  ScenarioConfig c = tiny_vibration();
  c.tolerance = 1e-300;
  const NetMesh m = scenario_mesh(c);
  RunOptions o;
  o.out_dir = scratch("fail").string();
  CHECK_THROWS_AS(simulate(c, m, o), NonConvergenceError);
  const auto manifest = nlohmann::json::parse(slurp(fs::path(o.out_dir) / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["error"].get<std::string>().find("vibration") != std::string::npos);
}

TEST_CASE("missing mesh names the path") {
  std::istringstream in("scenario = vibration\nmesh = nowhere/net.txt\n");
  const auto c = read_config(in, "x.cfg", "/tmp");
  try {
    scenario_mesh(c);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("/tmp/nowhere/net.txt") != std::string::npos);
  }
}

TEST_CASE("bench rows") {
  BenchOptions o;
  o.meshes = {{2.0, 1.0, 0}, {2.0, 1.0, 1}};
  o.time_steps = {0.01};
  o.steps = 3;
  int seen = 0;
  const auto rows = bench(o, [&](const BenchRow&) { ++seen; });
  REQUIRE(rows.size() == 2);
  CHECK(seen == 2);
  CHECK(rows[0].nodes < rows[1].nodes);
  for (const auto& r : rows) {
    CHECK(r.simulated_time == doctest::Approx(0.03));
    CHECK(r.ratio == doctest::Approx(r.wall_time / r.simulated_time));
  }
}

TEST_CASE("shipped configs parse") {
  int count = 0;
  for (const auto& e : fs::directory_iterator(fs::path(DERNET_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".cfg") continue;
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
    ++count;
  }
  CHECK(count == 5);
}
