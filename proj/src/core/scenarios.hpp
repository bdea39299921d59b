// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/simulator.hpp"

namespace dernet {

enum class ScenarioKind { vibration, contact_drop, fold, shoot, close };

const char* to_string(ScenarioKind kind);
/// Accepts `vibration`, `contact-drop`, `fold`, `shoot`, `close`.
ScenarioKind parse_scenario_kind(std::string_view text);

/// Which nodes of a bend triple must have left the bag before the element
/// carries bending energy.
enum class ActivationRule { all_nodes, any_node };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::vibration;

  // Geometry: a generated web unless `mesh_path` is set.
  std::string mesh_path;
  double side_length = 10.0;
  double grid_interval = 1.0;
  int subdivisions = 5;

  double young_modulus = 1.0e9;
  double rod_radius = 1.0e-3;
  double density = 1000.0;

  Vec3 gravity = Vec3(0, 0, -1000.0);
  double damping = 0.1;
  double duration = 1.0;
  double time_step = 0.01;
  double tolerance = 1e-4;
  Scheme scheme = Scheme::implicit_euler;
  double beta = 0.5;
  CurvatureModel curvature = CurvatureModel::modified;
  VelocityReset velocity_reset = VelocityReset::full;
  int max_contact_passes = 20;
  double metric_interval = 0.01;

  // contact-drop
  std::string surface = "hemisphere(4)";
  double start_height = 5.0;

  // fold
  double fold_speed = 1.0;
  double target_scale = 0.001;
  double fold_settle = 0.5;  // extra time after the last junction arrives

  // shoot / close
  std::string initial_state;  // frame CSV; folds first when empty
  double corner_mass = 5.0;
  double shoot_speed = 20.0;
  double shoot_angle = 45.0;  // degrees from the flight axis
  ActivationRule activation = ActivationRule::all_nodes;

  // close
  double sphere_radius = 3.0;
  double standoff = 10.0;
  double close_speed = 10.0;
  Vec3 destination = Vec3(0, 0, 4);
  double trigger_time = 0.9;
  bool trigger_enabled = true;

  /// Table defaults for one kind (gravity, damping, duration, surface).
  static ScenarioConfig defaults(ScenarioKind kind);

  MaterialParams material() const;
  IntegratorConfig integrator() const;
  /// Throws InvalidConfigError naming the offending key.
  void validate() const;
};

/// Straight-line path at constant speed from `start_time`, then hold.
struct PrescribedMotion {
  int node = 0;
  Vec3 start = Vec3::Zero();
  Vec3 target = Vec3::Zero();
  double speed = 1.0;
  double start_time = 0.0;

  Vec3 position(double t) const;
  double arrival_time() const;
};

struct StressField {
  std::vector<double> stretch;  // Pa, per stretch element
  std::vector<double> bend;     // Pa, per bend element (0 when inactive)
  /// Per stretch element: its axial stress plus the mean bending stress of
  /// the bend elements that share the edge.
  std::vector<double> edge_total;
};

StressField stress_field(const NetMesh& mesh, const MaterialParams& params,
                         const Eigen::VectorXd& q, CurvatureModel curvature = CurvatureModel::modified);

/// Shoelace area of the corners projected along `axis` (corners in azimuthal
/// order).
double spread_area(const Eigen::VectorXd& q, const std::vector<int>& corners,
                   const Vec3& axis = Vec3::UnitZ());

/// Builds the mesh a config asks for (generated or loaded).
NetMesh scenario_mesh(const ScenarioConfig& config);

/// Receives the time series and frames of a run. Any member may be empty.
struct ScenarioObserver {
  std::function<void(double t, std::string_view name, double value)> metric;
  std::function<void(double t, const State& state)> frame;
  std::function<void(int step, const State& state, const StepReport& report)> step;
};

/// A configured scenario: mesh, boundary conditions and schedule.
class Scenario {
 public:
  /// Shoot and close fold `mesh` first unless `initial_state` is set.
  Scenario(const ScenarioConfig& config, NetMesh mesh);
  ~Scenario();

  const ScenarioConfig& config() const { return config_; }
  Simulator& simulator() { return *sim_; }
  const Simulator& simulator() const { return *sim_; }

  /// Steps until `duration`. Frames are emitted every `frame_interval`
  /// seconds (none when <= 0), metrics every `metric_interval`.
  void run(const ScenarioObserver& observer, double frame_interval = 0.0);

  /// One step including the schedule hooks.
  StepReport step();
  double time() const { return sim_->state().t; }

  /// Named metrics at the current state.
  std::vector<std::pair<std::string, double>> metrics() const;

  int center() const { return center_; }
  std::optional<double> first_contact_time() const { return first_contact_; }
  const std::vector<PrescribedMotion>& motions() const { return motions_; }
  int active_bends() const;

 private:
  void setup_vibration();
  void setup_drop();
  void setup_fold();
  void setup_flight(const Eigen::VectorXd& folded);
  void before_step();
  void after_step();
  void prescribe(const PrescribedMotion& motion);

  ScenarioConfig config_;
  std::unique_ptr<Simulator> sim_;
  std::vector<PrescribedMotion> motions_;
  std::vector<char> ever_active_;
  Eigen::VectorXd initial_q_;
  int center_ = 0;
  double bag_z_ = 0.0;
  double axis_sign_ = 1.0;  // flight direction along z
  bool triggered_ = false;
  std::optional<double> first_contact_;
};

/// Fold `mesh` under the given config and return the final positions.
Eigen::VectorXd fold_positions(const ScenarioConfig& config, const NetMesh& mesh);

}  // namespace dernet
