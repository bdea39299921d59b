// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "core/elastic_model.hpp"
#include "core/error.hpp"
#include "core/net_topology.hpp"

namespace dernet {

enum class Scheme { implicit_euler, newmark_beta };

/// How the Newton residual is measured against `newton_tolerance`.
enum class ResidualNorm {
  /// ||E|| / h^2 over free DOFs, i.e. the out-of-balance force in N.
  force,
  /// ||E|| over free DOFs in N s^2.
  raw,
};

struct IntegratorConfig {
  double time_step = 0.01;  // s
  Scheme scheme = Scheme::implicit_euler;
  double beta = 0.5;
  double newton_tolerance = 1e-4;
  ResidualNorm residual_norm = ResidualNorm::force;
  int max_newton_iterations = 50;
  double damping = 0.0;  // 1/s
  Vec3 gravity = Vec3::Zero();
  /// Retry a failed step as two half steps before giving up.
  bool retry_half_step = true;
  /// How many times a failing step may be halved again.
  int max_step_halvings = 4;
  /// Backtrack Newton steps that increase the residual norm. Used only when
  /// plain Newton fails on a step: the backtracking can settle on unstable
  /// equilibria (a crushed straight thread) that plain Newton steps past.
  bool line_search = true;

  /// Throws InvalidConfigError on out-of-range values.
  void validate() const;

  /// Weight of forces at t_{k+1} in the residual.
  double weight_new() const { return scheme == Scheme::newmark_beta ? beta * beta : 1.0; }
  /// Weight of forces at t_k.
  double weight_old() const { return scheme == Scheme::newmark_beta ? beta * (1.0 - beta) : 0.0; }
  /// d(velocity_{k+1}) / d(delta q) times h.
  double velocity_gain() const { return scheme == Scheme::newmark_beta ? 1.0 / beta : 1.0; }
};

/// Positions, velocities and time of all nodes.
struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd v;
  double t = 0.0;

  static State at_rest(const NetMesh& mesh);
  int node_count() const { return static_cast<int>(q.size() / 3); }
  Vec3 position(int node) const { return q.segment<3>(3 * node); }
  Vec3 velocity(int node) const { return v.segment<3>(3 * node); }
};

using PositionSchedule = std::function<Vec3(double)>;

/// Dirichlet data. Every DOF is free, fixed or part of a prescribed node.
class DofConstraints {
 public:
  void fix_dof(int dof);
  void fix_node(int node);
  void prescribe(int node, PositionSchedule schedule);
  void release(int node);
  void clear();

  bool is_fixed(int dof) const;
  bool is_prescribed(int node) const { return prescribed_.count(node) != 0; }
  /// True when any DOF of the node is fixed or prescribed.
  bool touches(int node) const;

  const std::vector<int>& fixed_dofs() const { return fixed_; }
  const std::map<int, PositionSchedule>& prescribed() const { return prescribed_; }

  /// Throws InvalidConfigError for out-of-range or doubly constrained DOFs.
  void validate(int node_count) const;

 private:
  std::vector<int> fixed_;  // sorted, unique
  std::map<int, PositionSchedule> prescribed_;
};

/// Bilateral plane constraint n . x = n . anchor on one node for one step.
/// Motion along the plane stays free.
struct SurfaceConstraint {
  int node = 0;
  Vec3 normal = Vec3::UnitZ();  // unit
  Vec3 anchor = Vec3::Zero();
};

struct StepReport {
  int newton_iterations = 0;
  double residual_norm = 0.0;
  int linear_solves = 0;
  int contact_passes = 0;
  int contact_corrections = 0;
  int contacts = 0;
  bool half_steps = false;
  double wall_time = 0.0;  // s
};

/// Residual of the discrete equations of motion for increment `dq` from
/// `state` over one step of size `h` (config.time_step when h <= 0).
Eigen::VectorXd residual(const NetMesh& mesh, const ElasticModel& model,
                         const IntegratorConfig& config, const State& state,
                         const Eigen::VectorXd& dq, double h = 0.0);

/// d residual / d dq, unconstrained.
SparseMatrix jacobian(const NetMesh& mesh, const ElasticModel& model,
                      const IntegratorConfig& config, const State& state,
                      const Eigen::VectorXd& dq, double h = 0.0);

/// Newton solver for one implicit step with fixed, prescribed and surface
/// constraints. Holds the factorisation so the symbolic analysis is done
/// once per mesh.
class StepSolver {
 public:
  StepSolver(const NetMesh& mesh, const MaterialParams& params, IntegratorConfig config,
             CurvatureModel curvature = CurvatureModel::modified);

  const IntegratorConfig& config() const { return config_; }
  IntegratorConfig& config() { return config_; }
  const ElasticModel& model() const { return model_; }
  const NetMesh& mesh() const { return mesh_; }
  const Eigen::VectorXd& mass() const { return mass_; }

  /// Advances `state` by one step (config().time_step). On nonconvergence the
  /// step is retried as two half steps when enabled. Throws
  /// NonConvergenceError or Error(solver) on failure; `state` is then left
  /// unchanged.
  StepReport advance(State& state, const DofConstraints& dofs,
                     const std::vector<SurfaceConstraint>& surface = {},
                     const Eigen::VectorXd* warm_start = nullptr);

  /// Solves for the step increment only (no retry, state untouched).
  Eigen::VectorXd solve_increment(const State& state, double h, const DofConstraints& dofs,
                                  const std::vector<SurfaceConstraint>& surface,
                                  const Eigen::VectorXd* warm_start, StepReport& report);

  /// Velocity at the end of a step with increment dq.
  Eigen::VectorXd end_velocity(const State& state, const Eigen::VectorXd& dq, double h) const;

  /// Last accepted increment (for warm starting correctors).
  const Eigen::VectorXd& last_increment() const { return last_increment_; }

 private:
  void assemble(const State& state, const Eigen::VectorXd& dq, double h,
                const Eigen::VectorXd& old_force, bool with_jacobian);
  void factor_and_solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x, StepReport& report);
  /// Two half steps, each halved again on failure.
  void advance_split(State& state, double h, int depth, const DofConstraints& dofs,
                     const std::vector<SurfaceConstraint>& surface, StepReport& report);
  static bool retryable(const Error& e);

  const NetMesh& mesh_;
  IntegratorConfig config_;
  ElasticModel model_;
  Eigen::VectorXd mass_;  // per DOF
  SparseMatrix jac_;
  Eigen::VectorXd res_;
  Eigen::VectorXd force_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  Eigen::VectorXd last_increment_;
  bool searching_ = false;  // line search on (fallback attempts only)
};

}  // namespace dernet
