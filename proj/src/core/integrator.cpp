// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/integrator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/error.hpp"

namespace dernet {

void IntegratorConfig::validate() const {
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw InvalidConfigError("time step must be positive");
  }
  if (scheme == Scheme::newmark_beta && !(beta > 0.0 && beta <= 1.0)) {
    throw InvalidConfigError("beta must lie in (0, 1]");
  }
  if (!(newton_tolerance > 0.0)) throw InvalidConfigError("newton tolerance must be positive");
  if (max_newton_iterations < 1) throw InvalidConfigError("max newton iterations must be at least 1");
  if (max_step_halvings < 1) throw InvalidConfigError("max step halvings must be at least 1");
  if (!(damping >= 0.0) || !std::isfinite(damping)) throw InvalidConfigError("damping must be >= 0");
  if (!gravity.allFinite()) throw InvalidConfigError("gravity must be finite");
}

State State::at_rest(const NetMesh& mesh) {
  State s;
  s.q = mesh.reference_positions();
  s.v = Eigen::VectorXd::Zero(s.q.size());
  return s;
}

// ---- DofConstraints -------------------------------------------------------

void DofConstraints::fix_dof(int dof) {
  const auto it = std::lower_bound(fixed_.begin(), fixed_.end(), dof);
  if (it == fixed_.end() || *it != dof) fixed_.insert(it, dof);
}

void DofConstraints::fix_node(int node) {
  for (int c = 0; c < 3; ++c) fix_dof(3 * node + c);
}

void DofConstraints::prescribe(int node, PositionSchedule schedule) {
  prescribed_[node] = std::move(schedule);
}

void DofConstraints::release(int node) {
  prescribed_.erase(node);
  fixed_.erase(std::remove_if(fixed_.begin(), fixed_.end(), [&](int d) { return d / 3 == node; }),
               fixed_.end());
}

void DofConstraints::clear() {
  fixed_.clear();
  prescribed_.clear();
}

bool DofConstraints::is_fixed(int dof) const {
  return std::binary_search(fixed_.begin(), fixed_.end(), dof);
}

bool DofConstraints::touches(int node) const {
  return is_prescribed(node) || is_fixed(3 * node) || is_fixed(3 * node + 1) ||
         is_fixed(3 * node + 2);
}

void DofConstraints::validate(int node_count) const {
  for (int d : fixed_) {
    if (d < 0 || d >= 3 * node_count) {
      throw InvalidConfigError(fmt::format("fixed DOF {} out of range", d));
    }
  }
  for (const auto& [node, schedule] : prescribed_) {
    if (node < 0 || node >= node_count) {
      throw InvalidConfigError(fmt::format("prescribed node {} out of range", node));
    }
    if (!schedule) throw InvalidConfigError(fmt::format("prescribed node {} has no schedule", node));
    for (int c = 0; c < 3; ++c) {
      if (is_fixed(3 * node + c)) {
        throw InvalidConfigError(fmt::format("node {} is both fixed and prescribed", node));
      }
    }
  }
}

// ---- Residual and Jacobian ------------------------------------------------

namespace {

Eigen::VectorXd dof_masses(const NetMesh& mesh) {
  Eigen::VectorXd m(3 * mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) m.segment<3>(3 * i).setConstant(mesh.lumped_mass[i]);
  return m;
}

double step_beta(const IntegratorConfig& c) {
  return c.scheme == Scheme::newmark_beta ? c.beta : 1.0;
}

Eigen::VectorXd velocity_after(const IntegratorConfig& c, const State& s,
                               const Eigen::VectorXd& dq, double h) {
  const double b = step_beta(c);
  return dq / (h * b) - ((1.0 - b) / b) * s.v;
}

// External + damping force for the given velocity, added to `force`.
void add_body_forces(const IntegratorConfig& c, const Eigen::VectorXd& mass,
                     const Eigen::VectorXd& velocity, Eigen::VectorXd& force) {
  const Eigen::Index n = mass.size() / 3;
  for (Eigen::Index i = 0; i < n; ++i) {
    force.segment<3>(3 * i) += mass[3 * i] * c.gravity;
  }
  if (c.damping != 0.0) force.array() -= c.damping * mass.array() * velocity.array();
}

Eigen::VectorXd old_forces(const NetMesh& mesh, const ElasticModel& model,
                           const IntegratorConfig& c, const Eigen::VectorXd& mass, const State& s) {
  double energy = 0.0;
  Eigen::VectorXd f;
  model.evaluate(mesh, s.q, energy, f, nullptr);
  add_body_forces(c, mass, s.v, f);
  return f;
}

// E = M (dq - h v_k) - h^2 [w_new F(t_{k+1}) + w_old F(t_k)].
// `force` holds F_int(t_{k+1}) on entry and is consumed.
void form_residual(const IntegratorConfig& c, const Eigen::VectorXd& mass, const State& s,
                   const Eigen::VectorXd& dq, double h, Eigen::VectorXd& force,
                   const Eigen::VectorXd* old_force, Eigen::VectorXd& out) {
  add_body_forces(c, mass, velocity_after(c, s, dq, h), force);
  const double h2 = h * h;
  out = mass.cwiseProduct(dq - h * s.v) - (h2 * c.weight_new()) * force;
  if (old_force != nullptr) out -= (h2 * c.weight_old()) * *old_force;
}

// Turns d2E/dq2 values into the step Jacobian in place.
void form_jacobian(const IntegratorConfig& c, const Eigen::VectorXd& mass,
                   const BlockSparsity& sparsity, double h, SparseMatrix& jac) {
  const double w = c.weight_new();
  double* values = jac.valuePtr();
  const Eigen::Index nnz = jac.nonZeros();
  const double scale = h * h * w;
  for (Eigen::Index k = 0; k < nnz; ++k) values[k] *= scale;
  const double mass_factor = 1.0 + w * h * c.damping * c.velocity_gain();
  const auto& diag = sparsity.diagonal_offsets();
  for (std::size_t d = 0; d < diag.size(); ++d) values[diag[d]] += mass[d] * mass_factor;
}

double effective_h(const IntegratorConfig& c, double h) { return h > 0.0 ? h : c.time_step; }

}  // namespace

Eigen::VectorXd residual(const NetMesh& mesh, const ElasticModel& model,
                         const IntegratorConfig& config, const State& state,
                         const Eigen::VectorXd& dq, double h) {
  h = effective_h(config, h);
  const Eigen::VectorXd mass = dof_masses(mesh);
  double energy = 0.0;
  Eigen::VectorXd force;
  model.evaluate(mesh, state.q + dq, energy, force, nullptr);
  Eigen::VectorXd old;
  if (config.weight_old() != 0.0) old = old_forces(mesh, model, config, mass, state);
  Eigen::VectorXd out;
  form_residual(config, mass, state, dq, h, force, config.weight_old() != 0.0 ? &old : nullptr, out);
  return out;
}

SparseMatrix jacobian(const NetMesh& mesh, const ElasticModel& model,
                      const IntegratorConfig& config, const State& state,
                      const Eigen::VectorXd& dq, double h) {
  h = effective_h(config, h);
  SparseMatrix jac = model.make_matrix();
  double energy = 0.0;
  Eigen::VectorXd force;
  model.evaluate(mesh, state.q + dq, energy, force, &jac);
  form_jacobian(config, dof_masses(mesh), model.sparsity(), h, jac);
  return jac;
}

// ---- StepSolver -----------------------------------------------------------

namespace {

// Orthonormal basis with the constraint normal as first column.
Mat3 normal_basis(const Vec3& n) {
  const Vec3 axis = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = n.cross(axis).normalized();
  Mat3 r;
  r.col(0) = n;
  r.col(1) = t1;
  r.col(2) = n.cross(t1);
  return r;
}

Mat3 load_block(const double* values, const BlockSparsity::Block& b) {
  Mat3 m;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) m(r, c) = values[b.column_offset[c] + r];
  }
  return m;
}

void store_block(double* values, const BlockSparsity::Block& b, const Mat3& m) {
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) values[b.column_offset[c] + r] = m(r, c);
  }
}

}  // namespace

StepSolver::StepSolver(const NetMesh& mesh, const MaterialParams& params, IntegratorConfig config,
                       CurvatureModel curvature)
    : mesh_(mesh), config_(config), model_(mesh, params, curvature), mass_(dof_masses(mesh)) {
  config_.validate();
  jac_ = model_.make_matrix();
}

Eigen::VectorXd StepSolver::end_velocity(const State& state, const Eigen::VectorXd& dq,
                                         double h) const {
  return velocity_after(config_, state, dq, h);
}

void StepSolver::factor_and_solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x,
                                  StepReport& report) {
  ++report.linear_solves;
  if (!analyzed_) {
    ldlt_.analyzePattern(jac_);
    analyzed_ = true;
  }
  ldlt_.factorize(jac_);
  if (ldlt_.info() == Eigen::Success) {
    x = ldlt_.solve(rhs);
    if (ldlt_.info() == Eigen::Success && x.allFinite()) return;
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(jac_);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::solver, "step Jacobian is singular: " + lu.lastErrorMessage());
  }
  x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorCode::solver, "linear solve produced non-finite values");
  }
}

Eigen::VectorXd StepSolver::solve_increment(const State& state, double h,
                                            const DofConstraints& dofs,
                                            const std::vector<SurfaceConstraint>& surface,
                                            const Eigen::VectorXd* warm_start,
                                            StepReport& report) {
  const int n = mesh_.node_count();
  const int ndof = 3 * n;
  if (state.q.size() != ndof || state.v.size() != ndof) {
    throw Error(ErrorCode::invalid_argument, "state size does not match the mesh");
  }
  const double t_new = state.t + h;

  // Constrained coordinates, expressed in each contact node's normal basis.
  std::vector<char> locked(ndof, 0);
  for (int d : dofs.fixed_dofs()) locked[d] = 1;
  for (const auto& [node, schedule] : dofs.prescribed()) {
    locked[3 * node] = locked[3 * node + 1] = locked[3 * node + 2] = 1;
  }
  std::vector<int> contact_of(n, -1);
  std::vector<Mat3> basis;
  basis.reserve(surface.size());
  for (std::size_t s = 0; s < surface.size(); ++s) {
    const int node = surface[s].node;
    if (node < 0 || node >= n) throw Error(ErrorCode::invalid_argument, "surface constraint node out of range");
    if (contact_of[node] >= 0 || dofs.touches(node)) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("node {} has more than one kind of constraint", node));
    }
    contact_of[node] = static_cast<int>(s);
    basis.push_back(normal_basis(surface[s].normal.normalized()));
    locked[3 * node] = 1;
  }

  // Initial guess satisfying every constraint.
  Eigen::VectorXd dq = warm_start != nullptr ? *warm_start : Eigen::VectorXd(h * state.v);
  for (int d : dofs.fixed_dofs()) dq[d] = 0.0;
  for (const auto& [node, schedule] : dofs.prescribed()) {
    dq.segment<3>(3 * node) = schedule(t_new) - state.q.segment<3>(3 * node);
  }
  for (std::size_t s = 0; s < surface.size(); ++s) {
    const auto& c = surface[s];
    const Vec3 nrm = basis[s].col(0);
    const Vec3 x = state.q.segment<3>(3 * c.node) + dq.segment<3>(3 * c.node);
    dq.segment<3>(3 * c.node) += nrm.dot(c.anchor - x) * nrm;
  }

  Eigen::VectorXd old_force;
  const bool use_old = config_.weight_old() != 0.0;
  if (use_old) old_force = old_forces(mesh_, model_, config_, mass_, state);

  const auto& blocks = model_.sparsity().blocks();
  const double norm_scale = config_.residual_norm == ResidualNorm::force ? 1.0 / (h * h) : 1.0;
  Eigen::VectorXd rhs(ndof);
  Eigen::VectorXd step(ndof);
  // Residual at dq in the constrained frame; fills jac_ with the Hessian.
  auto reduced_residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    double energy = 0.0;
    model_.evaluate(mesh_, state.q + x, energy, force_, &jac_);
    form_residual(config_, mass_, state, x, h, force_, use_old ? &old_force : nullptr, res_);
    out = -res_;
    for (int node = 0; node < n; ++node) {
      if (contact_of[node] >= 0) {
        out.segment<3>(3 * node) = basis[contact_of[node]].transpose() * out.segment<3>(3 * node);
      }
    }
    for (int d = 0; d < ndof; ++d) {
      if (locked[d]) out[d] = 0.0;
    }
    return out.norm() * norm_scale;
  };

  double norm = reduced_residual(dq, rhs);
  int iteration = 0;
  Eigen::VectorXd trial(ndof), trial_rhs(ndof);
  for (;; ++iteration) {
    if (!std::isfinite(norm)) {
      throw NonConvergenceError(fmt::format("non-finite residual at t = {:.6g} s", t_new),
                                iteration, norm);
    }
    if (iteration >= 1 && norm <= config_.newton_tolerance) break;
    if (iteration >= config_.max_newton_iterations) {
      throw NonConvergenceError(
          fmt::format("Newton did not converge at t = {:.6g} s after {} iterations (residual {:.3e})",
                      t_new, iteration, norm),
          iteration, norm);
    }

    form_jacobian(config_, mass_, model_.sparsity(), h, jac_);
    double* values = jac_.valuePtr();
    if (!basis.empty()) {
      for (const auto& b : blocks) {
        const int ra = contact_of[b.row_node];
        const int ca = contact_of[b.col_node];
        if (ra < 0 && ca < 0) continue;
        Mat3 m = load_block(values, b);
        if (ra >= 0) m = basis[ra].transpose() * m;
        if (ca >= 0) m = m * basis[ca];
        store_block(values, b, m);
      }
    }
    const int* outer = jac_.outerIndexPtr();
    const int* inner = jac_.innerIndexPtr();
    for (int col = 0; col < ndof; ++col) {
      for (int k = outer[col]; k < outer[col + 1]; ++k) {
        const int row = inner[k];
        if (locked[row] || locked[col]) values[k] = row == col ? 1.0 : 0.0;
      }
    }

    factor_and_solve(rhs, step, report);
    for (int node = 0; node < n; ++node) {
      if (contact_of[node] >= 0) {
        step.segment<3>(3 * node) = basis[contact_of[node]] * step.segment<3>(3 * node);
      }
    }

    double alpha = 1.0;
    for (;;) {
      trial = dq + alpha * step;
      double trial_norm = INFINITY;
      try {
        trial_norm = reduced_residual(trial, trial_rhs);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numerical && e.code() != ErrorCode::singularity) throw;
      }
      if (!searching_ || trial_norm < norm || alpha < 1.0 / 64) {
        if (!std::isfinite(trial_norm) && searching_) {
          throw NonConvergenceError(
              fmt::format("Newton line search failed at t = {:.6g} s", t_new), iteration, norm);
        }
        dq.swap(trial);
        rhs.swap(trial_rhs);
        norm = trial_norm;
        break;
      }
      alpha *= 0.5;
    }
  }
  report.newton_iterations += iteration;
  report.residual_norm = norm;
  return dq;
}

void StepSolver::advance_split(State& state, double h, int depth, const DofConstraints& dofs,
                               const std::vector<SurfaceConstraint>& surface, StepReport& report) {
  for (int sub = 0; sub < 2; ++sub) {
    try {
      State trial = state;
      StepReport part;
      const Eigen::VectorXd dq = solve_increment(trial, 0.5 * h, dofs, surface, nullptr, part);
      trial.v = end_velocity(trial, dq, 0.5 * h);
      trial.q += dq;
      trial.t += 0.5 * h;
      state = std::move(trial);
      report.newton_iterations += part.newton_iterations;
      report.linear_solves += part.linear_solves;
      report.residual_norm = part.residual_norm;
    } catch (const Error& e) {
      if (!retryable(e) || depth + 1 >= config_.max_step_halvings) throw;
      advance_split(state, 0.5 * h, depth + 1, dofs, surface, report);
    }
  }
}

bool StepSolver::retryable(const Error& e) {
  return e.code() == ErrorCode::nonconvergence || e.code() == ErrorCode::solver ||
         e.code() == ErrorCode::numerical;
}

StepReport StepSolver::advance(State& state, const DofConstraints& dofs,
                               const std::vector<SurfaceConstraint>& surface,
                               const Eigen::VectorXd* warm_start) {
  const auto start = std::chrono::steady_clock::now();
  StepReport report;
  const double h = config_.time_step;
  try {
    const Eigen::VectorXd dq = solve_increment(state, h, dofs, surface, warm_start, report);
    state.v = end_velocity(state, dq, h);
    state.q += dq;
    state.t += h;
    last_increment_ = dq;
  } catch (const Error& first) {
    if (!retryable(first) || (!config_.line_search && !config_.retry_half_step)) throw;
    searching_ = config_.line_search;
    struct Reset {
      bool& flag;
      ~Reset() { flag = false; }
    } reset{searching_};
    if (searching_) {
      try {
        StepReport again;
        const Eigen::VectorXd dq = solve_increment(state, h, dofs, surface, warm_start, again);
        state.v = end_velocity(state, dq, h);
        state.q += dq;
        state.t += h;
        last_increment_ = dq;
        report.newton_iterations += again.newton_iterations;
        report.linear_solves += again.linear_solves;
        report.residual_norm = again.residual_norm;
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
      } catch (const Error& e) {
        if (!config_.retry_half_step || !retryable(e)) throw;
      }
    }
    if (!config_.retry_half_step) throw;
    State trial = state;
    StepReport split;
    advance_split(trial, h, 0, dofs, surface, split);
    trial.t = state.t + h;
    last_increment_ = trial.q - state.q;
    state = std::move(trial);
    report = split;
    report.half_steps = true;
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace dernet
