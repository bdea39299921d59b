// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/simulator.hpp"

namespace dernet {

namespace {

std::unique_ptr<NetMesh> own(NetMesh&& mesh) { return std::make_unique<NetMesh>(std::move(mesh)); }

}  // namespace

Simulator::Simulator(NetMesh mesh, const MaterialParams& params, const IntegratorConfig& config,
                     CurvatureModel curvature)
    : mesh_(own(std::move(mesh))),
      params_(params),
      solver_(*mesh_, params, config, curvature),
      state_(State::at_rest(*mesh_)) {}

StepReport Simulator::step() {
  dofs_.validate(mesh_->node_count());
  return step_with_contact(solver_, state_, dofs_, surface_.get(), contact_options_, &contacts_);
}

double Simulator::kinetic_energy() const {
  return 0.5 * state_.v.cwiseProduct(state_.v).dot(solver_.mass());
}

double Simulator::elastic_energy() const { return solver_.model().energy(*mesh_, state_.q); }

double Simulator::total_energy() const {
  const Eigen::VectorXd& m = solver_.mass();
  const Vec3& g = solver_.config().gravity;
  double potential = 0.0;
  for (int i = 0; i < mesh_->node_count(); ++i) {
    potential -= m[3 * i] * g.dot(state_.position(i));
  }
  return elastic_energy() + kinetic_energy() + potential;
}

}  // namespace dernet
