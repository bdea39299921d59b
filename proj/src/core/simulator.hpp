// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "core/contact.hpp"
#include "core/integrator.hpp"
#include "core/net_topology.hpp"

namespace dernet {

/// A mesh in motion: owns the topology, solver, state, boundary conditions
/// and optional contact surface.
class Simulator {
 public:
  Simulator(NetMesh mesh, const MaterialParams& params, const IntegratorConfig& config,
            CurvatureModel curvature = CurvatureModel::modified);

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  NetMesh& mesh() { return *mesh_; }
  const NetMesh& mesh() const { return *mesh_; }
  const MaterialParams& params() const { return params_; }
  StepSolver& solver() { return solver_; }
  const StepSolver& solver() const { return solver_; }
  State& state() { return state_; }
  const State& state() const { return state_; }
  DofConstraints& constraints() { return dofs_; }
  const DofConstraints& constraints() const { return dofs_; }
  ContactOptions& contact_options() { return contact_options_; }
  const ContactSet& contacts() const { return contacts_; }

  void set_surface(std::unique_ptr<ContactSurface> surface) { surface_ = std::move(surface); }
  const ContactSurface* surface() const { return surface_.get(); }

  /// One time step with contact handling.
  StepReport step();

  double kinetic_energy() const;
  double elastic_energy() const;
  /// Elastic + kinetic - work potential of gravity relative to z = 0.
  double total_energy() const;

 private:
  std::unique_ptr<NetMesh> mesh_;  // stable address for the solver
  MaterialParams params_;
  StepSolver solver_;
  State state_;
  DofConstraints dofs_;
  std::unique_ptr<ContactSurface> surface_;
  ContactOptions contact_options_;
  ContactSet contacts_;
};

}  // namespace dernet
