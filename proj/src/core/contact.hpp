// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/integrator.hpp"

namespace dernet {

/// Rigid target described as a height field z = f(x, y) over a footprint.
class ContactSurface {
 public:
  virtual ~ContactSurface() = default;

  virtual std::string describe() const = 0;
  virtual bool in_footprint(double x, double y) const = 0;
  virtual double height(double x, double y) const = 0;
  /// (df/dx, df/dy)
  virtual Eigen::Vector2d slope(double x, double y) const = 0;
};

/// Upper half of a sphere: f = cz + sqrt(R^2 - r^2) for r <= R.
class HemisphereSurface final : public ContactSurface {
 public:
  HemisphereSurface(double radius, const Vec3& center);

  std::string describe() const override;
  bool in_footprint(double x, double y) const override;
  double height(double x, double y) const override;
  Eigen::Vector2d slope(double x, double y) const override;

  double radius() const { return radius_; }
  const Vec3& center() const { return center_; }

 private:
  double radius_;
  Vec3 center_;
  double rim_floor_;  // smallest sqrt argument, keeps the rim slope finite
};

/// Infinite horizontal plane z = z0.
class PlaneSurface final : public ContactSurface {
 public:
  explicit PlaneSurface(double z0) : z0_(z0) {}

  std::string describe() const override;
  bool in_footprint(double, double) const override { return true; }
  double height(double, double) const override { return z0_; }
  Eigen::Vector2d slope(double, double) const override { return Eigen::Vector2d::Zero(); }

 private:
  double z0_;
};

using SurfaceFactory = std::function<std::unique_ptr<ContactSurface>(const std::vector<double>&)>;

/// Adds or replaces a named surface kind usable from config files.
void register_surface(const std::string& name, SurfaceFactory factory);

/// Parses `name(arg, ...)`, e.g. `hemisphere(4)`, `hemisphere(4, 0, 0, 0)`,
/// `plane(0)`. Throws InvalidConfigError.
std::unique_ptr<ContactSurface> make_surface(const std::string& text);

/// Unnormalised normal (-df/dx, -df/dy, 1).
Vec3 surface_normal(const ContactSurface& surface, double x, double y);

/// Displacement that carries a penetrating point back onto the surface
/// along the local normal: (f - z) p / |p|^2.
Vec3 prescribed_correction(const ContactSurface& surface, const Vec3& point);

/// Filter matrix for a node with the given constraint directions (0 to 3).
Mat3 modified_mass_matrix(const std::vector<Vec3>& constraint_directions);

/// Nodes inside the footprint that lie below the surface. Nodes with
/// `exempt[i] != 0` are skipped.
std::vector<int> detect(const Eigen::VectorXd& q, const ContactSurface& surface,
                        const std::vector<char>* exempt = nullptr);

enum class ContactStatus { keep, release };

/// Constraints are rebuilt each step from the free solve, so a node stays in
/// contact only while its unconstrained candidate position penetrates.
ContactStatus release_policy(const ContactSurface& surface, const Vec3& candidate);

enum class VelocityReset {
  /// All three velocity components of constrained nodes are zeroed.
  full,
  /// Only the normal component is removed.
  normal,
};

struct ContactOptions {
  int max_passes = 20;
  /// On-surface nodes are re-projected until |z - f| is below this.
  double surface_tolerance = 1e-9;
  VelocityReset velocity_reset = VelocityReset::full;
};

/// Active constraints after a step.
struct ContactSet {
  std::vector<SurfaceConstraint> constraints;

  std::size_t size() const { return constraints.size(); }
  bool empty() const { return constraints.empty(); }
};

/// One step with detect/correct passes: free solve, constrain penetrating
/// nodes to the surface and re-solve until no node penetrates, then reset
/// the velocities of constrained nodes. With `surface == nullptr` this is a
/// plain solver step. Throws Error(contact) when the passes do not settle.
StepReport step_with_contact(StepSolver& solver, State& state, const DofConstraints& dofs,
                             const ContactSurface* surface, const ContactOptions& options,
                             ContactSet* contacts = nullptr);

}  // namespace dernet
