// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/contact.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "core/error.hpp"

namespace dernet {

// ---- Surfaces -------------------------------------------------------------

HemisphereSurface::HemisphereSurface(double radius, const Vec3& center)
    : radius_(radius), center_(center), rim_floor_(1e-12 * radius * radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidConfigError("hemisphere radius must be positive");
  }
  if (!center.allFinite()) throw InvalidConfigError("hemisphere center must be finite");
}

std::string HemisphereSurface::describe() const {
  return fmt::format("hemisphere({:.17g}, {:.17g}, {:.17g}, {:.17g})", radius_, center_.x(),
                     center_.y(), center_.z());
}

bool HemisphereSurface::in_footprint(double x, double y) const {
  const double dx = x - center_.x();
  const double dy = y - center_.y();
  return dx * dx + dy * dy <= radius_ * radius_;
}

double HemisphereSurface::height(double x, double y) const {
  const double dx = x - center_.x();
  const double dy = y - center_.y();
  return center_.z() + std::sqrt(std::max(radius_ * radius_ - dx * dx - dy * dy, 0.0));
}

Eigen::Vector2d HemisphereSurface::slope(double x, double y) const {
  const double dx = x - center_.x();
  const double dy = y - center_.y();
  const double root = std::sqrt(std::max(radius_ * radius_ - dx * dx - dy * dy, rim_floor_));
  return {-dx / root, -dy / root};
}

std::string PlaneSurface::describe() const { return fmt::format("plane({:.17g})", z0_); }

namespace {

std::map<std::string, SurfaceFactory>& registry() {
  static std::map<std::string, SurfaceFactory> table = {
      {"hemisphere",
       [](const std::vector<double>& a) -> std::unique_ptr<ContactSurface> {
         if (a.size() != 1 && a.size() != 4) {
           throw InvalidConfigError("hemisphere takes (radius) or (radius, cx, cy, cz)");
         }
         const Vec3 c = a.size() == 4 ? Vec3(a[1], a[2], a[3]) : Vec3::Zero();
         return std::make_unique<HemisphereSurface>(a[0], c);
       }},
      {"plane",
       [](const std::vector<double>& a) -> std::unique_ptr<ContactSurface> {
         if (a.size() > 1) throw InvalidConfigError("plane takes (z0)");
         return std::make_unique<PlaneSurface>(a.empty() ? 0.0 : a[0]);
       }},
  };
  return table;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void register_surface(const std::string& name, SurfaceFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<ContactSurface> make_surface(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  std::string name = trim(s.substr(0, open));
  std::vector<double> args;
  if (open != std::string::npos) {
    const auto close = s.rfind(')');
    if (close == std::string::npos || close < open || !trim(s.substr(close + 1)).empty()) {
      throw InvalidConfigError("malformed surface '" + text + "'");
    }
    std::stringstream list(s.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(list, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        args.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw InvalidConfigError("malformed surface argument '" + item + "'");
      }
    }
  }
  SurfaceFactory factory;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    const auto it = registry().find(name);
    if (it == registry().end()) throw InvalidConfigError("unknown surface '" + name + "'");
    factory = it->second;
  }
  return factory(args);
}

// ---- Contact geometry -----------------------------------------------------

Vec3 surface_normal(const ContactSurface& surface, double x, double y) {
  const Eigen::Vector2d s = surface.slope(x, y);
  return {-s.x(), -s.y(), 1.0};
}

Vec3 prescribed_correction(const ContactSurface& surface, const Vec3& point) {
  const Vec3 p = surface_normal(surface, point.x(), point.y());
  return (surface.height(point.x(), point.y()) - point.z()) / p.squaredNorm() * p;
}

Mat3 modified_mass_matrix(const std::vector<Vec3>& constraint_directions) {
  if (constraint_directions.size() > 3) {
    throw Error(ErrorCode::invalid_argument, "a node has at most three constraint directions");
  }
  if (constraint_directions.size() == 3) return Mat3::Zero();
  Mat3 w = Mat3::Identity();
  std::vector<Vec3> basis;
  for (const Vec3& d : constraint_directions) {
    Vec3 u = d;
    for (const Vec3& b : basis) u -= u.dot(b) * b;
    const double len = u.norm();
    if (!(len > 1e-12 * d.norm())) {
      throw Error(ErrorCode::invalid_argument, "constraint directions are linearly dependent");
    }
    u /= len;
    basis.push_back(u);
    w -= u * u.transpose();
  }
  return w;
}

std::vector<int> detect(const Eigen::VectorXd& q, const ContactSurface& surface,
                        const std::vector<char>* exempt) {
  std::vector<int> hits;
  const int n = static_cast<int>(q.size() / 3);
  for (int i = 0; i < n; ++i) {
    if (exempt != nullptr && (*exempt)[i]) continue;
    const double x = q[3 * i], y = q[3 * i + 1], z = q[3 * i + 2];
    if (surface.in_footprint(x, y) && z < surface.height(x, y)) hits.push_back(i);
  }
  return hits;
}

ContactStatus release_policy(const ContactSurface& surface, const Vec3& candidate) {
  if (!surface.in_footprint(candidate.x(), candidate.y())) return ContactStatus::release;
  return candidate.z() < surface.height(candidate.x(), candidate.y()) ? ContactStatus::keep
                                                                       : ContactStatus::release;
}

// ---- Step with contact ----------------------------------------------------

namespace {

SurfaceConstraint constraint_at(const ContactSurface& surface, int node, const Vec3& x) {
  const Vec3 p = surface_normal(surface, x.x(), x.y());
  const double f = surface.height(x.x(), x.y());
  return {node, p.normalized(), x + (f - x.z()) / p.squaredNorm() * p};
}

}  // namespace

StepReport step_with_contact(StepSolver& solver, State& state, const DofConstraints& dofs,
                             const ContactSurface* surface, const ContactOptions& options,
                             ContactSet* contacts) {
  if (contacts != nullptr) contacts->constraints.clear();
  if (surface == nullptr) return solver.advance(state, dofs);

  const int n = state.node_count();
  std::vector<char> exempt(n, 0);
  for (int i = 0; i < n; ++i) exempt[i] = dofs.touches(i) ? 1 : 0;

  std::vector<SurfaceConstraint> active;
  std::vector<int> slot(n, -1);
  State trial = state;
  StepReport report = solver.advance(trial, dofs);
  StepReport total = report;
  int passes = 0;
  int corrections = 0;
  for (;;) {
    bool changed = false;
    // Re-project constrained nodes that drifted off a curved surface.
    for (auto& c : active) {
      const Vec3 x = trial.position(c.node);
      if (!surface->in_footprint(x.x(), x.y())) continue;
      if (std::abs(x.z() - surface->height(x.x(), x.y())) > options.surface_tolerance) {
        c = constraint_at(*surface, c.node, x);
        ++corrections;
        changed = true;
      }
    }
    for (int node : detect(trial.q, *surface, &exempt)) {
      if (slot[node] >= 0) continue;
      slot[node] = static_cast<int>(active.size());
      active.push_back(constraint_at(*surface, node, trial.position(node)));
      ++corrections;
      changed = true;
    }
    if (!changed) break;
    if (++passes > options.max_passes) {
      throw Error(ErrorCode::contact,
                  fmt::format("contact corrector did not settle within {} passes at t = {:.6g} s",
                              options.max_passes, trial.t));
    }
    const Eigen::VectorXd warm = trial.q - state.q;
    trial = state;
    report = solver.advance(trial, dofs, active, &warm);
    total.newton_iterations += report.newton_iterations;
    total.linear_solves += report.linear_solves;
    total.residual_norm = report.residual_norm;
    total.half_steps = total.half_steps || report.half_steps;
    total.wall_time += report.wall_time;
  }

  for (const auto& c : active) {
    // Roundoff can leave an on-surface node an ulp below f.
    const Vec3 x = trial.position(c.node);
    if (surface->in_footprint(x.x(), x.y())) {
      const double f = surface->height(x.x(), x.y());
      if (x.z() < f) trial.q[3 * c.node + 2] = f;
    }
    auto v = trial.v.segment<3>(3 * c.node);
    if (options.velocity_reset == VelocityReset::full) {
      v.setZero();
    } else {
      v -= v.dot(c.normal) * c.normal;
    }
  }
  state = std::move(trial);
  total.contact_passes = passes;
  total.contact_corrections = corrections;
  total.contacts = static_cast<int>(active.size());
  if (contacts != nullptr) contacts->constraints = std::move(active);
  return total;
}

}  // namespace dernet
