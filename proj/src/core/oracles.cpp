// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/oracles.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace dernet::oracles {

namespace {

// Bisection for a sign change of `g` on [lo, hi]; runs to machine precision.
template <class G>
double bisect(G&& g, double lo, double hi) {
  const bool lo_positive = g(lo) > 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((g(mid) > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void check_cable(double length, double shrink) {
  if (!(length > 0.0)) throw Error(ErrorCode::domain, "cable length must be positive");
  if (shrink >= length) throw Error(ErrorCode::domain, "end shrink must be smaller than the cable length");
}

}  // namespace

double catenary_parameter(double length, double shrink) {
  check_cable(length, shrink);
  if (shrink <= 0.0) return std::numeric_limits<double>::infinity();
  const double span = length - shrink;
  // g decreases in c: +inf as c -> 0, span - L < 0 as c -> inf.
  auto g = [&](double c) { return 2.0 * c * std::sinh(span / (2.0 * c)) - length; };
  double hi = span;
  while (g(hi) > 0.0) hi *= 2.0;
  double lo = hi;
  while (g(lo) <= 0.0) lo *= 0.5;
  return bisect(g, lo, hi);
}

double catenary_sag(double length, double shrink) {
  check_cable(length, shrink);
  if (shrink <= 0.0) return 0.0;
  const double c = catenary_parameter(length, shrink);
  const double x = (length - shrink) / (2.0 * c);
  // c (cosh x - 1) without cancellation for small x
  return 2.0 * c * std::sinh(0.5 * x) * std::sinh(0.5 * x);
}

double catenary_multi(double length, double shrink, int suspension_count) {
  if (suspension_count < 1) throw Error(ErrorCode::domain, "suspension count must be at least 1");
  return catenary_sag(length / suspension_count, shrink / suspension_count);
}

double catenary_sag_unhalved(double length, double shrink) {
  check_cable(length, shrink);
  const double span = length - shrink;
  if (!(length > 2.0 * span)) {
    throw Error(ErrorCode::domain, "2A sinh(a/A) = L has no solution unless the shrink exceeds half the length");
  }
  auto g = [&](double a) { return 2.0 * a * std::sinh(span / a) - length; };
  double hi = span;
  while (g(hi) > 0.0) hi *= 2.0;
  double lo = hi;
  while (g(lo) <= 0.0) lo *= 0.5;
  const double a = bisect(g, lo, hi);
  return a * std::cosh(span / a);
}

double normalized_weight(const MaterialParams& params, double length, double gravity) {
  return params.density * params.area * gravity * length * length * length / params.bending_stiffness();
}

double cantilever_tip_linear(const MaterialParams& params, double length, double gravity) {
  return normalized_weight(params, length, gravity) / 8.0;
}

double beam_midpoint_linear(double force, double length, double bending_stiffness) {
  if (!(length > 0.0) || !(bending_stiffness > 0.0)) {
    throw Error(ErrorCode::domain, "beam length and bending stiffness must be positive");
  }
  return force * length * length * length / (48.0 * bending_stiffness);
}

double cable_load_ratio(double deflection, double length) {
  const double half = 0.5 * length;
  const double s = std::hypot(deflection, half);
  return 2.0 * ((s - half) / half) * deflection / s;
}

double cable_midpoint(double force, double length, double axial_stiffness) {
  if (!(length > 0.0) || !(axial_stiffness > 0.0)) {
    throw Error(ErrorCode::domain, "cable length and axial stiffness must be positive");
  }
  if (force < 0.0) return -cable_midpoint(-force, length, axial_stiffness);
  if (force == 0.0) return 0.0;
  const double target = force / axial_stiffness;
  if (target > cable_load_ratio(length, length)) {
    throw Error(ErrorCode::domain, "load deflects the cable beyond its length");
  }
  return bisect([&](double d) { return cable_load_ratio(d, length) - target; }, 0.0, length);
}

std::pair<double, double> curvature_pair(double phi) {
  return {2.0 * std::sin(0.5 * phi), 2.0 * std::tan(0.5 * phi)};
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double relative_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = relative_step * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double relative_step) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = relative_step * (1.0 + std::abs(x[i]));
    xp[i] = x[i] + h;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = x[i] - h;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = x[i];
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& a,
                      const Eigen::Ref<const Eigen::MatrixXd>& b) {
  const double ref = b.norm();
  const double diff = (a - b).norm();
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace dernet::oracles
