// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <functional>
#include <utility>

#include "core/net_topology.hpp"

namespace dernet::oracles {

/// Sag of an inextensible cable of length `length` hung between two points
/// at equal height, `shrink` closer together than the cable length. Solves
/// 2c sinh(a / 2c) = L with a = L - shrink by bisection on c.
/// Returns 0 for shrink <= 0; throws Error(domain) for shrink >= length.
double catenary_sag(double length, double shrink);

/// The catenary parameter c for the same problem.
double catenary_parameter(double length, double shrink);

/// Sag between adjacent suspension points when the cable hangs from
/// `suspension_count` equally spaced supports.
double catenary_multi(double length, double shrink, int suspension_count);

/// Alternative form without the half-span argument:
/// delta = A cosh(a / A) with 2A sinh(a / A) = L. Only solvable for
/// shrink > L/2; throws Error(domain) otherwise. Kept for comparison.
double catenary_sag_unhalved(double length, double shrink);

/// Linear Euler-Bernoulli tip deflection of a clamped cantilever under
/// self-weight, normalised by length: (1/8) rho A g L^3 / EI.
double cantilever_tip_linear(const MaterialParams& params, double length, double gravity);

/// rho A g L^3 / EI.
double normalized_weight(const MaterialParams& params, double length, double gravity);

/// Midpoint deflection of a simply supported beam under a central point load.
double beam_midpoint_linear(double force, double length, double bending_stiffness);

/// Midpoint deflection of a taut, initially straight string of axial
/// stiffness `axial_stiffness` pinned at both ends under a central point load.
double cable_midpoint(double force, double length, double axial_stiffness);

/// Load ratio F/EA that produces midpoint deflection `deflection`.
double cable_load_ratio(double deflection, double length);

/// (modified, exact) curvature for turning angle phi in radians.
std::pair<double, double> curvature_pair(double phi);

/// Central-difference derivatives with per-coordinate step
/// relative_step * (1 + |x_i|).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double relative_step = 1e-6);
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double relative_step = 1e-6);

/// ||a - b|| / ||b|| (absolute error when b is zero).
double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& a,
                      const Eigen::Ref<const Eigen::MatrixXd>& b);

}  // namespace dernet::oracles
