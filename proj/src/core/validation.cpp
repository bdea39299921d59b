// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/validation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "core/oracles.hpp"
#include "core/scenarios.hpp"

namespace dernet::validation {

using oracles::fd_gradient;
using oracles::fd_jacobian;
using oracles::relative_error;

namespace {

/// Sum of the analytic bend gradients in node space.
Eigen::VectorXd bend_gradient_sum(const NetMesh& m, const MaterialParams& p, const Eigen::VectorXd& q,
                                  CurvatureModel curvature) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(q.size());
  for (const auto& b : m.bend) {
    if (!b.active) continue;
    const Vec3 xi = q.segment<3>(3 * b.i), xj = q.segment<3>(3 * b.j), xk = q.segment<3>(3 * b.k);
    const auto nodal = bend_nodal_gradient(
        bend_gradient(EdgeGeometry::between(xi, xj), EdgeGeometry::between(xj, xk), b.voronoi_length, p, curvature));
    g.segment<3>(3 * b.i) += nodal[0];
    g.segment<3>(3 * b.j) += nodal[1];
    g.segment<3>(3 * b.k) += nodal[2];
  }
  return g;
}

}  // namespace

DerivativeSummary derivative_sweep(const DerivativeOptions& options) {
  std::mt19937_64 rng(options.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const MaterialParams materials[] = {MaterialParams::make(1e9, 1e-3, 1000.0),
                                      MaterialParams::make(1e6, 2e-2, 1000.0)};
  const double flip = options.corrupt_bend_gradient ? -1.0 : 1.0;
  DerivativeSummary out;
  for (int s = 0; s < options.states; ++s) {
    const MaterialParams& p = materials[s % 2];
    const CurvatureModel curvature = (s / 2) % 2 == 0 ? CurvatureModel::modified : CurvatureModel::exact;
    NetMesh m;
    if (s % 4 == 3 && options.max_nodes >= 37) {
      m = generate_hexagonal_web(1.0, 1.0, 2, WebLayout::rings_and_radials, p);
    } else {
      const int n = std::uniform_int_distribution<int>(3, std::max(3, options.max_nodes))(rng);
      m = generate_rod(uniform(0.5, 2.0), n, p);
    }
    const ElasticModel model(m, p, curvature);
    Eigen::VectorXd q = m.reference_positions();
    const double scale = 0.3 * m.stretch.front().rest_length;
    for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += uniform(-scale, scale);

    const auto a = model.assemble(m, q);
    Eigen::VectorXd force = a.force;
    if (options.corrupt_bend_gradient) force += 2.0 * bend_gradient_sum(m, p, q, curvature);
    const auto energy = [&](const Eigen::VectorXd& x) { return model.energy(m, x); };
    const auto force_of = [&](const Eigen::VectorXd& x) { return model.assemble(m, x, false).force; };
    out.max_force_error = std::max(out.max_force_error, relative_error(-force, fd_gradient(energy, q)));
    out.max_hessian_error =
        std::max(out.max_hessian_error, relative_error(Eigen::MatrixXd(a.hessian), -fd_jacobian(force_of, q)));

    // Element-level bend check on the first active triple.
    const auto& b = m.bend.front();
    Eigen::VectorXd x(9);
    x << q.segment<3>(3 * b.i), q.segment<3>(3 * b.j), q.segment<3>(3 * b.k);
    const auto triple = [&](const Eigen::VectorXd& y) {
      return bend_energy(EdgeGeometry::between(y.segment<3>(0), y.segment<3>(3)),
                         EdgeGeometry::between(y.segment<3>(3), y.segment<3>(6)), b.voronoi_length, p, curvature);
    };
    const auto nodal = bend_nodal_gradient(bend_gradient(EdgeGeometry::between(x.segment<3>(0), x.segment<3>(3)),
                                                         EdgeGeometry::between(x.segment<3>(3), x.segment<3>(6)),
                                                         b.voronoi_length, p, curvature));
    Eigen::VectorXd g(9);
    g << nodal[0], nodal[1], nodal[2];
    out.max_bend_error = std::max(out.max_bend_error, relative_error(flip * g, fd_gradient(triple, x)));
    ++out.states;
  }
  return out;
}

CantileverResult cantilever_relaxed(const MaterialParams& params, double length, int nodes, double weight,
                                    CurvatureModel curvature) {
  const double rod = length * (nodes - 1) / (nodes - 1.5);
  const NetMesh m = generate_rod(rod, nodes, params);
  IntegratorConfig c;
  c.time_step = 0.2;
  c.newton_tolerance = 1e-10;
  c.gravity = Vec3(0, 0, -weight * params.bending_stiffness() / (params.density * params.area * std::pow(length, 3)));
  StepSolver solver(m, params, c, curvature);
  DofConstraints dofs;
  dofs.fix_node(0);
  dofs.fix_node(1);
  State s = State::at_rest(m);
  CantileverResult r;
  r.linear_ratio = weight / 8.0;
  double previous = 0.0;
  const int tip = 3 * (nodes - 1) + 2;
  for (r.steps = 1; r.steps <= 5000; ++r.steps) {
    solver.advance(s, dofs);
    const double z = s.q[tip];
    if (r.steps > 5 && std::abs(z - previous) < 1e-13 * length) break;
    previous = z;
  }
  r.tip_ratio = -s.q[tip] / length;
  return r;
}

CatenaryResult catenary_relaxed(double length, double shrink, int suspension_count, int nodes) {
  if (suspension_count < 1 || (nodes - 1) % suspension_count != 0 || nodes < 2 * suspension_count + 1) {
    throw Error(ErrorCode::invalid_argument, "catenary needs an equal number (>= 2) of segments per span");
  }
  if (!(shrink > 0.0 && shrink < length)) throw Error(ErrorCode::domain, "catenary needs 0 < shrink < length");
  const MaterialParams p = MaterialParams::make(1e9, 1e-3, 1000.0);
  NetMesh m = generate_rod(length, nodes, p);
  for (auto& b : m.bend) b.active = false;

  // Start from strain-free circular arcs hanging between the final supports.
  const int per_span = (nodes - 1) / suspension_count;
  const double arc = length / suspension_count;
  const double chord = (length - shrink) / suspension_count;
  double lo = arc / (2 * M_PI), hi = 1e6 * arc;  // radius bracket
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (2 * mid * std::sin(arc / (2 * mid)) > chord ? hi : lo) = mid;
  }
  const double radius = 0.5 * (lo + hi);
  const double half = arc / (2 * radius);
  State s = State::at_rest(m);
  for (int i = 0; i < nodes; ++i) {
    const int span = std::min(i / per_span, suspension_count - 1);
    const double a = -half + 2 * half * (i - span * per_span) / per_span;
    const double x0 = span * chord + 0.5 * chord;
    s.q.segment<3>(3 * i) = Vec3(x0 + radius * std::sin(a), 0, radius * (std::cos(half) - std::cos(a)));
  }

  IntegratorConfig c;
  c.time_step = 0.01;
  c.damping = 5.0;
  c.newton_tolerance = 1e-8;
  c.gravity = Vec3(0, 0, -10.0);
  StepSolver solver(m, p, c);
  DofConstraints dofs;
  for (int k = 0; k <= suspension_count; ++k) dofs.fix_node(k * per_span);
  CatenaryResult r;
  double previous = 0.0;
  for (r.steps = 1; r.steps <= 20000; ++r.steps) {
    solver.advance(s, dofs);
    const double lowest = s.q(Eigen::seqN(2, nodes, 3)).minCoeff();
    if (r.steps > 10 && std::abs(lowest - previous) < 1e-12 * length) break;
    previous = lowest;
  }
  r.sag = -s.q(Eigen::seqN(2, nodes, 3)).minCoeff();
  r.oracle = oracles::catenary_multi(length, shrink, suspension_count);
  return r;
}

Oscillation cantilever_oscillation(const OscillationSetup& setup, Scheme scheme, double h, int steps) {
  const MaterialParams p = MaterialParams::make(setup.young_modulus, setup.rod_radius, setup.density);
  const NetMesh m = generate_rod(setup.length, setup.nodes, p);
  IntegratorConfig c;
  c.time_step = h;
  c.scheme = scheme;
  c.beta = 0.5;
  c.newton_tolerance = 1e-11;
  c.gravity = Vec3(0, 0, -setup.gravity);
  StepSolver solver(m, p, c);
  DofConstraints dofs;
  dofs.fix_node(0);
  dofs.fix_node(1);
  State s = State::at_rest(m);
  Oscillation out;
  out.time_step = h;
  const int tip = 3 * (setup.nodes - 1) + 2;
  out.tip_z.push_back(s.q[tip]);
  try {
    for (int k = 0; k < steps; ++k) {
      solver.advance(s, dofs);
      out.tip_z.push_back(s.q[tip]);
    }
    out.completed = true;
  } catch (const Error& e) {
    out.error = fmt::format("t = {:.4g} s: {}", s.t, e.what());
  }
  return out;
}

double oscillation_period(const Oscillation& run) {
  std::vector<int> minima;
  const auto& z = run.tip_z;
  for (std::size_t k = 1; k + 1 < z.size(); ++k) {
    if (z[k] < z[k - 1] && z[k] <= z[k + 1]) minima.push_back(static_cast<int>(k));
  }
  if (minima.size() < 2) return 0.0;
  return (minima.back() - minima.front()) * run.time_step / static_cast<double>(minima.size() - 1);
}

double swing(const Oscillation& run, int begin, int end) {
  end = std::min<int>(end, static_cast<int>(run.tip_z.size()));
  if (begin >= end) return 0.0;
  const auto [lo, hi] = std::minmax_element(run.tip_z.begin() + begin, run.tip_z.begin() + end);
  return *hi - *lo;
}

std::vector<CheckResult> run_suite(const SuiteOptions& options) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double measured, double tolerance, std::string detail = {}) {
    out.push_back({std::move(name), measured, tolerance, measured <= tolerance, std::move(detail)});
  };

  DerivativeOptions d;
  d.states = options.derivative_states;
  d.corrupt_bend_gradient = options.corrupt_bend_gradient;
  const DerivativeSummary ds = derivative_sweep(d);
  const std::string states = fmt::format("{} random states", ds.states);
  add("bend_gradient_fd", ds.max_bend_error, 1e-6, states);
  add("assembled_force_fd", ds.max_force_error, 1e-6, states);
  add("assembled_hessian_fd", ds.max_hessian_error, 1e-5, states);

  const auto [k90, kh90] = oracles::curvature_pair(M_PI / 2);
  add("curvature_pair_90deg", std::max(std::abs(k90 - std::sqrt(2.0)), std::abs(kh90 - 2.0)), 1e-14);

  const MaterialParams p = MaterialParams::make(1e9, 1e-3, 1000.0);
  for (double w : {0.1, 0.2, 0.4}) {
    const auto r = cantilever_relaxed(p, 1.0, 50, w, CurvatureModel::modified);
    add(fmt::format("cantilever_tip_w{:.1f}", w), std::abs(r.tip_ratio / r.linear_ratio - 1.0), 0.02,
        fmt::format("delta/L = {:.6g}, linear {:.6g}", r.tip_ratio, r.linear_ratio));
  }

  if (options.include_catenary) {
    double worst = 0.0;
    std::string detail;
    for (double ratio : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      const auto r = catenary_relaxed(1.0, ratio, 1, 100);
      const double err = std::abs(r.sag / r.oracle - 1.0);
      detail += fmt::format("{}dL/L={:.1f}: {:.5f} vs {:.5f}", detail.empty() ? "" : "; ", ratio, r.sag, r.oracle);
      worst = std::max(worst, err);
    }
    add("catenary_sweep_max_deviation", worst, 0.01, detail);

    // Same cable split into N_F spans: sag times N_F should not move.
    const double single = catenary_relaxed(1.0, 0.5, 1, 121).sag;
    double spread = 0.0;
    std::string scaling;
    for (int nf = 1; nf <= 4; ++nf) {
      const auto r = catenary_relaxed(1.0, 0.5, nf, 121);
      spread = std::max(spread, std::abs(nf * r.sag / single - 1.0));
      spread = std::max(spread, std::abs(r.sag / r.oracle - 1.0));
      scaling += fmt::format("{}N_F={}: {:.5f}", scaling.empty() ? "" : "; ", nf, r.sag);
    }
    add("catenary_span_scaling", spread, 0.01, scaling);

    const auto fine = catenary_relaxed(1.0, 0.5, 1, 400);
    add("catenary_fine_cable", std::abs(fine.sag / fine.oracle - 1.0), 1e-3,
        fmt::format("N=400: {:.6f} vs {:.6f}", fine.sag, fine.oracle));
  }
  return out;
}

}  // namespace dernet::validation
