// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/integrator.hpp"

namespace dernet::validation {

/// One line of a validation report.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct DerivativeOptions {
  int states = 200;
  int max_nodes = 50;
  std::uint64_t seed = 1;
  /// Test fixture: flips the sign of every analytic bend gradient.
  bool corrupt_bend_gradient = false;
};

struct DerivativeSummary {
  int states = 0;
  double max_force_error = 0.0;    // assembled force vs FD of energy
  double max_hessian_error = 0.0;  // assembled Hessian vs FD of force
  double max_bend_error = 0.0;     // element bend gradient vs FD of bend energy
};

/// Random perturbed rods and webs of at most `max_nodes` nodes, alternating
/// between the reference material and a soft thick one where bending and
/// stretching are comparable.
DerivativeSummary derivative_sweep(const DerivativeOptions& options);

struct CantileverResult {
  double tip_ratio = 0.0;     // delta / L
  double linear_ratio = 0.0;  // w / 8
  int steps = 0;
};

/// Relaxes a rod clamped by its first two nodes under the gravity that makes
/// the normalised weight equal `weight`. The clamp acts at the midpoint of
/// the first edge, so the free span is exactly `length`.
CantileverResult cantilever_relaxed(const MaterialParams& params, double length, int nodes,
                                    double weight, CurvatureModel curvature);

struct CatenaryResult {
  double sag = 0.0;     // deepest point below the supports, largest over spans
  double oracle = 0.0;  // catenary_multi for the same inputs
  int steps = 0;
};

/// Stretching-only cable of `nodes` nodes hung from `suspension_count + 1`
/// equally spaced supports whose total span is `length - shrink`. Starts
/// from strain-free circular arcs and relaxes under gravity.
CatenaryResult catenary_relaxed(double length, double shrink, int suspension_count, int nodes);

/// Tip z of an undamped cantilever released from straight under gravity.
struct Oscillation {
  std::vector<double> tip_z;  // index k is time k h
  double time_step = 0.0;
  bool completed = false;
  std::string error;
};

struct OscillationSetup {
  double length = 0.1;
  double young_modulus = 1.0e7;
  double rod_radius = 1.0e-3;
  double density = 1000.0;
  double gravity = 10.0;
  int nodes = 10;
};

Oscillation cantilever_oscillation(const OscillationSetup& setup, Scheme scheme, double h, int steps);

/// Mean spacing between successive local minima, or 0 if fewer than two.
double oscillation_period(const Oscillation& run);

/// max - min of tip z over samples [begin, end).
double swing(const Oscillation& run, int begin, int end);

struct SuiteOptions {
  bool corrupt_bend_gradient = false;
  int derivative_states = 40;
  bool include_catenary = true;
};

/// Oracle checks: derivatives, curvature pair, cantilever, catenary sweep.
std::vector<CheckResult> run_suite(const SuiteOptions& options);

}  // namespace dernet::validation
