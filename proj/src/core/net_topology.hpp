// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <vector>

namespace dernet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Linear-elastic rod material with a solid circular cross section.
struct MaterialParams {
  double young_modulus = 1.0e9;  // Pa
  double rod_radius = 1.0e-3;    // m
  double density = 1000.0;       // kg/m^3
  double area = 0.0;             // m^2, pi r0^2
  double moment_inertia = 0.0;   // m^4, pi r0^4 / 4

  /// Derives area and moment of inertia; throws on nonpositive inputs.
  static MaterialParams make(double young_modulus, double rod_radius,
                             double density);

  double axial_stiffness() const { return young_modulus * area; }
  double bending_stiffness() const { return young_modulus * moment_inertia; }
};

struct StretchElement {
  int i = 0;
  int j = 0;
  double rest_length = 0.0;
};

/// Bending element on the consecutive edges (i,j) and (j,k).
struct BendElement {
  int i = 0;
  int j = 0;
  int k = 0;
  double voronoi_length = 0.0;
  bool active = true;
};

struct MeshCounts {
  int nodes = 0;
  int stretch = 0;
  int bend = 0;
};

/// Node/edge discretization of a rod network in its undeformed state.
struct NetMesh {
  std::vector<Vec3> nodes;
  std::vector<StretchElement> stretch;
  std::vector<BendElement> bend;
  std::vector<int> junction_nodes;
  std::vector<int> corner_nodes;  // empty for rods, 6 entries for webs
  std::vector<double> lumped_mass;
  std::vector<double> extra_point_mass;

  int node_count() const { return static_cast<int>(nodes.size()); }
  MeshCounts counts() const;

  /// Stacked undeformed positions, [x0 y0 z0 x1 ...].
  Eigen::VectorXd reference_positions() const;
};

/// Recomputes lumped masses from rest lengths and extra point masses.
void compute_lumped_masses(NetMesh& mesh, const MaterialParams& material);

/// Checks every structural invariant; throws InvalidMeshError naming the
/// first violation.
void validate_mesh(const NetMesh& mesh, const MaterialParams& material);

/// Straight rod along +x starting at the origin.
NetMesh generate_rod(double length, int node_count,
                     const MaterialParams& material);

enum class WebLayout {
  /// Concentric hexagonal rings of threads joined by one radial connector
  /// per outer-ring junction.
  rings_and_radials,
};

/// Planar hexagonal web centred at the origin in z = 0. Corner nodes are
/// the six outer vertices in counter-clockwise order starting on +x.
NetMesh generate_hexagonal_web(double side_length, double grid_interval,
                               int subdivisions_per_cell, WebLayout layout,
                               const MaterialParams& material);

/// Node counts reported for the reference 10 m / 1 m / 5-subdivision net.
inline constexpr MeshCounts kPublishedReferenceCounts{3631, 3960, 3843};

/// Node closest to the centroid of the corner nodes (or of all nodes when
/// the mesh has no corners).
int center_node(const NetMesh& mesh);

}  // namespace dernet
