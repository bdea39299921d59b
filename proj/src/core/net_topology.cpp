// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/net_topology.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <map>
#include <string>
#include <utility>

#include "core/error.hpp"

namespace dernet {

MaterialParams MaterialParams::make(double young_modulus, double rod_radius,
                                    double density) {
  if (!(young_modulus > 0.0) || !(rod_radius > 0.0) || !(density > 0.0) ||
      !std::isfinite(young_modulus) || !std::isfinite(rod_radius) ||
      !std::isfinite(density)) {
    throw Error(ErrorCode::invalid_argument,
                "material parameters must be finite and strictly positive");
  }
  MaterialParams p;
  p.young_modulus = young_modulus;
  p.rod_radius = rod_radius;
  p.density = density;
  p.area = std::numbers::pi * rod_radius * rod_radius;
  p.moment_inertia =
      std::numbers::pi * rod_radius * rod_radius * rod_radius * rod_radius / 4.0;
  return p;
}

MeshCounts NetMesh::counts() const {
  return {node_count(), static_cast<int>(stretch.size()),
          static_cast<int>(bend.size())};
}

Eigen::VectorXd NetMesh::reference_positions() const {
  Eigen::VectorXd q(3 * nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) q.segment<3>(3 * n) = nodes[n];
  return q;
}

void compute_lumped_masses(NetMesh& mesh, const MaterialParams& material) {
  const std::size_t n = mesh.nodes.size();
  if (mesh.extra_point_mass.size() != n) mesh.extra_point_mass.assign(n, 0.0);
  std::vector<double> half_length(n, 0.0);
  for (const auto& s : mesh.stretch) {
    half_length[s.i] += 0.5 * s.rest_length;
    half_length[s.j] += 0.5 * s.rest_length;
  }
  const double line_density = material.density * material.area;
  mesh.lumped_mass.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    mesh.lumped_mass[i] = line_density * half_length[i] + mesh.extra_point_mass[i];
  }
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw InvalidMeshError(what); }

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void validate_mesh(const NetMesh& mesh, const MaterialParams& material) {
  if (!(material.young_modulus > 0) || !(material.rod_radius > 0) ||
      !(material.density > 0) || !(material.area > 0) ||
      !(material.moment_inertia > 0)) {
    fail("material parameters must be strictly positive");
  }
  const int n = mesh.node_count();
  if (n == 0) fail("mesh has no nodes");
  for (int i = 0; i < n; ++i) {
    if (!mesh.nodes[i].allFinite()) fail("node " + std::to_string(i) + " is not finite");
  }
  auto in_range = [n](int idx) { return idx >= 0 && idx < n; };

  std::map<std::pair<int, int>, double> edges;
  for (std::size_t e = 0; e < mesh.stretch.size(); ++e) {
    const auto& s = mesh.stretch[e];
    const std::string tag = "stretch element " + std::to_string(e);
    if (!in_range(s.i) || !in_range(s.j)) fail(tag + " references a node out of range");
    if (s.i == s.j) fail(tag + " connects a node to itself");
    if (!(s.rest_length > 0.0)) fail(tag + " has nonpositive rest length");
    const double actual = (mesh.nodes[s.j] - mesh.nodes[s.i]).norm();
    if (!close_rel(actual, s.rest_length, 1e-9)) {
      fail(tag + " rest length differs from the undeformed geometry");
    }
    if (!edges.emplace(std::make_pair(std::min(s.i, s.j), std::max(s.i, s.j)), s.rest_length)
             .second) {
      fail(tag + " duplicates an existing element");
    }
  }

  auto rest_of = [&](int a, int b) { return edges.at({std::min(a, b), std::max(a, b)}); };
  for (std::size_t e = 0; e < mesh.bend.size(); ++e) {
    const auto& b = mesh.bend[e];
    const std::string tag = "bend element " + std::to_string(e);
    if (!in_range(b.i) || !in_range(b.j) || !in_range(b.k)) {
      fail(tag + " references a node out of range");
    }
    if (b.i == b.j || b.j == b.k || b.i == b.k) fail(tag + " repeats a node");
    if (!edges.count({std::min(b.i, b.j), std::max(b.i, b.j)}) ||
        !edges.count({std::min(b.j, b.k), std::max(b.j, b.k)})) {
      fail(tag + " edges are not stretch elements");
    }
    const double expected = 0.5 * (rest_of(b.i, b.j) + rest_of(b.j, b.k));
    if (!close_rel(expected, b.voronoi_length, 1e-12)) {
      fail(tag + " Voronoi length is not the half-sum of its edge lengths");
    }
  }

  for (int idx : mesh.junction_nodes) {
    if (!in_range(idx)) fail("junction index out of range");
  }
  if (!mesh.corner_nodes.empty() && mesh.corner_nodes.size() != 6) {
    fail("a web mesh needs exactly 6 corner nodes");
  }
  for (int idx : mesh.corner_nodes) {
    if (!in_range(idx)) fail("corner index out of range");
  }

  if (mesh.extra_point_mass.size() != static_cast<std::size_t>(n) ||
      mesh.lumped_mass.size() != static_cast<std::size_t>(n)) {
    fail("mass arrays do not match the node count");
  }
  NetMesh expected = mesh;
  compute_lumped_masses(expected, material);
  for (int i = 0; i < n; ++i) {
    if (!(mesh.extra_point_mass[i] >= 0.0)) {
      fail("node " + std::to_string(i) + " has a negative point mass");
    }
    if (!(mesh.lumped_mass[i] > 0.0)) {
      fail("node " + std::to_string(i) + " has no mass (isolated node?)");
    }
    if (!close_rel(mesh.lumped_mass[i], expected.lumped_mass[i], 1e-12)) {
      fail("node " + std::to_string(i) + " lumped mass is inconsistent");
    }
  }
}

NetMesh generate_rod(double length, int node_count, const MaterialParams& material) {
  if (node_count < 3) throw InvalidMeshError("a rod needs at least 3 nodes");
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidMeshError("rod length must be positive");
  }
  NetMesh mesh;
  const double spacing = length / (node_count - 1);
  mesh.nodes.reserve(node_count);
  for (int i = 0; i < node_count; ++i) mesh.nodes.emplace_back(spacing * i, 0.0, 0.0);
  for (int i = 0; i + 1 < node_count; ++i) {
    mesh.stretch.push_back({i, i + 1, (mesh.nodes[i + 1] - mesh.nodes[i]).norm()});
  }
  for (int i = 1; i + 1 < node_count; ++i) {
    const double vor = 0.5 * (mesh.stretch[i - 1].rest_length + mesh.stretch[i].rest_length);
    mesh.bend.push_back({i - 1, i, i + 1, vor, true});
  }
  mesh.extra_point_mass.assign(node_count, 0.0);
  compute_lumped_masses(mesh, material);
  return mesh;
}

namespace {

// Builds a web from junction positions and a list of threads. Each thread is
// a polyline of junction ids; consecutive junctions are joined by a unit edge
// subdivided into `subdivisions + 1` segments. Bend triples follow each
// thread; `bend_across_junctions` decides whether a triple may be centred on
// a junction of that thread.
class WebBuilder {
 public:
  WebBuilder(std::vector<Vec3> junctions, int subdivisions)
      : subdivisions_(subdivisions) {
    mesh_.nodes = std::move(junctions);
    for (int i = 0; i < mesh_.node_count(); ++i) mesh_.junction_nodes.push_back(i);
  }

  void add_thread(const std::vector<int>& junction_path, bool closed,
                  bool bend_across_junctions) {
    std::vector<int> chain;
    std::vector<bool> is_junction;
    const std::size_t segs = closed ? junction_path.size() : junction_path.size() - 1;
    for (std::size_t s = 0; s < segs; ++s) {
      const int a = junction_path[s];
      const int b = junction_path[(s + 1) % junction_path.size()];
      chain.push_back(a);
      is_junction.push_back(true);
      for (int m = 1; m <= subdivisions_; ++m) {
        const double frac = static_cast<double>(m) / (subdivisions_ + 1);
        mesh_.nodes.push_back(mesh_.nodes[a] + frac * (mesh_.nodes[b] - mesh_.nodes[a]));
        chain.push_back(mesh_.node_count() - 1);
        is_junction.push_back(false);
      }
    }
    if (!closed) {
      chain.push_back(junction_path.back());
      is_junction.push_back(true);
    }
    const std::size_t count = chain.size();
    const std::size_t stretch_begin = mesh_.stretch.size();
    const std::size_t edges = closed ? count : count - 1;
    for (std::size_t e = 0; e < edges; ++e) {
      const int i = chain[e];
      const int j = chain[(e + 1) % count];
      mesh_.stretch.push_back({i, j, (mesh_.nodes[j] - mesh_.nodes[i]).norm()});
    }
    auto edge_rest = [&](std::size_t e) { return mesh_.stretch[stretch_begin + e].rest_length; };
    for (std::size_t c = 0; c < count; ++c) {
      if (!closed && (c == 0 || c + 1 == count)) continue;
      if (is_junction[c] && !bend_across_junctions) continue;
      const std::size_t prev = (c + count - 1) % count;
      const std::size_t next = (c + 1) % count;
      const double vor = 0.5 * (edge_rest(prev) + edge_rest(c));
      mesh_.bend.push_back({chain[prev], chain[c], chain[next], vor, true});
    }
  }

  NetMesh finish(std::vector<int> corners, const MaterialParams& material) {
    mesh_.corner_nodes = std::move(corners);
    mesh_.extra_point_mass.assign(mesh_.nodes.size(), 0.0);
    compute_lumped_masses(mesh_, material);
    return std::move(mesh_);
  }

 private:
  NetMesh mesh_;
  int subdivisions_;
};

}  // namespace

NetMesh generate_hexagonal_web(double side_length, double grid_interval,
                               int subdivisions_per_cell, WebLayout layout,
                               const MaterialParams& material) {
  if (!(side_length > 0.0) || !(grid_interval > 0.0)) {
    throw InvalidConfigError("hexagon side and grid interval must be positive");
  }
  if (subdivisions_per_cell < 0) {
    throw InvalidConfigError("subdivisions per cell must be non-negative");
  }
  const double ratio = side_length / grid_interval;
  const int rings = static_cast<int>(std::lround(ratio));
  if (rings < 1 || std::abs(ratio - rings) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidConfigError("hexagon side length must be a multiple of the grid interval");
  }

  // Junction ids: centre first, then ring r side k position j (j < r).
  std::vector<Vec3> junctions;
  std::array<Vec3, 6> dir;
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    dir[k] = Vec3(std::cos(a), std::sin(a), 0.0);
  }
  junctions.emplace_back(0.0, 0.0, 0.0);
  std::vector<int> ring_offset(rings + 1, 0);
  for (int r = 1; r <= rings; ++r) {
    ring_offset[r] = static_cast<int>(junctions.size());
    for (int k = 0; k < 6; ++k) {
      for (int j = 0; j < r; ++j) {
        junctions.push_back(grid_interval * (r * dir[k] + j * (dir[(k + 1) % 6] - dir[k])));
      }
    }
  }
  auto junction = [&](int r, int k, int j) {
    if (r == 0) return 0;
    if (j == r) {
      k = (k + 1) % 6;
      j = 0;
    }
    return ring_offset[r] + k * r + j;
  };

  WebBuilder builder(std::move(junctions), subdivisions_per_cell);
  switch (layout) {
    case WebLayout::rings_and_radials:
      for (int r = 1; r <= rings; ++r) {
        std::vector<int> loop;
        for (int k = 0; k < 6; ++k) {
          for (int j = 0; j < r; ++j) loop.push_back(junction(r, k, j));
        }
        builder.add_thread(loop, /*closed=*/true, /*bend_across_junctions=*/true);
      }
      // Each junction of ring r+1 hangs off one junction of ring r along
      // the direction of its sector.
      for (int r = 0; r < rings; ++r) {
        for (int k = 0; k < 6; ++k) {
          for (int j = 0; j <= r; ++j) {
            const int inner = junction(r, k, j);
            const int outer = junction(r + 1, k, j);
            builder.add_thread({inner, outer}, /*closed=*/false,
                               /*bend_across_junctions=*/false);
          }
        }
      }
      break;
  }

  std::vector<int> corners;
  for (int k = 0; k < 6; ++k) corners.push_back(junction(rings, k, 0));
  NetMesh mesh = builder.finish(std::move(corners), material);

  const MeshCounts c = mesh.counts();
  spdlog::debug("hexagonal web: N={} N_s={} N_b={} (junctions {})", c.nodes, c.stretch,
               c.bend, mesh.junction_nodes.size());
  if (rings == 10 && subdivisions_per_cell == 5 &&
      (c.nodes != kPublishedReferenceCounts.nodes ||
       c.stretch != kPublishedReferenceCounts.stretch ||
       c.bend != kPublishedReferenceCounts.bend)) {
    spdlog::warn(
        "reference layout counts differ from the published ones: N={}/{} N_s={}/{} "
        "N_b={}/{} (bend triples only follow continuous threads)",
        c.nodes, kPublishedReferenceCounts.nodes, c.stretch,
        kPublishedReferenceCounts.stretch, c.bend, kPublishedReferenceCounts.bend);
  }
  return mesh;
}

int center_node(const NetMesh& mesh) {
  Vec3 centroid = Vec3::Zero();
  if (!mesh.corner_nodes.empty()) {
    for (int c : mesh.corner_nodes) centroid += mesh.nodes[c];
    centroid /= static_cast<double>(mesh.corner_nodes.size());
  } else {
    for (const auto& x : mesh.nodes) centroid += x;
    centroid /= static_cast<double>(mesh.nodes.size());
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double d = (mesh.nodes[i] - centroid).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace dernet
