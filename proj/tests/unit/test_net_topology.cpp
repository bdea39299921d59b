// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <set>

#include "core/error.hpp"
#include "core/net_topology.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dernet;
using dernet::testing::reference_material;

namespace {

double total_rest_length(const NetMesh& m) {
  double sum = 0.0;
  for (const auto& s : m.stretch) sum += s.rest_length;
  return sum;
}

void check_mass_conservation(const NetMesh& m, const MaterialParams& p) {
  double lumped = 0.0;
  for (int i = 0; i < m.node_count(); ++i) lumped += m.lumped_mass[i] - m.extra_point_mass[i];
  const double expected = p.density * p.area * total_rest_length(m);
  CHECK(std::abs(lumped - expected) <= 1e-12 * expected);
}

}  // namespace

TEST_CASE("material derives area and moment of inertia") {
  const auto p = MaterialParams::make(1e9, 1e-3, 1000.0);
  CHECK(p.area == doctest::Approx(std::numbers::pi * 1e-6).epsilon(1e-15));
  CHECK(p.moment_inertia == doctest::Approx(std::numbers::pi * 1e-12 / 4).epsilon(1e-15));
  CHECK(p.bending_stiffness() == doctest::Approx(7.853981633974483e-4));
  CHECK_THROWS_AS(MaterialParams::make(0.0, 1e-3, 1000.0), Error);
  CHECK_THROWS_AS(MaterialParams::make(1e9, -1.0, 1000.0), Error);
  CHECK_THROWS_AS(MaterialParams::make(1e9, 1e-3, 0.0), Error);
}

TEST_CASE("three-node rod") {
  const auto p = reference_material();
  const NetMesh m = generate_rod(1.0, 3, p);
  REQUIRE(m.node_count() == 3);
  CHECK(m.nodes[0].isApprox(Vec3(0, 0, 0)));
  CHECK(m.nodes[1].isApprox(Vec3(0.5, 0, 0)));
  CHECK(m.nodes[2].isApprox(Vec3(1.0, 0, 0)));
  REQUIRE(m.stretch.size() == 2);
  CHECK(m.stretch[0].rest_length == doctest::Approx(0.5));
  CHECK(m.stretch[1].rest_length == doctest::Approx(0.5));
  REQUIRE(m.bend.size() == 1);
  CHECK(m.bend[0].voronoi_length == doctest::Approx(0.5));
  CHECK(m.lumped_mass[1] == doctest::Approx(1.5707963e-3).epsilon(1e-7));
  CHECK(m.lumped_mass[0] == doctest::Approx(0.5 * m.lumped_mass[1]));
}

TEST_CASE("fifty-node rod") {
  const NetMesh m = generate_rod(1.0, 50, reference_material());
  CHECK(m.stretch.size() == 49);
  CHECK(m.bend.size() == 48);
  for (const auto& s : m.stretch) CHECK(s.rest_length == doctest::Approx(1.0 / 49).epsilon(1e-14));
  check_mass_conservation(m, reference_material());
}

TEST_CASE("rod preconditions") {
  CHECK_THROWS_AS(generate_rod(1.0, 2, reference_material()), InvalidMeshError);
  CHECK_THROWS_AS(generate_rod(0.0, 5, reference_material()), InvalidMeshError);
}

TEST_CASE("reference web counts") {
  const auto p = reference_material();
  const NetMesh m = generate_hexagonal_web(10.0, 1.0, 5, WebLayout::rings_and_radials, p);
  CHECK(m.junction_nodes.size() == 331);
  CHECK(m.counts().nodes == kPublishedReferenceCounts.nodes);
  CHECK(m.counts().stretch == kPublishedReferenceCounts.stretch);
  // Ring loops bend at every node, radials only between their own segments.
  CHECK(m.counts().bend == 3630);
  REQUIRE(m.corner_nodes.size() == 6);
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    CHECK((m.nodes[m.corner_nodes[k]] - Vec3(10.0 * std::cos(a), 10.0 * std::sin(a), 0.0)).norm() < 1e-12);
  }
  check_mass_conservation(m, p);
  CHECK_NOTHROW(validate_mesh(m, p));
}

TEST_CASE("single-cell web") {
  const auto p = reference_material();
  const NetMesh m = generate_hexagonal_web(10.0, 10.0, 0, WebLayout::rings_and_radials, p);
  CHECK(m.counts().nodes == 7);
  CHECK(m.counts().stretch == 12);
  CHECK(m.counts().bend == 6);
  CHECK(m.junction_nodes.size() == 7);
  CHECK_NOTHROW(validate_mesh(m, p));
  CHECK(center_node(m) == 0);
}

TEST_CASE("web rejects a side that is not a multiple of the grid") {
  CHECK_THROWS_AS(generate_hexagonal_web(10.0, 3.0, 1, WebLayout::rings_and_radials, reference_material()),
                  InvalidConfigError);
  CHECK_THROWS_AS(generate_hexagonal_web(10.0, 1.0, -1, WebLayout::rings_and_radials, reference_material()),
                  InvalidConfigError);
}

TEST_CASE("web bends never couple two threads") {
  // A bend triple is a straight continuation in the undeformed web except
  // where a ring turns a hexagon corner (60 degrees).
  const NetMesh m = generate_hexagonal_web(4.0, 1.0, 2, WebLayout::rings_and_radials, reference_material());
  for (const auto& b : m.bend) {
    const Vec3 t1 = (m.nodes[b.j] - m.nodes[b.i]).normalized();
    const Vec3 t2 = (m.nodes[b.k] - m.nodes[b.j]).normalized();
    const double c = t1.dot(t2);
    const bool straight = std::abs(c - 1.0) < 1e-12;
    const bool ring_corner = std::abs(c - 0.5) < 1e-12;
    CHECK((straight || ring_corner));
  }
}

TEST_CASE("generator is deterministic") {
  const auto p = reference_material();
  const NetMesh a = generate_hexagonal_web(6.0, 1.0, 3, WebLayout::rings_and_radials, p);
  const NetMesh b = generate_hexagonal_web(6.0, 1.0, 3, WebLayout::rings_and_radials, p);
  REQUIRE(a.node_count() == b.node_count());
  for (int i = 0; i < a.node_count(); ++i) CHECK((a.nodes[i].array() == b.nodes[i].array()).all());
  REQUIRE(a.stretch.size() == b.stretch.size());
  for (std::size_t e = 0; e < a.stretch.size(); ++e) {
    CHECK(a.stretch[e].i == b.stretch[e].i);
    CHECK(a.stretch[e].j == b.stretch[e].j);
    CHECK(a.stretch[e].rest_length == b.stretch[e].rest_length);
  }
  REQUIRE(a.bend.size() == b.bend.size());
}

TEST_CASE("property: generated webs satisfy every invariant") {
  const auto p = reference_material();
  for (int side = 1; side <= 5; ++side) {
    for (int sub = 0; sub <= 3; ++sub) {
      const NetMesh m = generate_hexagonal_web(side, 1.0, sub, WebLayout::rings_and_radials, p);
      CAPTURE(side);
      CAPTURE(sub);
      const int junctions = 1 + 3 * side * (side + 1);
      const int cells = 6 * side * (side + 1);
      CHECK(static_cast<int>(m.junction_nodes.size()) == junctions);
      CHECK(m.counts().nodes == junctions + cells * sub);
      CHECK(m.counts().stretch == cells * (sub + 1));
      CHECK_NOTHROW(validate_mesh(m, p));
      check_mass_conservation(m, p);
      for (const auto& b : m.bend) {
        double ij = 0, jk = 0;
        for (const auto& s : m.stretch) {
          if ((s.i == b.i && s.j == b.j) || (s.i == b.j && s.j == b.i)) ij = s.rest_length;
          if ((s.i == b.j && s.j == b.k) || (s.i == b.k && s.j == b.j)) jk = s.rest_length;
        }
        CHECK(b.voronoi_length == 0.5 * (ij + jk));
      }
    }
  }
}

TEST_CASE("validate_mesh names violations") {
  const auto p = reference_material();
  NetMesh m = generate_rod(1.0, 4, p);
  SUBCASE("rest length mismatch") {
    m.stretch[1].rest_length *= 1.01;
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("duplicate stretch element") {
    m.stretch.push_back(m.stretch[0]);
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("bend without its edge") {
    m.bend.push_back({0, 2, 3, 0.5, true});
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("wrong Voronoi length") {
    m.bend[0].voronoi_length *= 2.0;
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("index out of range") {
    m.stretch[0].j = 17;
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("stale lumped mass") {
    m.lumped_mass[0] *= 2.0;
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
  }
  SUBCASE("extra point mass is included") {
    m.extra_point_mass[3] = 5.0;
    CHECK_THROWS_AS(validate_mesh(m, p), InvalidMeshError);
    compute_lumped_masses(m, p);
    CHECK_NOTHROW(validate_mesh(m, p));
    CHECK(m.lumped_mass[3] > 5.0);
  }
}
