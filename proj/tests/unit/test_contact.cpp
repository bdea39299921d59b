// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "core/contact.hpp"
#include "core/error.hpp"
#include "core/simulator.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dernet;
using dernet::testing::Gen;
using dernet::testing::reference_material;

namespace {

NetMesh single_node(const Vec3& x, double mass) {
  NetMesh m;
  m.nodes = {x};
  m.extra_point_mass = {mass};
  compute_lumped_masses(m, reference_material());
  return m;
}

Eigen::VectorXd point(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

}  // namespace

TEST_CASE("detect against a hemisphere") {
  const HemisphereSurface h(4.0, Vec3::Zero());
  CHECK(detect(point(0, 0, 5), h).empty());
  CHECK(detect(point(0, 0, 3.9), h) == std::vector<int>{0});
  CHECK(detect(point(10, 0, -1), h).empty());

  Eigen::VectorXd q(9);
  q << 0, 0, 3.9, 0, 0, 4.1, 1, 1, 0;
  CHECK(detect(q, h) == std::vector<int>{0, 2});
  const std::vector<char> exempt{1, 0, 0};
  CHECK(detect(q, h, &exempt) == std::vector<int>{2});
}

TEST_CASE("surface normals") {
  const HemisphereSurface h(4.0, Vec3::Zero());
  CHECK((surface_normal(h, 0, 0) - Vec3(0, 0, 1)).norm() == 0.0);
  const Vec3 p = surface_normal(h, 2, 0);
  CHECK(h.height(2, 0) == doctest::Approx(std::sqrt(12.0)));
  CHECK((p - Vec3(2 / std::sqrt(12.0), 0, 1)).norm() < 1e-15);
  const PlaneSurface plane(0.0);
  CHECK((surface_normal(plane, 3, -7) - Vec3(0, 0, 1)).norm() == 0.0);
}

TEST_CASE("height and slope agree with finite differences") {
  const HemisphereSurface h(4.0, Vec3(0.5, -0.3, 1.0));
  Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = g.uniform(0.0, 3.6);
    const double a = g.uniform(0.0, 2 * M_PI);
    const double x = 0.5 + r * std::cos(a), y = -0.3 + r * std::sin(a);
    const double e = 1e-6;
    const double fx = (h.height(x + e, y) - h.height(x - e, y)) / (2 * e);
    const double fy = (h.height(x, y + e) - h.height(x, y - e)) / (2 * e);
    const Eigen::Vector2d s = h.slope(x, y);
    CHECK(std::abs(fx - s.x()) < 1e-6);
    CHECK(std::abs(fy - s.y()) < 1e-6);
  }
}

TEST_CASE("prescribed correction") {
  const HemisphereSurface h(4.0, Vec3::Zero());
  CHECK((prescribed_correction(h, Vec3(0, 0, 3.9)) - Vec3(0, 0, 0.1)).norm() < 1e-15);
  CHECK(prescribed_correction(h, Vec3(0, 0, 4)).norm() == 0.0);
  const PlaneSurface plane(0.0);
  CHECK((prescribed_correction(plane, Vec3(1, 2, -0.05)) - Vec3(0, 0, 0.05)).norm() == 0.0);

  // Along the normal, the first-order gap closes: p . dx = f - z.
  const Vec3 x(2.0, 1.0, 2.5);
  const Vec3 d = prescribed_correction(h, x);
  const Vec3 p = surface_normal(h, x.x(), x.y());
  CHECK(p.cross(d).norm() < 1e-14);
  CHECK(p.dot(d) == doctest::Approx(h.height(2, 1) - 2.5));
}

TEST_CASE("filter matrix cases") {
  CHECK(modified_mass_matrix({}) == Mat3::Identity());
  const Mat3 w = modified_mass_matrix({Vec3(0, 0, 1)});
  CHECK((w - Vec3(1, 1, 0).asDiagonal().toDenseMatrix()).norm() == 0.0);
  CHECK(modified_mass_matrix({Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}) == Mat3::Zero());
  CHECK_THROWS_AS(modified_mass_matrix({Vec3::UnitX(), 2 * Vec3::UnitX()}), Error);
}

TEST_CASE("filter matrix is a symmetric projector annihilating its directions") {
  Gen g(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Vec3> dirs;
    const int count = g.integer(0, 2);
    for (int k = 0; k < count; ++k) dirs.push_back(g.vec3(3.0));
    const Mat3 w = modified_mass_matrix(dirs);
    CHECK((w - w.transpose()).norm() < 1e-12);
    CHECK((w * w - w).norm() < 1e-12);
    for (const Vec3& d : dirs) CHECK((w * d.normalized()).norm() < 1e-12);
    CHECK(w.trace() == doctest::Approx(3 - count));
  }
}

TEST_CASE("release policy") {
  const HemisphereSurface h(4.0, Vec3::Zero());
  CHECK(release_policy(h, Vec3(0, 0, 3.95)) == ContactStatus::keep);
  CHECK(release_policy(h, Vec3(0, 0, 4.2)) == ContactStatus::release);
  CHECK(release_policy(h, Vec3(0, 0, 4.0)) == ContactStatus::release);
  CHECK(release_policy(h, Vec3(9, 0, -3)) == ContactStatus::release);
}

TEST_CASE("surface registry") {
  auto h = make_surface(" hemisphere(4) ");
  CHECK(h->height(0, 0) == 4.0);
  auto h2 = make_surface("hemisphere(3, 0, 0, 1)");
  CHECK(h2->height(0, 0) == 4.0);
  CHECK(make_surface("plane(-2)")->height(5, 5) == -2.0);
  CHECK_THROWS_AS(make_surface("torus(1)"), InvalidConfigError);
  CHECK_THROWS_AS(make_surface("hemisphere(4, 1)"), InvalidConfigError);
  CHECK_THROWS_AS(make_surface("hemisphere(x)"), InvalidConfigError);
  CHECK_THROWS_AS(make_surface("hemisphere(-1)"), InvalidConfigError);
  CHECK_THROWS_AS(make_surface("plane(0"), InvalidConfigError);
  register_surface("floor", [](const std::vector<double>&) { return std::make_unique<PlaneSurface>(-1.0); });
  CHECK(make_surface("floor")->height(0, 0) == -1.0);
}

TEST_CASE("no contact matches a plain step bitwise") {
  NetMesh m = generate_rod(1.0, 8, reference_material());
  for (auto& x : m.nodes) x.z() += 5.0;
  IntegratorConfig c;
  c.gravity = Vec3(0, 0, -10);
  StepSolver a(m, reference_material(), c), b(m, reference_material(), c);
  DofConstraints d;
  State sa = State::at_rest(m), sb = sa;
  const HemisphereSurface h(4.0, Vec3::Zero());
  for (int k = 0; k < 5; ++k) {
    a.advance(sa, d);
    ContactSet set;
    const StepReport r = step_with_contact(b, sb, d, &h, ContactOptions{}, &set);
    CHECK(set.empty());
    CHECK(r.contacts == 0);
  }
  CHECK(sa.q == sb.q);
  CHECK(sa.v == sb.v);
}

TEST_CASE("single node lands on a plane and stops") {
  const NetMesh m = single_node(Vec3(0.2, -0.1, 0.012), 1.0);
  IntegratorConfig c;
  c.gravity = Vec3(0, 0, -10);
  StepSolver s(m, reference_material(), c);
  DofConstraints d;
  State st = State::at_rest(m);
  st.v = Vec3(0.3, 0.0, -1.0);
  const PlaneSurface plane(0.0);
  ContactSet set;
  int landed_at = -1;
  for (int k = 0; k < 5; ++k) {
    step_with_contact(s, st, d, &plane, ContactOptions{}, &set);
    if (!set.empty() && landed_at < 0) landed_at = k;
  }
  // Free flight would reach z = 0.012 - 0.011 = 0.001 after one step and
  // cross the plane in the second.
  CHECK(landed_at == 1);
  CHECK(std::abs(st.q[2]) < 1e-12);
  CHECK(st.v.norm() == 0.0);
  CHECK(st.q[0] > 0.2);
}

TEST_CASE("normal-only reset keeps the tangential velocity") {
  const NetMesh m = single_node(Vec3(0, 0, 0.001), 1.0);
  IntegratorConfig c;
  c.gravity = Vec3(0, 0, -10);
  StepSolver s(m, reference_material(), c);
  DofConstraints d;
  State st = State::at_rest(m);
  st.v = Vec3(0.5, 0.0, -1.0);
  const PlaneSurface plane(0.0);
  ContactOptions o;
  o.velocity_reset = VelocityReset::normal;
  ContactSet set;
  step_with_contact(s, st, d, &plane, o, &set);
  REQUIRE(set.size() == 1);
  CHECK(std::abs(st.q[2]) < 1e-12);
  CHECK(st.v[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.v[0] == doctest::Approx(0.5));
}

TEST_CASE("rod dropped on a hemisphere never penetrates") {
  NetMesh m = generate_rod(6.0, 25, reference_material());
  for (auto& x : m.nodes) {
    x.x() -= 3.0;
    x.y() += 0.4;
    x.z() = 4.3;
  }
  IntegratorConfig c;
  c.gravity = Vec3(0, 0, -10);
  c.damping = 0.1;
  StepSolver s(m, reference_material(), c);
  DofConstraints d;
  State st = State::at_rest(m);
  const HemisphereSurface h(4.0, Vec3::Zero());
  int max_contacts = 0;
  for (int k = 0; k < 60; ++k) {
    ContactSet set;
    const StepReport r = step_with_contact(s, st, d, &h, ContactOptions{}, &set);
    max_contacts = std::max(max_contacts, r.contacts);
    for (int i = 0; i < m.node_count(); ++i) {
      const Vec3 x = st.position(i);
      if (h.in_footprint(x.x(), x.y())) CHECK(x.z() >= h.height(x.x(), x.y()) - 1e-8);
    }
    CHECK(detect(st.q, h).empty());
    for (const auto& con : set.constraints) {
      const Vec3 x = st.position(con.node);
      CHECK(std::abs(x.z() - h.height(x.x(), x.y())) < 1e-8);
      CHECK(st.velocity(con.node).norm() == 0.0);
    }
  }
  CHECK(max_contacts > 3);
}

TEST_CASE("fixed nodes are exempt from contact") {
  const NetMesh m = single_node(Vec3(0, 0, -1), 1.0);
  IntegratorConfig c;
  c.gravity = Vec3(0, 0, -10);
  StepSolver s(m, reference_material(), c);
  DofConstraints d;
  d.fix_node(0);
  State st = State::at_rest(m);
  const PlaneSurface plane(0.0);
  const StepReport r = step_with_contact(s, st, d, &plane, ContactOptions{});
  CHECK(r.contacts == 0);
  CHECK(st.q[2] == -1.0);
}

TEST_CASE("simulator drives contact") {
  Simulator sim(single_node(Vec3(0, 0, 0.05), 1.0), reference_material(), [] {
    IntegratorConfig c;
    c.gravity = Vec3(0, 0, -10);
    return c;
  }());
  sim.set_surface(make_surface("plane(0)"));
  for (int k = 0; k < 20; ++k) sim.step();
  CHECK(sim.contacts().size() == 1);
  CHECK(std::abs(sim.state().q[2]) < 1e-12);
  CHECK(sim.kinetic_energy() == 0.0);
}
