// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "core/elastic_model.hpp"
#include "core/error.hpp"
#include "core/oracles.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dernet;
using dernet::oracles::fd_gradient;
using dernet::oracles::fd_jacobian;
using dernet::oracles::relative_error;
using dernet::testing::Gen;
using dernet::testing::reference_material;

namespace {

constexpr double kPi = std::numbers::pi;

EdgeGeometry edge(const Vec3& a, const Vec3& b) { return EdgeGeometry::between(a, b); }

// Bend energy of three stacked nodes.
double triple_energy(const Eigen::VectorXd& x, const MaterialParams& p, double vor,
                     CurvatureModel model) {
  const Vec3 a = x.segment<3>(0), b = x.segment<3>(3), c = x.segment<3>(6);
  return bend_energy(edge(a, b), edge(b, c), vor, p, model);
}

Eigen::VectorXd triple_gradient(const Eigen::VectorXd& x, const MaterialParams& p, double vor,
                                CurvatureModel model) {
  const Vec3 a = x.segment<3>(0), b = x.segment<3>(3), c = x.segment<3>(6);
  const auto g = bend_nodal_gradient(bend_gradient(edge(a, b), edge(b, c), vor, p, model));
  Eigen::VectorXd out(9);
  out << g[0], g[1], g[2];
  return out;
}

Eigen::VectorXd stack(const Vec3& a, const Vec3& b, const Vec3& c) {
  Eigen::VectorXd x(9);
  x << a, b, c;
  return x;
}

Eigen::VectorXd perturbed(const NetMesh& m, Gen& gen, double scale) {
  return m.reference_positions() + gen.vector(3 * m.node_count(), scale);
}

}  // namespace

TEST_CASE("stretch energy examples") {
  const auto p = reference_material();
  CHECK(stretch_energy(edge({0, 0, 0}, {1, 0, 0}), 1.0, p) == 0.0);
  CHECK(p.axial_stiffness() == doctest::Approx(3141.59).epsilon(1e-6));
  CHECK(stretch_energy(edge({0, 0, 0}, {1.1, 0, 0}), 1.0, p) == doctest::Approx(15.708).epsilon(1e-4));
  CHECK(stretch_energy(edge({0, 0, 0}, {0.9, 0, 0}), 1.0, p) ==
        doctest::Approx(stretch_energy(edge({0, 0, 0}, {1.1, 0, 0}), 1.0, p)).epsilon(1e-12));
}

TEST_CASE("stretch gradient and Hessian examples") {
  const auto p = reference_material();
  CHECK(stretch_gradient(edge({0, 0, 0}, {1, 0, 0}), 1.0, p).norm() == 0.0);
  const Vec3 g = stretch_gradient(edge({0, 0, 0}, {1.1, 0, 0}), 1.0, p);
  CHECK(g.x() == doctest::Approx(314.159).epsilon(1e-5));
  CHECK(std::abs(g.y()) + std::abs(g.z()) == 0.0);
  const auto nodal = stretch_nodal_gradient(g);
  CHECK(nodal[0].isApprox(-g));
  CHECK(nodal[1].isApprox(g));

  const Mat3 h = stretch_hessian(edge({0, 0, 0}, {1, 0, 0}), 1.0, p);
  Mat3 expected = Mat3::Zero();
  expected(0, 0) = p.axial_stiffness();
  CHECK((h - expected).norm() < 1e-9);
  const Mat3 h2 = stretch_hessian(edge({0.1, 0.3, -0.2}, {1.2, -0.4, 0.5}), 1.3, p);
  CHECK((h2 - h2.transpose()).norm() == 0.0);
}

TEST_CASE("curvature examples") {
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY();
  CHECK(bend_curvature_modified(x, x) == 0.0);
  CHECK(bend_curvature_modified(x, y) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(bend_curvature_modified(x, -x) == doctest::Approx(2.0));
  CHECK(bend_curvature_exact(x, x) == 0.0);
  CHECK(bend_curvature_exact(x, y) == doctest::Approx(2.0).epsilon(1e-15));
  try {
    bend_curvature_exact(x, -x);
    FAIL("expected a singularity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singularity);
  }
}

TEST_CASE("property: curvature bounds and small-angle agreement") {
  Gen gen(11);
  for (int n = 0; n < 500; ++n) {
    const Vec3 a = gen.unit(), b = gen.unit();
    const double k = bend_curvature_modified(a, b);
    CHECK(k >= 0.0);
    CHECK(k <= 2.0 + 1e-15);
  }
  // The ratio of the two curvatures is 1 / cos(phi / 2): within 1% up to
  // about 16 degrees and 6.4% at 40 degrees.
  for (double deg = 0.5; deg < 40.0; deg += 0.5) {
    const double phi = deg * kPi / 180.0;
    const Vec3 t2(std::cos(phi), std::sin(phi), 0.0);
    const double km = bend_curvature_modified(Vec3::UnitX(), t2);
    const double ke = bend_curvature_exact(Vec3::UnitX(), t2);
    CHECK(ke / km == doctest::Approx(1.0 / std::cos(0.5 * phi)).epsilon(1e-12));
    if (deg <= 16.0) CHECK(std::abs(ke - km) <= 0.01 * ke);
    CHECK(ke / km < 1.0642);
  }
}

TEST_CASE("bend energy examples") {
  const auto p = reference_material();
  const Vec3 o(0, 0, 0), a(1, 0, 0);
  CHECK(bend_energy(edge(o, a), edge(a, {2, 0, 0}), 1.0, p) == 0.0);
  CHECK(bend_energy(edge(o, a), edge(a, {1, 1, 0}), 1.0, p) == doctest::Approx(7.854e-4).epsilon(1e-4));
  const double folded = bend_energy(edge(o, a), edge(a, o), 1.0, p);
  CHECK(std::isfinite(folded));
  CHECK(folded == doctest::Approx(0.5 * p.bending_stiffness() * 4.0));
}

TEST_CASE("bend gradient: straight is stationary, right angle matches finite differences") {
  const auto p = reference_material();
  const auto straight = stack({0, 0, 0}, {1, 0, 0}, {2, 0, 0});
  CHECK(triple_gradient(straight, p, 1.0, CurvatureModel::modified).norm() == 0.0);
  const auto right = stack({0, 0, 0}, {1, 0, 0}, {1, 1, 0});
  for (auto model : {CurvatureModel::modified, CurvatureModel::exact}) {
    const auto f = [&](const Eigen::VectorXd& x) { return triple_energy(x, p, 1.0, model); };
    CHECK(relative_error(triple_gradient(right, p, 1.0, model), fd_gradient(f, right)) < 1e-6);
  }
}

TEST_CASE("bend gradient sign against the closed form") {
  // E_grad wrt the first edge is k G1 (t1 - t2) with G1 = (I - t1 t1^T) / l1.
  const auto p = reference_material();
  const EdgeGeometry e1 = edge({0, 0, 0}, {1, 0.2, 0.1});
  const EdgeGeometry e2 = edge({1, 0.2, 0.1}, {1.5, 1.0, -0.3});
  const auto g = bend_gradient(e1, e2, 0.8, p);
  const double k = p.bending_stiffness() / 0.8;
  const Mat3 g1 = (Mat3::Identity() - e1.tangent * e1.tangent.transpose()) / e1.length;
  const Mat3 g2 = (Mat3::Identity() - e2.tangent * e2.tangent.transpose()) / e2.length;
  CHECK((g.first - k * g1 * (e1.tangent - e2.tangent)).norm() < 1e-15);
  CHECK((g.second - k * g2 * (e2.tangent - e1.tangent)).norm() < 1e-15);
}

TEST_CASE("bend Hessian matches finite differences, including when straight") {
  const auto p = reference_material();
  const auto straight = stack({0, 0, 0}, {1, 0, 0}, {2, 0, 0});
  const auto right = stack({0, 0, 0}, {1, 0, 0}, {1, 1, 0});
  for (auto model : {CurvatureModel::modified, CurvatureModel::exact}) {
    for (const auto& x : {straight, right}) {
      const auto grad = [&](const Eigen::VectorXd& y) { return triple_gradient(y, p, 1.0, model); };
      const Vec3 a = x.segment<3>(0), b = x.segment<3>(3), c = x.segment<3>(6);
      const Mat9 h = bend_nodal_hessian(bend_hessian(edge(a, b), edge(b, c), 1.0, p, model));
      const Eigen::MatrixXd fd = fd_jacobian(grad, x);
      CHECK(fd.norm() > 0.0);
      CHECK(relative_error(h, fd) < 1e-5);
    }
  }
}

TEST_CASE("bend Hessian cross blocks are exact transposes") {
  const auto p = reference_material();
  const auto h = bend_hessian(edge({0, 0, 0}, {1, 0.3, 0}), edge({1, 0.3, 0}, {1.2, 1, 0.4}), 1.0, p);
  const Mat6 full = h.full();
  CHECK((full - full.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h.second_first() - h.first_second.transpose()).norm() == 0.0);
}

TEST_CASE("property: bend energy is rotation invariant and gradients rotate") {
  const auto p = reference_material();
  Gen gen(5);
  for (int n = 0; n < 100; ++n) {
    const Vec3 a = gen.vec3(1), b = gen.vec3(1), c = gen.vec3(1);
    const Mat3 r = Eigen::AngleAxisd(gen.uniform(0, 2 * kPi), gen.unit()).toRotationMatrix();
    const double e0 = bend_energy(edge(a, b), edge(b, c), 0.7, p);
    const double e1 = bend_energy(edge(r * a, r * b), edge(r * b, r * c), 0.7, p);
    CHECK(std::abs(e1 - e0) <= 1e-10 * std::max(e0, 1e-300) + 1e-300);
    const auto g0 = bend_gradient(edge(a, b), edge(b, c), 0.7, p);
    const auto g1 = bend_gradient(edge(r * a, r * b), edge(r * b, r * c), 0.7, p);
    CHECK((g1.first - r * g0.first).norm() <= 1e-10 * g0.first.norm() + 1e-300);
    CHECK((g1.second - r * g0.second).norm() <= 1e-10 * g0.second.norm() + 1e-300);
  }
}

TEST_CASE("corrupted bend gradient is caught by the finite-difference check") {
  const auto p = reference_material();
  const auto right = stack({0, 0, 0}, {1, 0, 0}, {1, 1, 0});
  const auto f = [&](const Eigen::VectorXd& x) { return triple_energy(x, p, 1.0, CurvatureModel::modified); };
  const Eigen::VectorXd wrong = -triple_gradient(right, p, 1.0, CurvatureModel::modified);
  CHECK(relative_error(wrong, fd_gradient(f, right)) > 1.0);
}

TEST_CASE("assembly of an undeformed rod is zero") {
  const auto p = reference_material();
  const NetMesh m = generate_rod(1.3, 9, p);
  const ElasticModel model(m, p);
  const auto a = model.assemble(m, m.reference_positions());
  CHECK(a.energy == 0.0);
  CHECK(a.force.norm() == 0.0);
  CHECK(a.hessian.rows() == 3 * m.node_count());
}

TEST_CASE("undeformed web stores bending energy only at ring corners") {
  // Ring threads turn 60 degrees at each hexagon corner; the bend model is
  // measured from straight, so those triples hold k (1 - cos 60) each.
  const auto p = reference_material();
  const NetMesh m = generate_hexagonal_web(3.0, 1.0, 2, WebLayout::rings_and_radials, p);
  const ElasticModel model(m, p);
  const Eigen::VectorXd q = m.reference_positions();
  double expected = 0.0;
  int kinked = 0;
  for (const auto& b : m.bend) {
    const Vec3 t1 = (m.nodes[b.j] - m.nodes[b.i]).normalized();
    const Vec3 t2 = (m.nodes[b.k] - m.nodes[b.j]).normalized();
    if (t1.dot(t2) < 1.0 - 1e-12) {
      ++kinked;
      expected += 0.5 * p.bending_stiffness() / b.voronoi_length;
    }
  }
  CHECK(kinked == 6 * 3);
  const auto a = model.assemble(m, q);
  CHECK(a.energy == doctest::Approx(expected).epsilon(1e-12));
  NetMesh straight = m;
  for (auto& b : straight.bend) {
    const Vec3 t1 = (m.nodes[b.j] - m.nodes[b.i]).normalized();
    const Vec3 t2 = (m.nodes[b.k] - m.nodes[b.j]).normalized();
    if (t1.dot(t2) < 1.0 - 1e-12) b.active = false;
  }
  const auto z = model.assemble(straight, q);
  CHECK(z.energy < 1e-25);
  CHECK(z.force.norm() < 1e-12);
  // In-plane only: the rest state has no out-of-plane force.
  for (int i = 0; i < m.node_count(); ++i) CHECK(a.force[3 * i + 2] == 0.0);
}

TEST_CASE("five-node rod: force and Hessian match finite differences") {
  const auto p = reference_material();
  const NetMesh m = generate_rod(1.0, 5, p);
  const ElasticModel model(m, p);
  Gen gen(3);
  const Eigen::VectorXd q = perturbed(m, gen, 0.01);
  const auto a = model.assemble(m, q);
  const auto energy = [&](const Eigen::VectorXd& x) { return model.energy(m, x); };
  const auto force = [&](const Eigen::VectorXd& x) { return model.assemble(m, x, false).force; };
  CHECK(relative_error(-a.force, fd_gradient(energy, q)) < 1e-6);
  CHECK(relative_error(Eigen::MatrixXd(a.hessian), -fd_jacobian(force, q)) < 1e-5);
}

TEST_CASE("property: random states of rods and webs") {
  Gen gen(2024);
  // A soft, thick material makes bending comparable to stretching.
  const MaterialParams materials[] = {reference_material(), MaterialParams::make(1e6, 2e-2, 1000.0)};
  for (int trial = 0; trial < 24; ++trial) {
    const MaterialParams& p = materials[trial % 2];
    const NetMesh m = trial % 3 == 0
                          ? generate_hexagonal_web(1.0, 1.0, 2, WebLayout::rings_and_radials, p)
                          : generate_rod(gen.uniform(0.5, 2.0), gen.integer(3, 50), p);
    const ElasticModel model(m, p);
    const Eigen::VectorXd q = perturbed(m, gen, 0.05);
    const auto a = model.assemble(m, q);
    const auto energy = [&](const Eigen::VectorXd& x) { return model.energy(m, x); };
    const auto force = [&](const Eigen::VectorXd& x) { return model.assemble(m, x, false).force; };
    CAPTURE(trial);
    CHECK(relative_error(-a.force, fd_gradient(energy, q)) < 1e-6);
    const Eigen::MatrixXd h(a.hessian);
    CHECK(relative_error(h, -fd_jacobian(force, q)) < 1e-5);
    CHECK((h - h.transpose()).norm() <= 1e-10 * h.norm());

    // Rigid motions.
    const Vec3 shift = gen.vec3(3.0);
    Eigen::VectorXd moved = q;
    for (int i = 0; i < m.node_count(); ++i) moved.segment<3>(3 * i) += shift;
    const auto b = model.assemble(m, moved);
    CHECK(std::abs(b.energy - a.energy) <= 1e-12 * a.energy);
    CHECK(relative_error(b.force, a.force) < 1e-9);
    const Mat3 r = Eigen::AngleAxisd(gen.uniform(0, 2 * kPi), gen.unit()).toRotationMatrix();
    Eigen::VectorXd rotated = q;
    for (int i = 0; i < m.node_count(); ++i) rotated.segment<3>(3 * i) = r * q.segment<3>(3 * i);
    CHECK(std::abs(model.energy(m, rotated) - a.energy) <= 1e-10 * a.energy);

    Vec3 net = Vec3::Zero(), torque = Vec3::Zero();
    for (int i = 0; i < m.node_count(); ++i) {
      net += a.force.segment<3>(3 * i);
      torque += q.segment<3>(3 * i).cross(a.force.segment<3>(3 * i));
    }
    const double l1 = a.force.lpNorm<1>();
    CHECK(net.norm() <= 1e-8 * l1);
    CHECK(torque.norm() <= 1e-8 * l1);
  }
}

TEST_CASE("inactive bends contribute nothing") {
  const auto p = reference_material();
  NetMesh m = generate_rod(1.0, 6, p);
  const ElasticModel model(m, p);
  Gen gen(9);
  const Eigen::VectorXd q = perturbed(m, gen, 0.02);
  const double all = model.energy(m, q);
  double stretch_only = 0.0;
  for (const auto& s : m.stretch) {
    stretch_only += stretch_energy(edge(q.segment<3>(3 * s.i), q.segment<3>(3 * s.j)), s.rest_length, p);
  }
  for (auto& b : m.bend) b.active = false;
  CHECK(model.energy(m, q) == doctest::Approx(stretch_only).epsilon(1e-14));
  CHECK(all > stretch_only);
}

TEST_CASE("assembly is deterministic and reports non-finite elements") {
  const auto p = reference_material();
  const NetMesh m = generate_hexagonal_web(2.0, 1.0, 1, WebLayout::rings_and_radials, p);
  const ElasticModel model(m, p);
  Gen gen(1);
  const Eigen::VectorXd q = perturbed(m, gen, 0.01);
  const auto a = model.assemble(m, q);
  const auto b = model.assemble(m, q);
  CHECK((a.force.array() == b.force.array()).all());
  CHECK(Eigen::Map<const Eigen::VectorXd>(a.hessian.valuePtr(), a.hessian.nonZeros())
            .cwiseEqual(Eigen::Map<const Eigen::VectorXd>(b.hessian.valuePtr(), b.hessian.nonZeros()))
            .all());
  Eigen::VectorXd bad = q;
  bad.segment<3>(3 * m.stretch[4].j) = bad.segment<3>(3 * m.stretch[4].i);
  try {
    model.assemble(m, bad);
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::numerical);
    CHECK(std::string(e.what()).find("element") != std::string::npos);
  }
}

TEST_CASE("sparsity couples exactly the nodes that share an element") {
  const auto p = reference_material();
  const NetMesh m = generate_rod(1.0, 6, p);
  const BlockSparsity s(m);
  CHECK(s.find(0, 0) >= 0);
  CHECK(s.find(0, 1) >= 0);
  CHECK(s.find(0, 2) >= 0);  // through the bend triple
  CHECK(s.find(0, 3) == -1);
  CHECK(s.structure().nonZeros() == 9 * (6 + 2 * 5 + 2 * 4));
}
