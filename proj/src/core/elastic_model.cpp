// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/elastic_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace dernet {

EdgeGeometry EdgeGeometry::between(const Vec3& from, const Vec3& to) {
  EdgeGeometry g;
  g.edge_vector = to - from;
  g.length = g.edge_vector.norm();
  g.tangent = g.edge_vector / g.length;
  return g;
}

// ---- Stretching -----------------------------------------------------------

double stretch_strain(const EdgeGeometry& edge, double rest_length) {
  return edge.length / rest_length - 1.0;
}

double stretch_energy(const EdgeGeometry& edge, double rest_length,
                      const MaterialParams& params) {
  const double eps = stretch_strain(edge, rest_length);
  return 0.5 * params.axial_stiffness() * eps * eps * rest_length;
}

Vec3 stretch_gradient(const EdgeGeometry& edge, double rest_length,
                      const MaterialParams& params) {
  return params.axial_stiffness() * stretch_strain(edge, rest_length) * edge.tangent;
}

Mat3 stretch_hessian(const EdgeGeometry& edge, double rest_length,
                     const MaterialParams& params) {
  const double ea = params.axial_stiffness();
  Mat3 h = (ea * (1.0 / rest_length - 1.0 / edge.length)) * Mat3::Identity();
  h.noalias() += (ea / edge.length) * edge.tangent * edge.tangent.transpose();
  return h;
}

// ---- Bending --------------------------------------------------------------

double bend_curvature_modified(const Vec3& t1, const Vec3& t2) { return (t2 - t1).norm(); }

double bend_curvature_exact(const Vec3& t1, const Vec3& t2) {
  const double denom = t1.norm() * t2.norm() + t1.dot(t2);
  if (!(denom > 1e-12)) {
    throw Error(ErrorCode::singularity, "exact curvature is unbounded for antiparallel tangents");
  }
  return 2.0 * t1.cross(t2).norm() / denom;
}

double bend_curvature(const Vec3& t1, const Vec3& t2, CurvatureModel model) {
  return model == CurvatureModel::modified ? bend_curvature_modified(t1, t2)
                                           : bend_curvature_exact(t1, t2);
}

namespace {

// Both curvature models give E = psi(c) with c = t1.t2. Returns psi, psi', psi''.
struct Psi {
  double value, d1, d2;
};

Psi bend_psi(double c, double k, CurvatureModel model) {
  if (model == CurvatureModel::modified) {
    // 1/2 k |t2 - t1|^2 = k (1 - c)
    return {k * (1.0 - c), -k, 0.0};
  }
  // 1/2 k (2 tan(phi/2))^2 = 2k (1 - c) / (1 + c)
  const double p = 1.0 + c;
  if (!(p > 1e-12)) {
    throw Error(ErrorCode::singularity, "exact curvature is unbounded for antiparallel tangents");
  }
  return {2.0 * k * (1.0 - c) / p, -4.0 * k / (p * p), 8.0 * k / (p * p * p)};
}

Mat3 projector(const EdgeGeometry& e) {
  return (Mat3::Identity() - e.tangent * e.tangent.transpose()) / e.length;
}

// d2c/de1^2 for c = t1.t2 (t2 held fixed).
Mat3 self_second(const EdgeGeometry& e, const Vec3& other_tangent, double c) {
  const Vec3& t = e.tangent;
  Mat3 h = -t * other_tangent.transpose() - other_tangent * t.transpose();
  h.noalias() += 3.0 * c * t * t.transpose();
  h.diagonal().array() -= c;
  h /= e.length * e.length;
  return 0.5 * (h + h.transpose());
}

}  // namespace

double bend_energy(const EdgeGeometry& first, const EdgeGeometry& second,
                   double voronoi_length, const MaterialParams& params,
                   CurvatureModel model) {
  const double k = params.bending_stiffness() / voronoi_length;
  if (model == CurvatureModel::modified) {
    const double kappa = bend_curvature_modified(first.tangent, second.tangent);
    return 0.5 * k * kappa * kappa;
  }
  const double kappa = bend_curvature_exact(first.tangent, second.tangent);
  return 0.5 * k * kappa * kappa;
}

EdgePairGradient bend_gradient(const EdgeGeometry& first, const EdgeGeometry& second,
                               double voronoi_length, const MaterialParams& params,
                               CurvatureModel model) {
  const double c = first.tangent.dot(second.tangent);
  const Psi psi = bend_psi(c, params.bending_stiffness() / voronoi_length, model);
  EdgePairGradient g;
  g.first = psi.d1 * (second.tangent - c * first.tangent) / first.length;
  g.second = psi.d1 * (first.tangent - c * second.tangent) / second.length;
  return g;
}

EdgePairHessian bend_hessian(const EdgeGeometry& first, const EdgeGeometry& second,
                             double voronoi_length, const MaterialParams& params,
                             CurvatureModel model) {
  const double c = first.tangent.dot(second.tangent);
  const Psi psi = bend_psi(c, params.bending_stiffness() / voronoi_length, model);
  const Mat3 p1 = projector(first);
  const Mat3 p2 = projector(second);
  EdgePairHessian h;
  h.first_first = psi.d1 * self_second(first, second.tangent, c);
  h.second_second = psi.d1 * self_second(second, first.tangent, c);
  h.first_second = psi.d1 * (p1 * p2);
  if (psi.d2 != 0.0) {
    const Vec3 dc1 = p1 * second.tangent;
    const Vec3 dc2 = p2 * first.tangent;
    h.first_first.noalias() += psi.d2 * dc1 * dc1.transpose();
    h.second_second.noalias() += psi.d2 * dc2 * dc2.transpose();
    h.first_second.noalias() += psi.d2 * dc1 * dc2.transpose();
  }
  return h;
}

Mat6 EdgePairHessian::full() const {
  Mat6 m;
  m.topLeftCorner<3, 3>() = first_first;
  m.topRightCorner<3, 3>() = first_second;
  m.bottomLeftCorner<3, 3>() = second_first();
  m.bottomRightCorner<3, 3>() = second_second;
  return m;
}

// ---- Edge-space to node-space ---------------------------------------------

std::array<Vec3, 2> stretch_nodal_gradient(const Vec3& edge_gradient) {
  return {-edge_gradient, edge_gradient};
}

Mat6 stretch_nodal_hessian(const Mat3& h) {
  Mat6 m;
  m.topLeftCorner<3, 3>() = h;
  m.topRightCorner<3, 3>() = -h;
  m.bottomLeftCorner<3, 3>() = -h;
  m.bottomRightCorner<3, 3>() = h;
  return m;
}

std::array<Vec3, 3> bend_nodal_gradient(const EdgePairGradient& g) {
  return {-g.first, g.first - g.second, g.second};
}

Mat9 bend_nodal_hessian(const EdgePairHessian& h) {
  // e1 = xj - xi, e2 = xk - xj
  const Mat3& a = h.first_first;
  const Mat3& b = h.first_second;
  const Mat3 bt = h.second_first();
  const Mat3& d = h.second_second;
  Mat9 m;
  m.block<3, 3>(0, 0) = a;
  m.block<3, 3>(0, 3) = -a + b;
  m.block<3, 3>(0, 6) = -b;
  m.block<3, 3>(3, 0) = -a + bt;
  m.block<3, 3>(3, 3) = a - b - bt + d;
  m.block<3, 3>(3, 6) = b - d;
  m.block<3, 3>(6, 0) = -bt;
  m.block<3, 3>(6, 3) = bt - d;
  m.block<3, 3>(6, 6) = d;
  return m;
}

// ---- Sparsity -------------------------------------------------------------

BlockSparsity::BlockSparsity(const NetMesh& mesh) : node_count_(mesh.node_count()) {
  const int n = node_count_;
  std::vector<std::vector<int>> rows(n);
  for (int i = 0; i < n; ++i) rows[i].push_back(i);
  auto couple = [&](int a, int b) {
    rows[a].push_back(b);
    rows[b].push_back(a);
  };
  for (const auto& s : mesh.stretch) couple(s.i, s.j);
  for (const auto& b : mesh.bend) {
    couple(b.i, b.j);
    couple(b.j, b.k);
    couple(b.i, b.k);
  }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }

  Eigen::VectorXi per_column(3 * n);
  for (int col = 0; col < n; ++col) {
    for (int c = 0; c < 3; ++c) per_column[3 * col + c] = 3 * static_cast<int>(rows[col].size());
  }
  structure_.resize(3 * n, 3 * n);
  structure_.reserve(per_column);
  for (int col = 0; col < n; ++col) {
    for (int c = 0; c < 3; ++c) {
      for (int row : rows[col]) {
        for (int r = 0; r < 3; ++r) structure_.insert(3 * row + r, 3 * col + c) = 0.0;
      }
    }
  }
  structure_.makeCompressed();

  column_lookup_.assign(n, {});
  node_blocks_.assign(n, {});
  int base = 0;
  for (int col = 0; col < n; ++col) {
    const int nrows = static_cast<int>(rows[col].size());
    for (int p = 0; p < nrows; ++p) {
      Block b{rows[col][p], col, {}};
      for (int c = 0; c < 3; ++c) b.column_offset[c] = base + c * 3 * nrows + 3 * p;
      const int id = static_cast<int>(blocks_.size());
      blocks_.push_back(b);
      column_lookup_[col].emplace_back(b.row_node, id);
      node_blocks_[b.row_node].push_back(id);
      if (b.row_node != col) node_blocks_[col].push_back(id);
    }
    base += 9 * nrows;
  }

  diagonal_.resize(3 * n);
  for (int node = 0; node < n; ++node) {
    const Block& b = blocks_[find(node, node)];
    for (int c = 0; c < 3; ++c) diagonal_[3 * node + c] = b.column_offset[c] + c;
  }
}

int BlockSparsity::find(int row_node, int col_node) const {
  const auto& list = column_lookup_[col_node];
  const auto it = std::lower_bound(list.begin(), list.end(), std::make_pair(row_node, -1));
  if (it == list.end() || it->first != row_node) return -1;
  return it->second;
}

// ---- ElasticModel ---------------------------------------------------------

ElasticModel::ElasticModel(const NetMesh& mesh, const MaterialParams& params,
                           CurvatureModel curvature)
    : params_(params), curvature_(curvature), sparsity_(mesh) {
  stretch_blocks_.reserve(mesh.stretch.size());
  for (const auto& s : mesh.stretch) {
    stretch_blocks_.push_back({sparsity_.find(s.i, s.i), sparsity_.find(s.i, s.j),
                               sparsity_.find(s.j, s.i), sparsity_.find(s.j, s.j)});
  }
  bend_blocks_.reserve(mesh.bend.size());
  for (const auto& b : mesh.bend) {
    const int idx[3] = {b.i, b.j, b.k};
    std::array<int, 9> ids{};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ids[3 * r + c] = sparsity_.find(idx[r], idx[c]);
    }
    bend_blocks_.push_back(ids);
  }
}

SparseMatrix ElasticModel::make_matrix() const { return sparsity_.structure(); }

namespace {

inline Vec3 node_at(const Eigen::VectorXd& q, int i) { return q.segment<3>(3 * i); }

[[noreturn]] void non_finite(const char* kind, int id) {
  throw Error(ErrorCode::numerical, fmt::format("non-finite value in {} element {}", kind, id));
}

}  // namespace

double ElasticModel::energy(const NetMesh& mesh, const Eigen::VectorXd& q) const {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.stretch.size(); ++e) {
    const auto& s = mesh.stretch[e];
    total += stretch_energy(EdgeGeometry::between(node_at(q, s.i), node_at(q, s.j)),
                            s.rest_length, params_);
  }
  for (std::size_t e = 0; e < mesh.bend.size(); ++e) {
    const auto& b = mesh.bend[e];
    if (!b.active) continue;
    const EdgeGeometry e1 = EdgeGeometry::between(node_at(q, b.i), node_at(q, b.j));
    const EdgeGeometry e2 = EdgeGeometry::between(node_at(q, b.j), node_at(q, b.k));
    total += bend_energy(e1, e2, b.voronoi_length, params_, curvature_);
  }
  return total;
}

void ElasticModel::evaluate(const NetMesh& mesh, const Eigen::VectorXd& q, double& energy,
                            Eigen::VectorXd& force, SparseMatrix* hessian) const {
  const int n = mesh.node_count();
  if (q.size() != 3 * n || sparsity_.node_count() != n) {
    throw Error(ErrorCode::invalid_argument, "state size does not match the mesh");
  }
  force.setZero(3 * n);
  double* values = nullptr;
  if (hessian != nullptr) {
    if (hessian->nonZeros() != sparsity_.structure().nonZeros() || hessian->rows() != 3 * n) {
      *hessian = sparsity_.structure();
    }
    values = hessian->valuePtr();
    std::fill(values, values + hessian->nonZeros(), 0.0);
  }
  const auto& blocks = sparsity_.blocks();
  energy = 0.0;

  for (std::size_t e = 0; e < mesh.stretch.size(); ++e) {
    const auto& s = mesh.stretch[e];
    const EdgeGeometry g = EdgeGeometry::between(node_at(q, s.i), node_at(q, s.j));
    const double en = stretch_energy(g, s.rest_length, params_);
    const Vec3 grad = stretch_gradient(g, s.rest_length, params_);
    if (!std::isfinite(en) || !grad.allFinite()) non_finite("stretch", static_cast<int>(e));
    energy += en;
    force.segment<3>(3 * s.i) += grad;
    force.segment<3>(3 * s.j) -= grad;
    if (values != nullptr) {
      const Mat3 h = stretch_hessian(g, s.rest_length, params_);
      const Mat3 neg = -h;
      const auto& id = stretch_blocks_[e];
      BlockSparsity::add_block(values, blocks[id[0]], h);
      BlockSparsity::add_block(values, blocks[id[1]], neg);
      BlockSparsity::add_block(values, blocks[id[2]], neg);
      BlockSparsity::add_block(values, blocks[id[3]], h);
    }
  }

  for (std::size_t e = 0; e < mesh.bend.size(); ++e) {
    const auto& b = mesh.bend[e];
    if (!b.active) continue;
    const EdgeGeometry e1 = EdgeGeometry::between(node_at(q, b.i), node_at(q, b.j));
    const EdgeGeometry e2 = EdgeGeometry::between(node_at(q, b.j), node_at(q, b.k));
    const double en = bend_energy(e1, e2, b.voronoi_length, params_, curvature_);
    const auto grad = bend_nodal_gradient(bend_gradient(e1, e2, b.voronoi_length, params_, curvature_));
    if (!std::isfinite(en) || !grad[0].allFinite() || !grad[1].allFinite() || !grad[2].allFinite()) {
      non_finite("bend", static_cast<int>(e));
    }
    energy += en;
    force.segment<3>(3 * b.i) -= grad[0];
    force.segment<3>(3 * b.j) -= grad[1];
    force.segment<3>(3 * b.k) -= grad[2];
    if (values != nullptr) {
      const Mat9 h = bend_nodal_hessian(bend_hessian(e1, e2, b.voronoi_length, params_, curvature_));
      if (!h.allFinite()) non_finite("bend", static_cast<int>(e));
      const auto& id = bend_blocks_[e];
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          BlockSparsity::add_block(values, blocks[id[3 * r + c]], h.block<3, 3>(3 * r, 3 * c));
        }
      }
    }
  }
}

ElasticAssembly ElasticModel::assemble(const NetMesh& mesh, const Eigen::VectorXd& q,
                                       bool with_hessian) const {
  ElasticAssembly out;
  if (with_hessian) out.hessian = sparsity_.structure();
  evaluate(mesh, q, out.energy, out.force, with_hessian ? &out.hessian : nullptr);
  return out;
}

}  // namespace dernet
