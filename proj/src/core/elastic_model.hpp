// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <vector>

#include "core/net_topology.hpp"

namespace dernet {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Edge vector e = x_to - x_from with its unit tangent and length.
struct EdgeGeometry {
  Vec3 edge_vector = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  double length = 0.0;

  static EdgeGeometry between(const Vec3& from, const Vec3& to);
};

// ---- Stretching -----------------------------------------------------------

double stretch_strain(const EdgeGeometry& edge, double rest_length);

/// 1/2 EA eps^2 rest_length.
double stretch_energy(const EdgeGeometry& edge, double rest_length,
                      const MaterialParams& params);

/// Derivative with respect to the edge vector: EA eps t. The node at the
/// head of the edge receives +gradient and the tail receives -gradient.
Vec3 stretch_gradient(const EdgeGeometry& edge, double rest_length,
                      const MaterialParams& params);

/// Second derivative with respect to the edge vector.
Mat3 stretch_hessian(const EdgeGeometry& edge, double rest_length,
                     const MaterialParams& params);

// ---- Bending --------------------------------------------------------------

enum class CurvatureModel {
  /// kappa = |t2 - t1| = 2 sin(phi/2); bounded, used by the simulator.
  modified,
  /// kappa = 2 |t1 x t2| / (1 + t1.t2) = 2 tan(phi/2); singular when folded.
  exact,
};

double bend_curvature_modified(const Vec3& t1, const Vec3& t2);

/// Throws Error(ErrorCode::singularity) for antiparallel tangents.
double bend_curvature_exact(const Vec3& t1, const Vec3& t2);

double bend_curvature(const Vec3& t1, const Vec3& t2, CurvatureModel model);

double bend_energy(const EdgeGeometry& first, const EdgeGeometry& second,
                   double voronoi_length, const MaterialParams& params,
                   CurvatureModel model = CurvatureModel::modified);

/// Gradient of a bend energy with respect to its two edge vectors.
struct EdgePairGradient {
  Vec3 first = Vec3::Zero();
  Vec3 second = Vec3::Zero();
};

/// Hessian blocks with respect to the two edge vectors. The mixed block
/// d2E/de2 de1 is `first_second.transpose()`.
struct EdgePairHessian {
  Mat3 first_first = Mat3::Zero();
  Mat3 second_second = Mat3::Zero();
  Mat3 first_second = Mat3::Zero();

  Mat3 second_first() const { return first_second.transpose(); }
  Mat6 full() const;
};

EdgePairGradient bend_gradient(const EdgeGeometry& first, const EdgeGeometry& second,
                               double voronoi_length, const MaterialParams& params,
                               CurvatureModel model = CurvatureModel::modified);

EdgePairHessian bend_hessian(const EdgeGeometry& first, const EdgeGeometry& second,
                             double voronoi_length, const MaterialParams& params,
                             CurvatureModel model = CurvatureModel::modified);

// ---- Edge-space to node-space ---------------------------------------------

/// Gradient blocks for nodes (i, j) of a stretch element.
std::array<Vec3, 2> stretch_nodal_gradient(const Vec3& edge_gradient);
Mat6 stretch_nodal_hessian(const Mat3& edge_hessian);

/// Gradient blocks for nodes (i, j, k) of a bend element.
std::array<Vec3, 3> bend_nodal_gradient(const EdgePairGradient& g);
Mat9 bend_nodal_hessian(const EdgePairHessian& h);

// ---- Global assembly ------------------------------------------------------

/// Symmetric 3N x 3N block sparsity with a fixed structure. Every node has a
/// diagonal block; off-diagonal blocks exist for node pairs sharing an
/// element. Blocks are addressed by id so element loops never search.
class BlockSparsity {
 public:
  BlockSparsity() = default;
  explicit BlockSparsity(const NetMesh& mesh);

  const SparseMatrix& structure() const { return structure_; }
  int node_count() const { return node_count_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }

  /// Block id of (row node, column node); -1 when structurally zero.
  int find(int row_node, int col_node) const;

  struct Block {
    int row_node;
    int col_node;
    std::array<int, 3> column_offset;  // value index of (3*row, 3*col + c)
  };
  const Block& block(int id) const { return blocks_[id]; }
  const std::vector<Block>& blocks() const { return blocks_; }

  /// Value index of the diagonal entry of each DOF.
  const std::vector<int>& diagonal_offsets() const { return diagonal_; }

  /// Block ids with the given node as row or column node.
  const std::vector<int>& blocks_of(int node) const { return node_blocks_[node]; }

  static void add_block(double* values, const Block& b, const Eigen::Ref<const Mat3>& m) {
    for (int c = 0; c < 3; ++c) {
      double* col = values + b.column_offset[c];
      col[0] += m(0, c);
      col[1] += m(1, c);
      col[2] += m(2, c);
    }
  }

 private:
  int node_count_ = 0;
  SparseMatrix structure_;
  std::vector<Block> blocks_;
  std::vector<int> diagonal_;
  std::vector<std::vector<int>> node_blocks_;
  std::vector<std::vector<std::pair<int, int>>> column_lookup_;  // col node -> (row node, id)
};

/// Energy, internal force and Hessian of a whole mesh.
struct ElasticAssembly {
  double energy = 0.0;
  Eigen::VectorXd force;  // -dE/dq
  SparseMatrix hessian;   // d2E/dq2 (left empty when not requested)
};

/// Evaluates the discrete stretching + bending model on a fixed topology.
/// Element block addresses are precomputed, so repeated evaluations only
/// touch preallocated storage. Accumulation order is fixed, which makes
/// results bitwise reproducible.
class ElasticModel {
 public:
  ElasticModel(const NetMesh& mesh, const MaterialParams& params,
               CurvatureModel curvature = CurvatureModel::modified);

  const MaterialParams& params() const { return params_; }
  CurvatureModel curvature() const { return curvature_; }
  const BlockSparsity& sparsity() const { return sparsity_; }

  /// Total energy only. Bend elements with `active == false` are skipped.
  double energy(const NetMesh& mesh, const Eigen::VectorXd& q) const;

  /// Fills energy and force; writes Hessian values into `hessian` (which must
  /// share this model's structure) when it is non-null. Throws
  /// Error(ErrorCode::numerical) naming the element on non-finite values.
  void evaluate(const NetMesh& mesh, const Eigen::VectorXd& q, double& energy,
                Eigen::VectorXd& force, SparseMatrix* hessian) const;

  ElasticAssembly assemble(const NetMesh& mesh, const Eigen::VectorXd& q,
                           bool with_hessian = true) const;

  /// A zero matrix with the assembly structure.
  SparseMatrix make_matrix() const;

 private:
  MaterialParams params_;
  CurvatureModel curvature_;
  BlockSparsity sparsity_;
  std::vector<std::array<int, 4>> stretch_blocks_;  // ii ij ji jj
  std::vector<std::array<int, 9>> bend_blocks_;     // row-major over (i,j,k)^2
};

}  // namespace dernet
