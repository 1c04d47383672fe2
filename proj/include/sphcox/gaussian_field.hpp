#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sphcox/covariance.hpp"
#include "sphcox/geometry.hpp"
#include "sphcox/random.hpp"

namespace sphcox {

using MeanFunction = std::function<double(const UnitVector&)>;

/// Mean and covariance of a Gaussian random field on the sphere.
struct FieldSpec {
  MeanFunction mean;
  CovarianceModel model;
};

/// One value per mesh node.
class GridField {
 public:
  GridField(std::shared_ptr<const GridMesh> mesh, std::vector<double> values);

  const GridMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const GridMesh> mesh_ptr() const { return mesh_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::shared_ptr<const GridMesh> mesh_;
  std::vector<double> values_;
};

/// Square-root factor L of the nodewise Gram matrix, L L^T = C.
///
/// Built from a symmetric eigendecomposition (LAPACK dsyevr, checked with random
/// probes and redone with Eigen if the check fails) with eigenvalues below
/// 1e-10 * scale clamped to zero. Only the columns of retained eigenvalues are
/// stored, so factor() is n x rank. Immutable and shareable across threads.
class FieldFactorization {
 public:
  const GridMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const GridMesh> mesh_ptr() const { return mesh_; }
  const Eigen::MatrixXd& factor() const { return factor_; }
  std::size_t rank() const { return static_cast<std::size_t>(factor_.cols()); }
  std::size_t clamped_count() const { return clamped_count_; }

  /// L L^T, expanded to n x n.
  Eigen::MatrixXd reconstruct() const { return factor_ * factor_.transpose(); }

 private:
  friend FieldFactorization factorize_gram(std::shared_ptr<const GridMesh>, Eigen::MatrixXd,
                                           double);
  FieldFactorization(std::shared_ptr<const GridMesh> mesh, Eigen::MatrixXd factor,
                     std::size_t clamped)
      : mesh_(std::move(mesh)), factor_(std::move(factor)), clamped_count_(clamped) {}

  std::shared_ptr<const GridMesh> mesh_;
  Eigen::MatrixXd factor_;
  std::size_t clamped_count_ = 0;
};

/// Upper bound on mesh size for dense factorization.
inline constexpr std::size_t kMaxFactorizationNodes = 8192;

/// Gram matrix C_ij = c(d(v_i, v_j)) over the mesh nodes.
Eigen::MatrixXd gram_matrix(const GridMesh& mesh, const CovarianceModel& model);

/// Factorizes the covariance model over the mesh. Throws kNumerical when the
/// clamped eigenvalues carry more than 10% of the trace.
FieldFactorization factorize(std::shared_ptr<const GridMesh> mesh, const CovarianceModel& model);

/// Factorizes an explicit Gram matrix; `scale` sets the clamping threshold.
FieldFactorization factorize_gram(std::shared_ptr<const GridMesh> mesh, Eigen::MatrixXd gram,
                                  double scale);

/// values = mean + L z with z i.i.d. standard normal. Draws rank() normals.
GridField simulate_grf(const FieldFactorization& fact, std::span<const double> node_mean, Rng& rng);
GridField simulate_grf(const FieldFactorization& fact, const MeanFunction& mean, Rng& rng);

/// Mean function evaluated at every node.
std::vector<double> node_values(const GridMesh& mesh, const MeanFunction& fn);

/// Nodewise exp. Throws kOverflow if any value exceeds 700.
GridField driving_intensity(const GridField& field);

/// Value at the node nearest to u (piecewise-constant extension).
double field_at(const GridField& field, const UnitVector& u);

}  // namespace sphcox
