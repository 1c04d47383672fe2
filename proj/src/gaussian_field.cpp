#include "sphcox/gaussian_field.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>
#include <string>

#include "sphcox/error.hpp"

namespace sphcox {

GridField::GridField(std::shared_ptr<const GridMesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  require(mesh_ != nullptr, ErrorCode::kInvalidArgument, "grid field needs a mesh");
  require(values_.size() == mesh_->size(), ErrorCode::kInvalidArgument,
          "grid field needs one value per node");
  for (double v : values_) {
    require(std::isfinite(v), ErrorCode::kNumerical, "grid field values must be finite");
  }
}

namespace {

// Probes C x = V diag(w) V^T x and V^T V x = x with a few fixed random vectors; O(n^2).
bool decomposition_holds(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& vectors,
                         const Eigen::VectorXd& eigenvalues) {
  if (!vectors.allFinite() || !eigenvalues.allFinite()) return false;
  const auto n = gram.rows();
  const double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300) * static_cast<double>(n);
  Rng rng(0x5eed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int probe = 0; probe < 3; ++probe) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(rng);
    const Eigen::VectorXd vtx = vectors.transpose() * x;
    const double norm = x.norm();
    if ((vectors * vtx - x).norm() > 1e-8 * norm) return false;
    const Eigen::VectorXd lhs = gram * x;
    const Eigen::VectorXd rhs = vectors * eigenvalues.cwiseProduct(vtx);
    if ((lhs - rhs).norm() > 1e-10 * scale * norm) return false;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd gram_matrix(const GridMesh& mesh, const CovarianceModel& model) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    gram(j, j) = model.evaluate(0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double c = model.evaluate(geodesic_distance(mesh.node(i), mesh.node(j)));
      gram(i, j) = c;
      gram(j, i) = c;
    }
  }
  return gram;
}

FieldFactorization factorize_gram(std::shared_ptr<const GridMesh> mesh, Eigen::MatrixXd gram,
                                  double scale) {
  require(mesh != nullptr && mesh->size() > 0, ErrorCode::kInvalidArgument,
          "factorization needs a non-empty mesh");
  const auto n = static_cast<Eigen::Index>(mesh->size());
  require(gram.rows() == n && gram.cols() == n, ErrorCode::kInvalidArgument,
          "Gram matrix does not match the mesh");
  require(mesh->size() <= kMaxFactorizationNodes, ErrorCode::kInvalidArgument,
          "mesh exceeds the dense factorization cap of " + std::to_string(kMaxFactorizationNodes) +
              " nodes");

  const double trace = gram.trace();
  Eigen::VectorXd eigenvalues(n);
  lapack_int info = 0;
  Eigen::MatrixXd vectors(n, n);
  {
    Eigen::MatrixXd work = gram;
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'L', static_cast<lapack_int>(n), work.data(),
                          static_cast<lapack_int>(n), 0.0, 0.0, 0, 0, 0.0, &found, eigenvalues.data(),
                          vectors.data(), static_cast<lapack_int>(n), support.data());
    if (info == 0 && found != static_cast<lapack_int>(n)) info = -1;
  }
  if (info != 0 || !decomposition_holds(gram, vectors, eigenvalues)) {
    // Some optimized LAPACK builds return garbage on some CPUs; Eigen is slower but portable.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    require(solver.info() == Eigen::Success, ErrorCode::kNumerical,
            "symmetric eigendecomposition failed");
    eigenvalues = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  const double threshold = 1e-10 * scale;
  double clamped_mass = 0.0;
  std::size_t clamped = 0;
  Eigen::Index first_kept = n;
  for (Eigen::Index k = 0; k < n; ++k) {  // ascending order
    if (eigenvalues(k) < threshold) {
      clamped_mass += std::abs(eigenvalues(k));
      ++clamped;
    } else if (first_kept == n) {
      first_kept = k;
    }
  }
  if (trace > 0.0) {
    require(clamped_mass <= 0.1 * trace, ErrorCode::kNumerical,
            "clamped eigenvalues exceed 10% of the trace; Gram matrix is not PSD");
  }

  const Eigen::Index kept = n - first_kept;
  Eigen::MatrixXd factor(n, kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    const Eigen::Index src = first_kept + k;
    factor.col(k) = vectors.col(src) * std::sqrt(eigenvalues(src));
  }
  return FieldFactorization(std::move(mesh), std::move(factor), clamped);
}

FieldFactorization factorize(std::shared_ptr<const GridMesh> mesh, const CovarianceModel& model) {
  require(mesh != nullptr, ErrorCode::kInvalidArgument, "factorization needs a mesh");
  Eigen::MatrixXd gram = gram_matrix(*mesh, model);
  return factorize_gram(std::move(mesh), std::move(gram), model.variance());
}

std::vector<double> node_values(const GridMesh& mesh, const MeanFunction& fn) {
  std::vector<double> out;
  out.reserve(mesh.size());
  for (const auto& v : mesh.nodes()) out.push_back(fn(v));
  return out;
}

GridField simulate_grf(const FieldFactorization& fact, std::span<const double> node_mean, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(fact.mesh().size());
  require(static_cast<Eigen::Index>(node_mean.size()) == n, ErrorCode::kInvalidArgument,
          "mean vector does not match the mesh");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(fact.rank()));
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);

  std::vector<double> values(node_mean.begin(), node_mean.end());
  if (z.size() > 0) {
    Eigen::Map<Eigen::VectorXd> out(values.data(), n);
    out.noalias() += fact.factor() * z;
  }
  return GridField(fact.mesh_ptr(), std::move(values));
}

GridField simulate_grf(const FieldFactorization& fact, const MeanFunction& mean, Rng& rng) {
  const std::vector<double> mu = node_values(fact.mesh(), mean);
  return simulate_grf(fact, std::span<const double>(mu), rng);
}

GridField driving_intensity(const GridField& field) {
  std::vector<double> out;
  out.reserve(field.values().size());
  for (double v : field.values()) {
    require(v <= 700.0, ErrorCode::kOverflow, "field value exceeds 700; exp would overflow");
    out.push_back(std::exp(v));
  }
  return GridField(field.mesh_ptr(), std::move(out));
}

double field_at(const GridField& field, const UnitVector& u) {
  return field[field.mesh().nearest_node(u)];
}

}  // namespace sphcox
