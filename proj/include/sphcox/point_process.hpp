#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "sphcox/covariance.hpp"
#include "sphcox/gaussian_field.hpp"
#include "sphcox/geometry.hpp"
#include "sphcox/random.hpp"

namespace sphcox {

/// Finite point configuration observed in a window. Every point lies in the window.
class PointPattern {
 public:
  explicit PointPattern(BandWindow window = BandWindow::full_sphere(),
                        std::vector<UnitVector> points = {});

  const BandWindow& window() const { return window_; }
  const std::vector<UnitVector>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// The points that fall inside `window`, carrying that window.
  PointPattern restricted_to(const BandWindow& window) const;

 private:
  BandWindow window_;
  std::vector<UnitVector> points_;
};

/// Linear predictor eta(u) = beta0 + <u, beta> + gamma cos^2(theta). The
/// intensity per steradian is eta(u), or exp(eta(u)) with the log link.
struct IntensityModel {
  double beta0 = 1.0;
  std::array<double, 3> beta = {0.0, 0.0, 0.0};
  double gamma = 0.0;
  bool log_link = false;

  static IntensityModel constant(double lambda) { return {lambda, {0.0, 0.0, 0.0}, 0.0}; }
  /// Coefficients of the galaxy-catalog intensity fit.
  static IntensityModel galaxy_fit() { return {6.06, {-0.112, -0.149, 0.320}, 1.971}; }
  /// The same coefficients read as a log-linear model.
  static IntensityModel galaxy_fit_log() {
    IntensityModel m = galaxy_fit();
    m.log_link = true;
    return m;
  }

  double predictor(const UnitVector& u) const {
    return beta0 + beta[0] * u.x() + beta[1] * u.y() + beta[2] * u.z() + gamma * u.z() * u.z();
  }
  double operator()(const UnitVector& u) const {
    const double eta = predictor(u);
    return log_link ? std::exp(eta) : eta;
  }

  bool is_constant() const { return beta == std::array<double, 3>{0.0, 0.0, 0.0} && gamma == 0.0; }

  /// Infimum and supremum over the sphere (colatitude grid plus golden-section
  /// refinement; the longitude extremum is analytic).
  double minimum() const;
  double maximum() const;

  /// Throws kInvalidArgument unless lambda > 0 on every node of a 4098-node grid.
  void check_positive() const;

  bool operator==(const IntensityModel&) const = default;
};

struct ThomasParams {
  double kappa = 1.0;  // parent intensity per steradian
  double xi = 1.0;     // von Mises-Fisher concentration

  ThomasParams() = default;
  ThomasParams(double kappa, double xi);

  bool operator==(const ThomasParams&) const = default;
};

struct LgcpParams {
  IntensityModel intensity;
  CovarianceModel model;

  /// GRF mean log lambda(u) - c(0)/2, which gives the process intensity lambda.
  MeanFunction field_mean() const;
};

using IntensityFunction = std::function<double(const UnitVector&)>;

/// Poisson process by thinning: N ~ Poisson(lambda_max * area) uniform
/// candidates in the window, each kept with probability lambda(u)/lambda_max.
PointPattern simulate_poisson(const IntensityFunction& lambda, double lambda_max,
                              const BandWindow& window, Rng& rng);

/// Density xi / (4 pi sinh xi) exp(xi <u, mean>).
double vmf_density(const UnitVector& mean, double xi, const UnitVector& u);

/// One von Mises-Fisher draw by inverse CDF of the cosine to the mean direction.
UnitVector sample_vmf(const UnitVector& mean, double xi, Rng& rng);

/// Inhomogeneous Thomas process via its cluster construction: parents on the
/// whole sphere, Poisson(lambda_max/kappa) vMF offspring per parent thinned by
/// lambda(u)/lambda_max, then clipped to the window.
PointPattern simulate_thomas(const ThomasParams& params, const IntensityModel& intensity,
                             const BandWindow& window, Rng& rng);

/// Cox process driven by exp(Y) for a GRF Y given by its node means and a
/// factorization; the field is extended to the sphere by nearest node.
PointPattern simulate_grid_cox(const FieldFactorization& fact, std::span<const double> node_mean,
                               const BandWindow& window, Rng& rng);

/// Log Gaussian Cox process on a prebuilt factorization of params.model.
PointPattern simulate_lgcp(const LgcpParams& params, const FieldFactorization& fact,
                           const BandWindow& window, Rng& rng);

/// Convenience overload that factorizes params.model over the mesh first.
PointPattern simulate_lgcp(const LgcpParams& params, std::shared_ptr<const GridMesh> mesh,
                           const BandWindow& window, Rng& rng);

/// LGCP whose GRF has an explicit mean (e.g. a Palm-shifted field).
PointPattern simulate_lgcp(const FieldSpec& spec, const FieldFactorization& fact,
                           const BandWindow& window, Rng& rng);

/// Keeps each point with probability lambda_min / lambda(u).
PointPattern independent_thinning(const PointPattern& pattern, const IntensityModel& intensity,
                                  Rng& rng);

/// exp(sum_{i<j} c(d(u_i, u_j))): the n-th order correlation of an LGCP.
double nth_order_correlation(const CovarianceModel& model, std::span<const UnitVector> points);

/// Reduced Palm distribution at u: same covariance, mean shifted by c(d(u, .)).
FieldSpec palm_shift(const LgcpParams& params, const UnitVector& u);

// ---------------------------------------------------------------------------
// Fitted-model descriptions used by the goodness-of-fit pipeline.

struct PoissonProcess {
  IntensityModel intensity;
};

struct ThomasProcess {
  ThomasParams params;
  IntensityModel intensity;
};

struct LgcpProcess {
  LgcpParams params;
  std::shared_ptr<const FieldFactorization> factorization;
};

using ProcessModel = std::variant<PoissonProcess, ThomasProcess, LgcpProcess>;

const IntensityModel& process_intensity(const ProcessModel& model);

/// One realization of the model restricted to the window.
PointPattern simulate_process(const ProcessModel& model, const BandWindow& window, Rng& rng);

}  // namespace sphcox
