#include "sphcox/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sphcox/error.hpp"

namespace sphcox {

PointPattern::PointPattern(BandWindow window, std::vector<UnitVector> points)
    : window_(window), points_(std::move(points)) {
  for (const auto& p : points_) {
    require(window_.contains(p), ErrorCode::kInvalidArgument, "pattern point outside its window");
  }
}

PointPattern PointPattern::restricted_to(const BandWindow& window) const {
  std::vector<UnitVector> kept;
  kept.reserve(points_.size());
  for (const auto& p : points_) {
    if (window.contains(p)) kept.push_back(p);
  }
  return PointPattern(window, std::move(kept));
}

// ---------------------------------------------------------------------------
// IntensityModel

namespace {

// Extremum over longitude of the linear predictor on the circle of colatitude theta.
double lambda_on_circle(const IntensityModel& m, double theta, double sign) {
  const double c = std::cos(theta);
  const double horizontal = std::hypot(m.beta[0], m.beta[1]);
  return m.beta0 + m.beta[2] * c + sign * std::sin(theta) * horizontal + m.gamma * c * c;
}

// Minimizes f over [0, pi]: dense grid, then golden-section on the bracketing cell.
template <typename F>
double minimize_on_colatitude(F&& f) {
  constexpr int kGrid = 2000;
  int best = 0;
  double best_val = f(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = f(kPi * i / kGrid);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = kPi * std::max(0, best - 1) / kGrid;
  double b = kPi * std::min(kGrid, best + 1) / kGrid;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({best_val, f1, f2, f(a), f(b)});
}

}  // namespace

double IntensityModel::minimum() const {
  const double eta = minimize_on_colatitude([&](double t) { return lambda_on_circle(*this, t, -1.0); });
  return log_link ? std::exp(eta) : eta;
}

double IntensityModel::maximum() const {
  const double eta = -minimize_on_colatitude([&](double t) { return -lambda_on_circle(*this, t, 1.0); });
  return log_link ? std::exp(eta) : eta;
}

void IntensityModel::check_positive() const {
  for (const auto& u : fibonacci_points(4098)) {
    require((*this)(u) > 0.0, ErrorCode::kInvalidArgument,
            "intensity is not positive on the 4098-node reference grid");
  }
}

ThomasParams::ThomasParams(double kappa_, double xi_) : kappa(kappa_), xi(xi_) {
  require(kappa > 0.0 && std::isfinite(kappa), ErrorCode::kInvalidArgument, "Thomas kappa must be > 0");
  require(xi > 0.0 && std::isfinite(xi), ErrorCode::kInvalidArgument, "Thomas xi must be > 0");
}

MeanFunction LgcpParams::field_mean() const {
  const double half_var = 0.5 * model.evaluate(0.0);
  return [intensity = intensity, half_var](const UnitVector& u) {
    const double lambda = intensity(u);
    require(lambda > 0.0, ErrorCode::kInvalidArgument, "LGCP intensity must be positive");
    return std::log(lambda) - half_var;
  };
}

// ---------------------------------------------------------------------------
// Simulation

PointPattern simulate_poisson(const IntensityFunction& lambda, double lambda_max,
                              const BandWindow& window, Rng& rng) {
  require(lambda_max > 0.0 && std::isfinite(lambda_max), ErrorCode::kInvalidArgument,
          "lambda_max must be positive");
  std::poisson_distribution<long> count_dist(lambda_max * window.area());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const long n = count_dist(rng);
  std::vector<UnitVector> points;
  for (long i = 0; i < n; ++i) {
    const UnitVector u = window.sample_uniform(rng);
    const double value = lambda(u);
    require(value <= lambda_max * (1.0 + 1e-12), ErrorCode::kInvalidArgument,
            "intensity exceeds lambda_max");
    if (unit(rng) * lambda_max < value) points.push_back(u);
  }
  return PointPattern(window, std::move(points));
}

double vmf_density(const UnitVector& mean, double xi, const UnitVector& u) {
  // xi e^{xi t} / (4 pi sinh xi) = xi e^{xi (t - 1)} / (2 pi (1 - e^{-2 xi}))
  return xi * std::exp(xi * (mean.dot(u) - 1.0)) / (kTwoPi * -std::expm1(-2.0 * xi));
}

UnitVector sample_vmf(const UnitVector& mean, double xi, Rng& rng) {
  require(xi > 0.0, ErrorCode::kInvalidArgument, "vMF concentration must be > 0");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Inverse CDF of t = <u, mean>: t = 1 + log(w + (1-w) e^{-2xi}) / xi. Written
  // with w' = 1 - w as 1 + log1p(-w'(1 - e^{-2xi})) / xi, exact for any xi.
  const double w = unit(rng);
  double t = 1.0 + std::log1p(w * std::expm1(-2.0 * xi)) / xi;
  t = std::clamp(t, -1.0, 1.0);
  const double psi = kTwoPi * unit(rng);

  // Orthonormal frame (e1, e2) perpendicular to the mean direction.
  const double mx = mean.x(), my = mean.y(), mz = mean.z();
  double ax, ay, az;
  if (std::abs(mx) < 0.9) {
    ax = 0.0; ay = -mz; az = my;  // mean x (1,0,0)
  } else {
    ax = mz; ay = 0.0; az = -mx;  // mean x (0,1,0)
  }
  const double an = std::sqrt(ax * ax + ay * ay + az * az);
  ax /= an; ay /= an; az /= an;
  const double bx = my * az - mz * ay;
  const double by = mz * ax - mx * az;
  const double bz = mx * ay - my * ax;

  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  const double c1 = s * std::cos(psi);
  const double c2 = s * std::sin(psi);
  return UnitVector(t * mx + c1 * ax + c2 * bx, t * my + c1 * ay + c2 * by,
                    t * mz + c1 * az + c2 * bz);
}

PointPattern simulate_thomas(const ThomasParams& params, const IntensityModel& intensity,
                             const BandWindow& window, Rng& rng) {
  const double lambda_max = intensity.maximum();
  require(intensity.minimum() > 0.0, ErrorCode::kInvalidArgument,
          "Thomas intensity must be positive on the sphere");
  std::poisson_distribution<long> parent_count(kFourPi * params.kappa);
  std::poisson_distribution<long> offspring_count(lambda_max / params.kappa);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<UnitVector> points;
  const long n_parents = parent_count(rng);
  for (long p = 0; p < n_parents; ++p) {
    const UnitVector parent = uniform_on_sphere(rng);
    const long n_children = offspring_count(rng);
    for (long c = 0; c < n_children; ++c) {
      const UnitVector child = sample_vmf(parent, params.xi, rng);
      const bool retained = unit(rng) * lambda_max < intensity(child);
      if (retained && window.contains(child)) points.push_back(child);
    }
  }
  return PointPattern(window, std::move(points));
}

PointPattern simulate_grid_cox(const FieldFactorization& fact, std::span<const double> node_mean,
                               const BandWindow& window, Rng& rng) {
  const GridField field = simulate_grf(fact, node_mean, rng);
  const GridField driving = driving_intensity(field);
  const double lambda_max = *std::max_element(driving.values().begin(), driving.values().end());
  return simulate_poisson([&](const UnitVector& u) { return field_at(driving, u); }, lambda_max,
                          window, rng);
}

PointPattern simulate_lgcp(const LgcpParams& params, const FieldFactorization& fact,
                           const BandWindow& window, Rng& rng) {
  const std::vector<double> mean = node_values(fact.mesh(), params.field_mean());
  return simulate_grid_cox(fact, mean, window, rng);
}

PointPattern simulate_lgcp(const LgcpParams& params, std::shared_ptr<const GridMesh> mesh,
                           const BandWindow& window, Rng& rng) {
  const FieldFactorization fact = factorize(std::move(mesh), params.model);
  return simulate_lgcp(params, fact, window, rng);
}

PointPattern simulate_lgcp(const FieldSpec& spec, const FieldFactorization& fact,
                           const BandWindow& window, Rng& rng) {
  const std::vector<double> mean = node_values(fact.mesh(), spec.mean);
  return simulate_grid_cox(fact, mean, window, rng);
}

PointPattern independent_thinning(const PointPattern& pattern, const IntensityModel& intensity,
                                  Rng& rng) {
  const double lambda_min = intensity.minimum();
  require(lambda_min > 0.0, ErrorCode::kInvalidArgument, "thinning needs a positive intensity");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<UnitVector> kept;
  kept.reserve(pattern.size());
  for (const auto& u : pattern.points()) {
    if (unit(rng) * intensity(u) < lambda_min) kept.push_back(u);
  }
  return PointPattern(pattern.window(), std::move(kept));
}

double nth_order_correlation(const CovarianceModel& model, std::span<const UnitVector> points) {
  require(points.size() >= 2, ErrorCode::kInvalidArgument, "need at least two points");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      sum += model.evaluate(geodesic_distance(points[i], points[j]));
    }
  }
  return std::exp(sum);
}

FieldSpec palm_shift(const LgcpParams& params, const UnitVector& u) {
  MeanFunction base = params.field_mean();
  CovarianceModel model = params.model;
  return FieldSpec{[base = std::move(base), model, u](const UnitVector& v) {
                     return base(v) + model.evaluate(geodesic_distance(u, v));
                   },
                   params.model};
}

const IntensityModel& process_intensity(const ProcessModel& model) {
  return std::visit(
      [](const auto& m) -> const IntensityModel& {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LgcpProcess>) {
          return m.params.intensity;
        } else {
          return m.intensity;
        }
      },
      model);
}

PointPattern simulate_process(const ProcessModel& model, const BandWindow& window, Rng& rng) {
  struct Visitor {
    const BandWindow& window;
    Rng& rng;
    PointPattern operator()(const PoissonProcess& m) const {
      require(m.intensity.minimum() >= 0.0, ErrorCode::kInvalidArgument,
              "Poisson intensity must be non-negative");
      return simulate_poisson(m.intensity, m.intensity.maximum(), window, rng);
    }
    PointPattern operator()(const ThomasProcess& m) const {
      return simulate_thomas(m.params, m.intensity, window, rng);
    }
    PointPattern operator()(const LgcpProcess& m) const {
      require(m.factorization != nullptr, ErrorCode::kInvalidArgument,
              "LGCP model needs a field factorization");
      return simulate_lgcp(m.params, *m.factorization, window, rng);
    }
  };
  return std::visit(Visitor{window, rng}, model);
}

}  // namespace sphcox
