#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sphcox/covariance.hpp"
#include "sphcox/point_process.hpp"
#include "sphcox/summary.hpp"

namespace sphcox {

/// Integration interval and settings of the minimum-contrast criterion
///   int_a^b (Khat(r)^e - K(r)^e)^2 dr.
struct ContrastSpec {
  double a = 0.0;
  double b = 1.396;
  double exponent = 0.25;
  std::size_t n_quad = 512;

  ContrastSpec() = default;
  ContrastSpec(double a_, double b_, double exponent_ = 0.25, std::size_t n_quad_ = 512);

  /// [0, 0.175], about ten degrees.
  static ContrastSpec short_interval() { return ContrastSpec(0.0, 0.175); }
  /// [0, 1.396].
  static ContrastSpec long_interval() { return ContrastSpec(0.0, 1.396); }

  /// Trapezoid nodes a + i (b - a) / n_quad, i = 0..n_quad.
  DistanceGrid nodes() const;
};

using KFunction = std::function<double(double)>;

/// Composite trapezoid over n_quad panels with Khat interpolated linearly.
/// Throws kMissingData if Khat is missing inside [a, b].
double contrast(const SummaryCurve& k_hat, const KFunction& k_model, const ContrastSpec& spec);

struct TraceEntry {
  std::vector<double> params;
  double value;
};

struct FitResult {
  std::vector<std::string> param_names;
  std::vector<double> params;
  double contrast_value = 0.0;
  std::size_t n_evals = 0;
  bool converged = false;
  /// Some parameter ended on its search bound (e.g. variance -> 0 for Poisson-like data).
  bool at_boundary = false;
  std::vector<TraceEntry> trace;

  ThomasParams thomas_params() const;
  CovarianceModel covariance_model() const;
};

/// Starting points in the optimizer's transformed coordinates.
using InitGrid = std::vector<std::vector<double>>;

/// Default 8-point Halton design over (log kappa, log xi).
InitGrid default_thomas_init();
/// Default 8-point Halton design over (log sigma^2, logit delta, log tau).
InitGrid default_lgcp_init();

/// Minimizes the contrast over (kappa, xi) with Nelder-Mead in log coordinates,
/// started from the best point of the init grid.
FitResult fit_thomas(const SummaryCurve& k_hat, const ContrastSpec& spec,
                     const InitGrid& init = default_thomas_init(),
                     ThomasKForm form = ThomasKForm::kExact);

/// Minimizes the contrast over multiquadric (sigma^2, delta, tau) in
/// (log, logit, log) coordinates; K comes from g = exp(c) by quadrature.
FitResult fit_lgcp(const SummaryCurve& k_hat, const ContrastSpec& spec,
                   Family family = Family::kMultiquadric, const InitGrid& init = default_lgcp_init());

/// Model K-function of an LGCP with the given covariance, on the contrast nodes.
SummaryCurve lgcp_k(const CovarianceModel& model, const DistanceGrid& grid);

namespace detail {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t n_evals = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization. Converged once the simplex diameter
/// drops below `tolerance`; one restart from the optimum confirms it.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, double initial_step, double tolerance,
                             std::size_t max_evals);

}  // namespace detail

}  // namespace sphcox
