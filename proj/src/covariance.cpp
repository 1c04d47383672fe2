#include "sphcox/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sphcox/error.hpp"
#include "sphcox/geometry.hpp"

namespace sphcox {

namespace {

constexpr std::array<std::string_view, 10> kFamilyNames = {
    "powered_exponential", "matern",    "generalized_cauchy", "dagum",       "multiquadric",
    "sine_power",          "spherical", "askey",              "c2_wendland", "c4_wendland",
};

void check_range(bool ok, std::string_view family, std::string_view what) {
  require(ok, ErrorCode::kInvalidArgument,
          std::string(family) + ": parameter out of range (" + std::string(what) + ")");
}

void validate(Family family, const ShapeParams& p, double variance) {
  const auto name = family_name(family);
  check_range(std::isfinite(variance) && variance > 0.0, name, "variance > 0");
  switch (family) {
    case Family::kPoweredExponential:
      check_range(p.alpha > 0.0 && p.alpha <= 1.0, name, "alpha in (0,1]");
      check_range(p.phi > 0.0, name, "phi > 0");
      break;
    case Family::kMatern:
      check_range(p.nu > 0.0 && p.nu <= 0.5, name, "0 < nu <= 1/2");
      check_range(p.phi > 0.0, name, "phi > 0");
      break;
    case Family::kGeneralizedCauchy:
      check_range(p.alpha > 0.0 && p.alpha <= 1.0, name, "alpha in (0,1]");
      check_range(p.phi > 0.0, name, "phi > 0");
      check_range(p.tau > 0.0, name, "tau > 0");
      break;
    case Family::kDagum:
      check_range(p.tau > 0.0 && p.tau <= 1.0, name, "tau in (0,1]");
      check_range(p.alpha > 0.0 && p.alpha < p.tau, name, "0 < alpha < tau");
      check_range(p.phi > 0.0, name, "phi > 0");
      break;
    case Family::kMultiquadric:
      check_range(p.delta > 0.0 && p.delta < 1.0, name, "delta in (0,1)");
      check_range(p.tau > 0.0, name, "tau > 0");
      break;
    case Family::kSinePower:
      check_range(p.alpha > 0.0 && p.alpha < 2.0, name, "alpha in (0,2)");
      break;
    case Family::kSpherical:
      check_range(p.phi > 0.0, name, "phi > 0");
      break;
    case Family::kAskey:
      check_range(p.phi > 0.0, name, "phi > 0");
      check_range(p.tau >= 2.0, name, "tau >= 2");
      break;
    case Family::kC2Wendland:
      check_range(p.phi > 0.0 && p.phi <= kPi, name, "phi in (0,pi]");
      check_range(p.tau >= 4.0, name, "tau >= 4");
      break;
    case Family::kC4Wendland:
      check_range(p.phi > 0.0 && p.phi <= kPi, name, "phi in (0,pi]");
      check_range(p.tau >= 6.0, name, "tau >= 6");
      break;
  }
  for (double v : {p.alpha, p.phi, p.nu, p.tau, p.delta}) {
    check_range(std::isfinite(v), name, "finite parameters");
  }
}

// Matern scaling A_nu = pi / (sin(pi nu) Gamma(nu)).
double matern_a(double nu) { return kPi / (std::sin(kPi * nu) * std::tgamma(nu)); }

// Below this r/phi the Matern correlation uses the ascending series
//   c0 = A_nu (E_{-nu}(x) - (x/2)^{2nu} E_nu(x)),
//   E_nu(x) = sum_n (x^2/4)^n / (n! Gamma(n + nu + 1)).
constexpr double kMaternSeriesLimit = 2.0;

struct MaternSeries {
  double tail_minus = 0.0;  // E_{-nu}(x) - 1/Gamma(1 - nu)
  double e_plus = 0.0;      // E_nu(x)
};

MaternSeries matern_series(double nu, double x) {
  const double q = 0.25 * x * x;
  MaternSeries out;
  double t_plus = 1.0 / std::tgamma(1.0 + nu);
  double t_minus = 1.0 / std::tgamma(1.0 - nu);
  out.e_plus = t_plus;
  for (int n = 1; n < 200; ++n) {
    const double dn = n;
    t_plus *= q / (dn * (dn + nu));
    t_minus *= q / (dn * (dn - nu));
    out.e_plus += t_plus;
    out.tail_minus += t_minus;
    if (std::abs(t_plus) < 1e-16 * std::abs(out.e_plus) &&
        std::abs(t_minus) < 1e-16 * std::max(1.0, std::abs(out.tail_minus))) {
      break;
    }
  }
  return out;
}

double matern_deficit(double nu, double x) {
  if (x == 0.0) return 0.0;
  if (x < kMaternSeriesLimit) {
    const MaternSeries s = matern_series(nu, x);
    return matern_a(nu) * (std::pow(0.5 * x, 2.0 * nu) * s.e_plus - s.tail_minus);
  }
  return 1.0 - 2.0 / std::tgamma(nu) * std::pow(0.5 * x, nu) * std::cyl_bessel_k(nu, x);
}

double matern_correlation(double nu, double x) {
  if (x < kMaternSeriesLimit) return 1.0 - matern_deficit(nu, x);
  return 2.0 / std::tgamma(nu) * std::pow(0.5 * x, nu) * std::cyl_bessel_k(nu, x);
}

// log of the multiquadric base (1-delta)^2 / (1 + delta^2 - 2 delta cos r).
double multiquadric_log_base(double delta, double r) {
  const double half = std::sin(0.5 * r);
  const double one_minus = 1.0 - delta;
  return -std::log1p(4.0 * delta * half * half / (one_minus * one_minus));
}

}  // namespace

std::string_view family_name(Family family) { return kFamilyNames[static_cast<std::size_t>(family)]; }

Family parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return static_cast<Family>(i);
  }
  throw Error(ErrorCode::kParse, "unknown covariance family '" + std::string(name) + "'");
}

CovarianceModel::CovarianceModel(Family family, ShapeParams params, double variance)
    : family_(family), params_(params), variance_(variance) {
  validate(family, params, variance);
}

CovarianceModel CovarianceModel::powered_exponential(double variance, double alpha, double phi) {
  ShapeParams p;
  p.alpha = alpha;
  p.phi = phi;
  return {Family::kPoweredExponential, p, variance};
}

CovarianceModel CovarianceModel::matern(double variance, double nu, double phi) {
  ShapeParams p;
  p.nu = nu;
  p.phi = phi;
  return {Family::kMatern, p, variance};
}

CovarianceModel CovarianceModel::generalized_cauchy(double variance, double alpha, double phi,
                                                    double tau) {
  ShapeParams p;
  p.alpha = alpha;
  p.phi = phi;
  p.tau = tau;
  return {Family::kGeneralizedCauchy, p, variance};
}

CovarianceModel CovarianceModel::dagum(double variance, double alpha, double phi, double tau) {
  ShapeParams p;
  p.alpha = alpha;
  p.phi = phi;
  p.tau = tau;
  return {Family::kDagum, p, variance};
}

CovarianceModel CovarianceModel::multiquadric(double variance, double delta, double tau) {
  ShapeParams p;
  p.delta = delta;
  p.tau = tau;
  return {Family::kMultiquadric, p, variance};
}

CovarianceModel CovarianceModel::sine_power(double variance, double alpha) {
  ShapeParams p;
  p.alpha = alpha;
  return {Family::kSinePower, p, variance};
}

CovarianceModel CovarianceModel::spherical(double variance, double phi) {
  ShapeParams p;
  p.phi = phi;
  return {Family::kSpherical, p, variance};
}

CovarianceModel CovarianceModel::askey(double variance, double phi, double tau) {
  ShapeParams p;
  p.phi = phi;
  p.tau = tau;
  return {Family::kAskey, p, variance};
}

CovarianceModel CovarianceModel::c2_wendland(double variance, double phi, double tau) {
  ShapeParams p;
  p.phi = phi;
  p.tau = tau;
  return {Family::kC2Wendland, p, variance};
}

CovarianceModel CovarianceModel::c4_wendland(double variance, double phi, double tau) {
  ShapeParams p;
  p.phi = phi;
  p.tau = tau;
  return {Family::kC4Wendland, p, variance};
}

double CovarianceModel::correlation(double r) const {
  const ShapeParams& p = params_;
  switch (family_) {
    case Family::kPoweredExponential:
      return std::exp(-std::pow(r, p.alpha) / p.phi);
    case Family::kMatern:
      return matern_correlation(p.nu, r / p.phi);
    case Family::kGeneralizedCauchy:
      return std::pow(1.0 + std::pow(r / p.phi, p.alpha), -p.tau / p.alpha);
    case Family::kMultiquadric:
      return std::exp(p.tau * multiquadric_log_base(p.delta, r));
    case Family::kSpherical: {
      const double x = r / p.phi;
      if (x >= 1.0) return 0.0;
      return (1.0 + 0.5 * x) * (1.0 - x) * (1.0 - x);
    }
    case Family::kAskey: {
      const double x = r / p.phi;
      return x >= 1.0 ? 0.0 : std::pow(1.0 - x, p.tau);
    }
    case Family::kC2Wendland: {
      const double x = r / p.phi;
      return x >= 1.0 ? 0.0 : (1.0 + p.tau * x) * std::pow(1.0 - x, p.tau);
    }
    case Family::kC4Wendland: {
      const double x = r / p.phi;
      if (x >= 1.0) return 0.0;
      const double poly = 1.0 + p.tau * x + (p.tau * p.tau - 1.0) / 3.0 * x * x;
      return poly * std::pow(1.0 - x, p.tau);
    }
    case Family::kDagum:
    case Family::kSinePower:
      return 1.0 - correlation_deficit(r);
  }
  return 0.0;
}

double CovarianceModel::correlation_deficit(double r) const {
  const ShapeParams& p = params_;
  switch (family_) {
    case Family::kPoweredExponential:
      return -std::expm1(-std::pow(r, p.alpha) / p.phi);
    case Family::kMatern:
      return matern_deficit(p.nu, r / p.phi);
    case Family::kGeneralizedCauchy:
      return -std::expm1(-p.tau / p.alpha * std::log1p(std::pow(r / p.phi, p.alpha)));
    case Family::kDagum: {
      const double xt = std::pow(r / p.phi, p.tau);
      return std::pow(xt / (1.0 + xt), p.alpha / p.tau);
    }
    case Family::kMultiquadric:
      return -std::expm1(p.tau * multiquadric_log_base(p.delta, r));
    case Family::kSinePower:
      return std::pow(std::sin(0.5 * r), p.alpha);
    case Family::kSpherical: {
      const double x = r / p.phi;
      return x >= 1.0 ? 1.0 : 0.5 * x * (3.0 - x * x);
    }
    case Family::kAskey: {
      const double x = r / p.phi;
      return x >= 1.0 ? 1.0 : -std::expm1(p.tau * std::log1p(-x));
    }
    case Family::kC2Wendland: {
      const double x = r / p.phi;
      if (x >= 1.0) return 1.0;
      return -std::expm1(std::log1p(p.tau * x) + p.tau * std::log1p(-x));
    }
    case Family::kC4Wendland: {
      const double x = r / p.phi;
      if (x >= 1.0) return 1.0;
      const double lead = p.tau * x + (p.tau * p.tau - 1.0) / 3.0 * x * x;
      return -std::expm1(std::log1p(lead) + p.tau * std::log1p(-x));
    }
  }
  return 0.0;
}

LimitConstants limit_constants(const CovarianceModel& model) {
  const ShapeParams& p = model.params();
  switch (model.family()) {
    case Family::kPoweredExponential:
      return {p.alpha, 1.0 / p.phi};
    case Family::kMatern:
      return {2.0 * p.nu,
              matern_a(p.nu) / (std::pow(2.0 * p.phi, 2.0 * p.nu) * std::tgamma(p.nu + 1.0))};
    case Family::kGeneralizedCauchy:
      return {p.alpha, p.tau / (p.alpha * std::pow(p.phi, p.alpha))};
    case Family::kDagum:
      return {p.alpha, std::pow(p.phi, -p.alpha)};
    case Family::kMultiquadric:
      throw Error(ErrorCode::kUnsupported,
                  "multiquadric: handled by dedicated certificate, no tabulated limit");
    case Family::kSinePower:
      return {p.alpha, std::pow(2.0, -p.alpha)};
    case Family::kSpherical:
      return {1.0, 1.5 / p.phi};
    case Family::kAskey:
      return {1.0, p.tau / p.phi};
    case Family::kC2Wendland:
      return {2.0, p.tau * (p.tau + 1.0) / (2.0 * p.phi * p.phi)};
    case Family::kC4Wendland:
      // Second-order Taylor coefficient of 1 - (1 + tau x + (tau^2-1)x^2/3)(1-x)^tau.
      return {2.0, (p.tau + 1.0) * (p.tau + 2.0) / (6.0 * p.phi * p.phi)};
  }
  return {};
}

bool verify_certificate(const CovarianceModel& model, const HoelderCertificate& cert,
                        std::size_t n_samples) {
  require(n_samples >= 1, ErrorCode::kInvalidArgument, "need at least one sample");
  constexpr double kFloor = 1e-9;
  if (cert.s <= kFloor) return true;
  const double log_lo = std::log(kFloor);
  const double log_span = std::log(cert.s) - log_lo;
  const double n1 = static_cast<double>(n_samples) + 1.0;
  for (std::size_t i = 1; i <= n_samples; ++i) {
    const double r = std::exp(log_lo + log_span * static_cast<double>(i) / n1);
    if (model.variogram(r) > cert.m * std::pow(r, 0.5 * cert.ell)) return false;
  }
  return true;
}

HoelderCertificate holder_certificate(const CovarianceModel& model, double multiquadric_alpha) {
  if (model.family() == Family::kMultiquadric) {
    require(multiquadric_alpha > 0.0 && multiquadric_alpha < 0.5, ErrorCode::kInvalidArgument,
            "multiquadric certificate needs alpha in (0, 1/2)");
    const double delta = model.params().delta;
    const double p = 2.0 * delta / (1.0 + delta * delta);
    // 1 - c0 <= tau~ p (1 - cos r) / (1 - p cos r) <= tau~ p r^2 / (2 (1 - p)), so the
    // bound m r^alpha with m = p sigma^2 tau~ / 2 holds once r^(2 - alpha) <= 1 - p.
    const double s = std::min(1.0, std::pow(1.0 - p, 1.0 / (2.0 - multiquadric_alpha)));
    return {s, 2.0 * multiquadric_alpha,
            p * model.variance() * std::max(1.0, model.params().tau) / 2.0};
  }

  constexpr double kEpsilon = 0.01;
  constexpr std::size_t kSearchSamples = 40000;
  const LimitConstants lim = limit_constants(model);
  HoelderCertificate cert{1.0, std::min(lim.A / 2.0, 1.0 - kEpsilon), 1.1 * lim.B * model.variance()};
  for (int halving = 0; halving < 80; ++halving) {
    if (verify_certificate(model, cert, kSearchSamples)) {
      if (halving > 0) cert.s *= 0.999;  // stay clear of the crossing between samples
      return cert;
    }
    cert.s *= 0.5;
  }
  throw Error(ErrorCode::kNumerical, std::string(family_name(model.family())) +
                                         ": no certificate radius found");
}

}  // namespace sphcox
