#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sphcox {

/// The ten closed-form isotropic correlation families on the sphere.
enum class Family {
  kPoweredExponential,
  kMatern,
  kGeneralizedCauchy,
  kDagum,
  kMultiquadric,
  kSinePower,
  kSpherical,
  kAskey,
  kC2Wendland,
  kC4Wendland,
};

inline constexpr std::array<Family, 10> kAllFamilies = {
    Family::kPoweredExponential, Family::kMatern,    Family::kGeneralizedCauchy,
    Family::kDagum,              Family::kMultiquadric, Family::kSinePower,
    Family::kSpherical,          Family::kAskey,     Family::kC2Wendland,
    Family::kC4Wendland,
};

std::string_view family_name(Family family);
Family parse_family(std::string_view name);

/// Shape parameters. Each family reads only the ones it uses:
///
///   powered_exponential  alpha in (0,1], phi > 0
///   matern               0 < nu <= 1/2, phi > 0
///   generalized_cauchy   alpha in (0,1], phi > 0, tau > 0
///   dagum                0 < alpha < tau <= 1, phi > 0
///   multiquadric         delta in (0,1), tau > 0
///   sine_power           alpha in (0,2)
///   spherical            phi > 0
///   askey                phi > 0, tau >= 2
///   c2_wendland          phi in (0,pi], tau >= 4
///   c4_wendland          phi in (0,pi], tau >= 6
struct ShapeParams {
  double alpha = 1.0;
  double phi = 1.0;
  double nu = 0.5;
  double tau = 1.0;
  double delta = 0.5;

  bool operator==(const ShapeParams&) const = default;
};

/// c(r) = variance * c0(r) for one catalog family. Parameters are validated on
/// construction, so evaluation never fails for r in [0, pi].
class CovarianceModel {
 public:
  CovarianceModel(Family family, ShapeParams params, double variance);

  static CovarianceModel powered_exponential(double variance, double alpha, double phi);
  static CovarianceModel matern(double variance, double nu, double phi);
  static CovarianceModel generalized_cauchy(double variance, double alpha, double phi, double tau);
  static CovarianceModel dagum(double variance, double alpha, double phi, double tau);
  static CovarianceModel multiquadric(double variance, double delta, double tau);
  static CovarianceModel sine_power(double variance, double alpha);
  static CovarianceModel spherical(double variance, double phi);
  static CovarianceModel askey(double variance, double phi, double tau);
  static CovarianceModel c2_wendland(double variance, double phi, double tau);
  static CovarianceModel c4_wendland(double variance, double phi, double tau);

  Family family() const { return family_; }
  const ShapeParams& params() const { return params_; }
  double variance() const { return variance_; }

  /// c(r) = variance * c0(r).
  double evaluate(double r) const { return variance_ * correlation(r); }
  /// c0(r), with c0(0) = 1.
  double correlation(double r) const;
  /// 1 - c0(r), evaluated without cancellation near r = 0.
  double correlation_deficit(double r) const;
  /// gamma(r) = c(0) - c(r).
  double variogram(double r) const { return variance_ * correlation_deficit(r); }

  CovarianceModel with_variance(double variance) const {
    return CovarianceModel(family_, params_, variance);
  }

  bool operator==(const CovarianceModel&) const = default;

 private:
  Family family_;
  ShapeParams params_;
  double variance_;
};

/// Constants (s, ell, m) with gamma(r) <= m * r^(ell/2) for all r < s, which
/// make the mean-zero field locally Hoelder continuous of every order below ell/2.
struct HoelderCertificate {
  double s = 1.0;
  double ell = 0.5;
  double m = 1.0;
};

/// lim_{r -> 0} (1 - c0(r)) / r^A = B.
struct LimitConstants {
  double A = 1.0;
  double B = 1.0;
};

/// Small-distance limit of the correlation deficit. Throws kUnsupported for the
/// multiquadric family, whose certificate is derived directly.
LimitConstants limit_constants(const CovarianceModel& model);

/// Multiquadric: ell = 2*alpha, m = p*variance*max(1,tau)/2 with
/// p = 2 delta / (1 + delta^2), and s = min(1, (1 - p)^(1/(2 - alpha))). Other families: ell = min(A/2, 1 - 0.01),
/// m = 1.1*B*variance, and s halved from 1 until the bound verifies.
HoelderCertificate holder_certificate(const CovarianceModel& model,
                                      double multiquadric_alpha = 0.49);

/// Checks gamma(r) <= m r^(ell/2) on n_samples log-spaced r in (1e-9, s).
bool verify_certificate(const CovarianceModel& model, const HoelderCertificate& cert,
                        std::size_t n_samples);

}  // namespace sphcox
