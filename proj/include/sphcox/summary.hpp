#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "sphcox/covariance.hpp"
#include "sphcox/point_process.hpp"

namespace sphcox {

/// Sentinel for an undefined estimate (e.g. an empty eroded window).
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Strictly increasing distances in [0, pi].
class DistanceGrid {
 public:
  explicit DistanceGrid(std::vector<double> r_values);

  /// n equally spaced values from lo to hi inclusive.
  static DistanceGrid linspace(double lo, double hi, std::size_t n);

  const std::vector<double>& values() const { return r_; }
  std::size_t size() const { return r_.size(); }
  double operator[](std::size_t i) const { return r_[i]; }

 private:
  std::vector<double> r_;
};

enum class CurveKind { kK, kF, kG, kJ, kPcf };

std::string_view curve_kind_name(CurveKind kind);
CurveKind parse_curve_kind(std::string_view name);

struct SummaryCurve {
  DistanceGrid grid;
  std::vector<double> values;
  CurveKind kind;

  SummaryCurve(DistanceGrid grid_, std::vector<double> values_, CurveKind kind_);

  /// Linear interpolation; throws kMissingData if a bracketing value is missing.
  double interpolate(double r) const;
};

using PcfFunction = std::function<double(double)>;

/// K(r) = 2pi(1 - cos r).
SummaryCurve k_poisson(const DistanceGrid& grid);

/// K(r) = 2pi int_0^r g(s) sin s ds by adaptive Simpson (1e-9 per panel).
SummaryCurve k_from_pcf(const PcfFunction& g, const DistanceGrid& grid);
double k_from_pcf(const PcfFunction& g, double r);

/// Which closed form to use for the Thomas K-function excess
/// (cosh 2xi - cosh(sqrt(2 xi^2 (1 + cos r)))) / D.
enum class ThomasKForm {
  /// D = 2 kappa sinh^2 xi: the integral of the vMF-Thomas pair correlation,
  /// so that K(pi) = 4pi + 1/kappa.
  kExact,
  /// D = 4 kappa sinh^2 xi.
  kFourKappaSinh,
  /// D = 4 kappa sin^2 xi, kept only for comparison with printed values.
  kFourKappaSin,
};

double thomas_k(const ThomasParams& params, double r, ThomasKForm form = ThomasKForm::kExact);
SummaryCurve k_thomas(const ThomasParams& params, const DistanceGrid& grid,
                      ThomasKForm form = ThomasKForm::kExact);

/// g(r) = 1 + xi sinh(xi rho) / (4 pi kappa rho sinh^2 xi), rho = 2 cos(r/2).
double thomas_pcf(const ThomasParams& params, double r);

/// g(r) = exp(c(r)).
SummaryCurve pcf_curve(const CovarianceModel& model, const DistanceGrid& grid);

/// Border-corrected inhomogeneous K:
///   sum_{u in X, u in W-r} sum_{v != u, d(u,v) <= r} 1/(lambda(u) lambda(v)) / |W-r|.
/// Values are missing where the eroded window is empty.
SummaryCurve estimate_k_inhom(const PointPattern& pattern, const IntensityFunction& lambda,
                              const DistanceGrid& grid);

/// Border-corrected ring estimate of the pair correlation with a box kernel of
/// the given half width.
SummaryCurve estimate_pcf(const PointPattern& pattern, const IntensityFunction& lambda,
                          const DistanceGrid& grid, double half_width);

struct FgjCurves {
  SummaryCurve F;
  SummaryCurve G;
  SummaryCurve J;
};

inline constexpr std::size_t kDefaultReferencePoints = 2048;

/// Reduced-sample F, G and J = (1-G)/(1-F) for a homogeneous pattern, using a
/// Fibonacci lattice of n_ref reference locations for F.
FgjCurves estimate_fgj(const PointPattern& pattern, const DistanceGrid& grid,
                       std::size_t n_ref = kDefaultReferencePoints);

/// Geodesic distance from each query to its nearest pattern point (infinity if
/// the pattern is empty). With exclude_self, query i skips points[i].
std::vector<double> nearest_distances(std::span<const UnitVector> queries,
                                      std::span<const UnitVector> points, bool exclude_self);

}  // namespace sphcox
