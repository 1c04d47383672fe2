#include "sphcox/summary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sphcox/error.hpp"

namespace sphcox {

DistanceGrid::DistanceGrid(std::vector<double> r_values) : r_(std::move(r_values)) {
  require(!r_.empty(), ErrorCode::kInvalidArgument, "distance grid is empty");
  require(r_.front() >= 0.0 && r_.back() <= kPi, ErrorCode::kInvalidArgument,
          "distance grid must lie in [0, pi]");
  for (std::size_t i = 1; i < r_.size(); ++i) {
    require(r_[i] > r_[i - 1], ErrorCode::kInvalidArgument, "distance grid must be strictly increasing");
  }
}

DistanceGrid DistanceGrid::linspace(double lo, double hi, std::size_t n) {
  require(n >= 2 && hi > lo, ErrorCode::kInvalidArgument, "linspace needs n >= 2 and hi > lo");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  r.back() = hi;
  return DistanceGrid(std::move(r));
}

std::string_view curve_kind_name(CurveKind kind) {
  switch (kind) {
    case CurveKind::kK: return "K";
    case CurveKind::kF: return "F";
    case CurveKind::kG: return "G";
    case CurveKind::kJ: return "J";
    case CurveKind::kPcf: return "pcf";
  }
  return "?";
}

CurveKind parse_curve_kind(std::string_view name) {
  for (CurveKind k : {CurveKind::kK, CurveKind::kF, CurveKind::kG, CurveKind::kJ, CurveKind::kPcf}) {
    if (curve_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown curve kind '" + std::string(name) + "'");
}

SummaryCurve::SummaryCurve(DistanceGrid grid_, std::vector<double> values_, CurveKind kind_)
    : grid(std::move(grid_)), values(std::move(values_)), kind(kind_) {
  require(values.size() == grid.size(), ErrorCode::kInvalidArgument,
          "curve needs one value per grid point");
}

double SummaryCurve::interpolate(double r) const {
  const auto& rv = grid.values();
  require(r >= rv.front() - 1e-12 && r <= rv.back() + 1e-12, ErrorCode::kOutOfRange,
          "interpolation point outside the curve grid");
  auto it = std::upper_bound(rv.begin(), rv.end(), r);
  std::size_t hi = static_cast<std::size_t>(it - rv.begin());
  if (hi == 0) hi = 1;
  if (hi >= rv.size()) hi = rv.size() - 1;
  const std::size_t lo = hi - 1;
  if (rv.size() == 1) return values[0];
  const double a = values[lo];
  const double b = values[hi];
  const double t = std::clamp((r - rv[lo]) / (rv[hi] - rv[lo]), 0.0, 1.0);
  const bool ok = (t == 1.0 || !is_missing(a)) && (t == 0.0 || !is_missing(b));
  require(ok, ErrorCode::kMissingData, "curve value missing at r=" + std::to_string(r));
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return a + t * (b - a);
}

// ---------------------------------------------------------------------------
// Theoretical curves

SummaryCurve k_poisson(const DistanceGrid& grid) {
  std::vector<double> v;
  v.reserve(grid.size());
  for (double r : grid.values()) v.push_back(kTwoPi * (1.0 - std::cos(r)));
  return SummaryCurve(grid, std::move(v), CurveKind::kK);
}

namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

template <typename F>
double adaptive_simpson(F&& f, const SimpsonPanel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m);
  const double rm = 0.5 * (m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_panel(F&& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, {a, b, fa, fm, fb, whole}, tol, 40);
}

constexpr double kPanelTolerance = 1e-9;

auto k_integrand(const PcfFunction& g) {
  return [&g](double s) {
    const double value = g(s);
    require(std::isfinite(value), ErrorCode::kNumerical,
            "pair correlation is not finite at s=" + std::to_string(s));
    return kTwoPi * value * std::sin(s);
  };
}

}  // namespace

SummaryCurve k_from_pcf(const PcfFunction& g, const DistanceGrid& grid) {
  auto f = k_integrand(g);
  std::vector<double> v;
  v.reserve(grid.size());
  double acc = 0.0;
  double prev = 0.0;
  for (double r : grid.values()) {
    acc += integrate_panel(f, prev, r, kPanelTolerance);
    prev = r;
    v.push_back(acc);
  }
  return SummaryCurve(grid, std::move(v), CurveKind::kK);
}

double k_from_pcf(const PcfFunction& g, double r) {
  require(r >= 0.0 && r <= kPi, ErrorCode::kOutOfRange, "r must lie in [0, pi]");
  return integrate_panel(k_integrand(g), 0.0, r, kPanelTolerance);
}

double thomas_k(const ThomasParams& params, double r, ThomasKForm form) {
  const double xi = params.xi;
  const double k_pois = kTwoPi * (1.0 - std::cos(r));
  // With w = sqrt(2 xi^2 (1 + cos r)) = 2 xi cos(r/2), everything is scaled by
  // e^{-2 xi}:  (cosh 2xi - cosh w) e^{-2xi} = num / 2,
  //   num = -expm1(w - 2xi) + e^{-4xi} - e^{-w-2xi},  w - 2xi = -4 xi sin^2(r/4).
  const double q = std::sin(0.25 * r);
  const double w = 2.0 * xi * std::cos(0.5 * r);
  const double num = -std::expm1(-4.0 * xi * q * q) + std::exp(-4.0 * xi) - std::exp(-w - 2.0 * xi);
  if (form == ThomasKForm::kFourKappaSin) {
    const double s = std::sin(xi);
    return k_pois + std::exp(std::log(0.5 * num) + 2.0 * xi) / (4.0 * params.kappa * s * s);
  }
  // sinh^2(xi) e^{-2 xi} = expm1(-2 xi)^2 / 4
  const double e = std::expm1(-2.0 * xi);
  const double ratio = 2.0 * num / (e * e);  // (cosh 2xi - cosh w) / sinh^2 xi
  const double denom = form == ThomasKForm::kExact ? 2.0 : 4.0;
  return k_pois + ratio / (denom * params.kappa);
}

SummaryCurve k_thomas(const ThomasParams& params, const DistanceGrid& grid, ThomasKForm form) {
  std::vector<double> v;
  v.reserve(grid.size());
  for (double r : grid.values()) v.push_back(thomas_k(params, r, form));
  return SummaryCurve(grid, std::move(v), CurveKind::kK);
}

double thomas_pcf(const ThomasParams& params, double r) {
  const double xi = params.xi;
  const double rho = 2.0 * std::cos(0.5 * r);
  // sinh(xi rho) / (rho sinh^2 xi) = 2 e^{xi(rho-2)} (-expm1(-2 xi rho)/rho) / expm1(-2xi)^2
  const double sinhc = rho > 1e-12 ? -std::expm1(-2.0 * xi * rho) / rho : 2.0 * xi;
  const double e = std::expm1(-2.0 * xi);
  const double ratio = 2.0 * std::exp(xi * (rho - 2.0)) * sinhc / (e * e);
  return 1.0 + xi * ratio / (2.0 * kTwoPi * params.kappa);
}

SummaryCurve pcf_curve(const CovarianceModel& model, const DistanceGrid& grid) {
  std::vector<double> v;
  v.reserve(grid.size());
  for (double r : grid.values()) v.push_back(std::exp(model.evaluate(r)));
  return SummaryCurve(grid, std::move(v), CurveKind::kPcf);
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

// Number of leading grid values r_k with C(u, r_k) inside the window.
std::size_t eroded_prefix(const BandWindow& window, const UnitVector& u, const DistanceGrid& grid) {
  const auto& rv = grid.values();
  return static_cast<std::size_t>(
      std::partition_point(rv.begin(), rv.end(),
                           [&](double r) { return window.erosion_contains(u, r); }) -
      rv.begin());
}

std::size_t first_at_least(const DistanceGrid& grid, double d) {
  const auto& rv = grid.values();
  return static_cast<std::size_t>(std::lower_bound(rv.begin(), rv.end(), d) - rv.begin());
}

}  // namespace

std::vector<double> nearest_distances(std::span<const UnitVector> queries,
                                      std::span<const UnitVector> points, bool exclude_self) {
  std::vector<double> out(queries.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    double best = -2.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (exclude_self && i == j) continue;
      best = std::max(best, queries[i].dot(points[j]));
    }
    if (best > -2.0) out[i] = std::acos(std::clamp(best, -1.0, 1.0));
  }
  return out;
}

SummaryCurve estimate_k_inhom(const PointPattern& pattern, const IntensityFunction& lambda,
                              const DistanceGrid& grid) {
  const auto& pts = pattern.points();
  const std::size_t n = pts.size();
  const std::size_t m = grid.size();
  std::vector<double> inv_lambda(n);
  std::vector<std::size_t> prefix(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda(pts[i]);
    require(l > 0.0, ErrorCode::kInvalidArgument, "intensity must be positive at every data point");
    inv_lambda[i] = 1.0 / l;
    prefix[i] = eroded_prefix(pattern.window(), pts[i], grid);
  }

  // Pair (u, v) contributes to grid indices [first r_k >= d(u,v), prefix(u)).
  std::vector<double> diff(m + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::size_t start = first_at_least(grid, geodesic_distance(pts[i], pts[j]));
      if (start >= prefix[i]) continue;
      const double w = inv_lambda[i] * inv_lambda[j];
      diff[start] += w;
      diff[prefix[i]] -= w;
    }
  }

  std::vector<double> values(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running += diff[k];
    const double area = pattern.window().eroded_area(grid[k]);
    values[k] = area > 0.0 ? running / area : kMissing;
  }
  return SummaryCurve(grid, std::move(values), CurveKind::kK);
}

SummaryCurve estimate_pcf(const PointPattern& pattern, const IntensityFunction& lambda,
                          const DistanceGrid& grid, double half_width) {
  require(half_width > 0.0, ErrorCode::kInvalidArgument, "pcf bandwidth must be positive");
  const auto& pts = pattern.points();
  const auto& rv = grid.values();
  const std::size_t n = pts.size();
  const BandWindow& window = pattern.window();
  std::vector<double> inv_lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda(pts[i]);
    require(l > 0.0, ErrorCode::kInvalidArgument, "intensity must be positive at every data point");
    inv_lambda[i] = 1.0 / l;
  }

  std::vector<double> sums(rv.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = geodesic_distance(pts[i], pts[j]);
      auto lo = std::lower_bound(rv.begin(), rv.end(), d - half_width);
      for (auto it = lo; it != rv.end() && *it <= d + half_width; ++it) {
        const double outer = std::min(kPi, *it + half_width);
        if (window.erosion_contains(pts[i], outer)) {
          sums[static_cast<std::size_t>(it - rv.begin())] += inv_lambda[i] * inv_lambda[j];
        }
      }
    }
  }

  std::vector<double> values(rv.size());
  for (std::size_t k = 0; k < rv.size(); ++k) {
    const double inner = std::max(0.0, rv[k] - half_width);
    const double outer = std::min(kPi, rv[k] + half_width);
    const double area = window.eroded_area(outer);
    const double ring = kTwoPi * (std::cos(inner) - std::cos(outer));
    values[k] = area > 0.0 ? sums[k] / (area * ring) : kMissing;
  }
  return SummaryCurve(grid, std::move(values), CurveKind::kPcf);
}

FgjCurves estimate_fgj(const PointPattern& pattern, const DistanceGrid& grid, std::size_t n_ref) {
  require(n_ref >= 100, ErrorCode::kInvalidArgument, "F estimation needs at least 100 reference points");
  const BandWindow& window = pattern.window();
  const std::size_t m = grid.size();
  const auto& pts = pattern.points();

  // Accumulates numerator/denominator difference arrays for a reduced-sample CDF.
  auto reduced_sample = [&](std::span<const UnitVector> centres, const std::vector<double>& nn,
                            CurveKind kind) {
    std::vector<double> num(m + 1, 0.0), den(m + 1, 0.0);
    for (std::size_t i = 0; i < centres.size(); ++i) {
      const std::size_t end = eroded_prefix(window, centres[i], grid);
      if (end == 0) continue;
      den[0] += 1.0;
      den[end] -= 1.0;
      const std::size_t start = first_at_least(grid, nn[i]);
      if (start < end) {
        num[start] += 1.0;
        num[end] -= 1.0;
      }
    }
    std::vector<double> values(m);
    double run_num = 0.0, run_den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      run_num += num[k];
      run_den += den[k];
      values[k] = run_den > 0.0 ? run_num / run_den : kMissing;
    }
    return SummaryCurve(grid, std::move(values), kind);
  };

  std::vector<UnitVector> refs;
  for (const auto& p : fibonacci_points(n_ref)) {
    if (window.contains(p)) refs.push_back(p);
  }
  SummaryCurve F = reduced_sample(refs, nearest_distances(refs, pts, false), CurveKind::kF);
  SummaryCurve G = reduced_sample(pts, nearest_distances(pts, pts, true), CurveKind::kG);

  std::vector<double> j(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double f = F.values[k];
    const double g = G.values[k];
    j[k] = (is_missing(f) || is_missing(g) || f >= 1.0) ? kMissing : (1.0 - g) / (1.0 - f);
  }
  return {std::move(F), std::move(G), SummaryCurve(grid, std::move(j), CurveKind::kJ)};
}

}  // namespace sphcox
