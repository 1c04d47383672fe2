#include "sphcox/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sphcox/error.hpp"

namespace sphcox {

ContrastSpec::ContrastSpec(double a_, double b_, double exponent_, std::size_t n_quad_)
    : a(a_), b(b_), exponent(exponent_), n_quad(n_quad_) {
  require(a >= 0.0 && a < b && b <= kPi, ErrorCode::kInvalidArgument,
          "contrast interval must satisfy 0 <= a < b <= pi");
  require(exponent > 0.0, ErrorCode::kInvalidArgument, "contrast exponent must be positive");
  require(n_quad >= 1, ErrorCode::kInvalidArgument, "contrast needs at least one panel");
}

DistanceGrid ContrastSpec::nodes() const { return DistanceGrid::linspace(a, b, n_quad + 1); }

namespace {

// Khat^e on the trapezoid nodes, computed once per fit.
std::vector<double> powered_k_hat(const SummaryCurve& k_hat, const DistanceGrid& nodes,
                                  double exponent) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double r : nodes.values()) {
    out.push_back(std::pow(std::max(0.0, k_hat.interpolate(r)), exponent));
  }
  return out;
}

double trapezoid_contrast(std::span<const double> k_hat_pow, std::span<const double> k_model,
                          const ContrastSpec& spec) {
  const double h = (spec.b - spec.a) / static_cast<double>(spec.n_quad);
  double sum = 0.0;
  for (std::size_t i = 0; i < k_hat_pow.size(); ++i) {
    const double diff = k_hat_pow[i] - std::pow(std::max(0.0, k_model[i]), spec.exponent);
    const double weight = (i == 0 || i + 1 == k_hat_pow.size()) ? 0.5 : 1.0;
    sum += weight * diff * diff;
  }
  return sum * h;
}

double halton(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

InitGrid halton_box(const std::vector<std::pair<double, double>>& box, std::size_t n) {
  constexpr std::size_t kBases[] = {2, 3, 5, 7};
  InitGrid grid;
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<double> x;
    for (std::size_t d = 0; d < box.size(); ++d) {
      x.push_back(box[d].first + halton(i, kBases[d]) * (box[d].second - box[d].first));
    }
    grid.push_back(std::move(x));
  }
  return grid;
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Bounds {
  std::vector<double> lo, hi;

  std::vector<double> clamp(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo[i], hi[i]);
    return out;
  }
  bool touches(std::span<const double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] <= lo[i] + 1e-6 || x[i] >= hi[i] - 1e-6) return true;
    }
    return false;
  }
};

const Bounds kThomasBounds{{std::log(1e-3), std::log(1e-2)}, {std::log(1e4), std::log(1e5)}};
const Bounds kLgcpBounds{{std::log(1e-8), -15.0, std::log(1e-3)}, {std::log(20.0), 15.0, std::log(50.0)}};

// Shared driver: evaluate the init grid, run Nelder-Mead from the best point.
FitResult minimize_contrast(const std::function<std::vector<double>(std::span<const double>)>& to_natural,
                            const std::function<double(std::span<const double>)>& objective,
                            const Bounds& bounds, const InitGrid& init,
                            std::vector<std::string> names) {
  require(!init.empty(), ErrorCode::kInvalidArgument, "init grid is empty");
  FitResult result;
  result.param_names = std::move(names);

  auto traced = [&](std::span<const double> x) {
    const std::vector<double> clamped = bounds.clamp(x);
    const bool finite = std::all_of(clamped.begin(), clamped.end(), [](double v) { return std::isfinite(v); });
    double value = finite ? objective(clamped) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(value)) value = std::numeric_limits<double>::infinity();
    result.trace.push_back({to_natural(clamped), value});
    return value;
  };

  std::size_t best = init.size();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < init.size(); ++i) {
    const double v = traced(init[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == init.size()) {
    result.n_evals = init.size();
    result.contrast_value = std::numeric_limits<double>::infinity();
    result.converged = false;
    result.params = to_natural(bounds.clamp(init.front()));
    return result;
  }

  const auto nm = detail::nelder_mead(traced, init[best], 0.5, 1e-6, 6000);
  std::vector<double> x = bounds.clamp(nm.x);
  double value = nm.value;
  std::size_t polish_evals = 0;
  // Flat directions (e.g. variance -> 0 on Poisson-like data) leave the simplex
  // stranded at the quadrature noise floor; move a coordinate onto its bound
  // whenever that is no worse up to rounding.
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double edge : {bounds.lo[i], bounds.hi[i]}) {
      std::vector<double> candidate = x;
      candidate[i] = edge;
      const double v = traced(candidate);
      ++polish_evals;
      if (v <= value * (1.0 + 1e-9) + 1e-20) {
        x = std::move(candidate);
        value = v;
      }
    }
  }
  result.params = to_natural(x);
  result.contrast_value = value;
  result.n_evals = init.size() + nm.n_evals + polish_evals;
  result.converged = nm.converged;
  result.at_boundary = bounds.touches(x);
  return result;
}

}  // namespace

double contrast(const SummaryCurve& k_hat, const KFunction& k_model, const ContrastSpec& spec) {
  const DistanceGrid nodes = spec.nodes();
  const std::vector<double> hat = powered_k_hat(k_hat, nodes, spec.exponent);
  std::vector<double> model;
  model.reserve(nodes.size());
  for (double r : nodes.values()) model.push_back(k_model(r));
  return trapezoid_contrast(hat, model, spec);
}

ThomasParams FitResult::thomas_params() const {
  require(params.size() == 2, ErrorCode::kInvalidArgument, "not a Thomas fit");
  return ThomasParams(params[0], params[1]);
}

CovarianceModel FitResult::covariance_model() const {
  require(params.size() == 3, ErrorCode::kInvalidArgument, "not an LGCP fit");
  return CovarianceModel::multiquadric(params[0], params[1], params[2]);
}

InitGrid default_thomas_init() {
  return halton_box({{std::log(0.5), std::log(200.0)}, {std::log(5.0), std::log(5000.0)}}, 8);
}

InitGrid default_lgcp_init() {
  return halton_box({{std::log(0.05), std::log(10.0)}, {logit(0.05), logit(0.995)},
                     {std::log(0.05), std::log(10.0)}},
                    8);
}

FitResult fit_thomas(const SummaryCurve& k_hat, const ContrastSpec& spec, const InitGrid& init,
                     ThomasKForm form) {
  const DistanceGrid nodes = spec.nodes();
  const std::vector<double> hat = powered_k_hat(k_hat, nodes, spec.exponent);
  std::vector<double> model(nodes.size());
  auto objective = [&](std::span<const double> x) {
    const ThomasParams p(std::exp(x[0]), std::exp(x[1]));
    for (std::size_t i = 0; i < nodes.size(); ++i) model[i] = thomas_k(p, nodes[i], form);
    return trapezoid_contrast(hat, model, spec);
  };
  auto natural = [](std::span<const double> x) {
    return std::vector<double>{std::exp(x[0]), std::exp(x[1])};
  };
  return minimize_contrast(natural, objective, kThomasBounds, init, {"kappa", "xi"});
}

SummaryCurve lgcp_k(const CovarianceModel& model, const DistanceGrid& grid) {
  return k_from_pcf([&](double r) { return std::exp(model.evaluate(r)); }, grid);
}

FitResult fit_lgcp(const SummaryCurve& k_hat, const ContrastSpec& spec, Family family,
                   const InitGrid& init) {
  require(family == Family::kMultiquadric, ErrorCode::kUnsupported,
          "LGCP fitting is implemented for the multiquadric family");
  const DistanceGrid nodes = spec.nodes();
  const std::vector<double> hat = powered_k_hat(k_hat, nodes, spec.exponent);
  auto natural = [](std::span<const double> x) {
    return std::vector<double>{std::exp(x[0]), logistic(x[1]), std::exp(x[2])};
  };
  auto objective = [&](std::span<const double> x) {
    const auto p = natural(x);
    if (!(p[1] > 0.0 && p[1] < 1.0)) return std::numeric_limits<double>::infinity();
    const CovarianceModel model = CovarianceModel::multiquadric(p[0], p[1], p[2]);
    const SummaryCurve k = lgcp_k(model, nodes);
    return trapezoid_contrast(hat, k.values, spec);
  };
  return minimize_contrast(natural, objective, kLgcpBounds, init, {"sigma2", "delta", "tau"});
}

// ---------------------------------------------------------------------------

namespace detail {

namespace {

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;

  void order() {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<std::vector<double>> xs;
    std::vector<double> fs;
    for (std::size_t i : idx) {
      xs.push_back(x[i]);
      fs.push_back(f[i]);
    }
    x = std::move(xs);
    f = std::move(fs);
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[0].size(); ++k) s += (x[i][k] - x[0][k]) * (x[i][k] - x[0][k]);
      d = std::max(d, std::sqrt(s));
    }
    return d;
  }
};

NelderMeadResult nelder_mead_pass(const std::function<double(std::span<const double>)>& f,
                                  const std::vector<double>& start, double step, double tolerance,
                                  std::size_t max_evals) {
  const std::size_t n = start.size();
  Simplex s;
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  s.x.push_back(start);
  s.f.push_back(eval(start));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v = start;
    v[i] += step;
    s.x.push_back(v);
    s.f.push_back(eval(v));
  }

  auto affine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = c[k] + t * (w[k] - c[k]);
    return out;
  };

  bool converged = false;
  while (evals < max_evals) {
    s.order();
    if (s.diameter() < tolerance) {
      converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += s.x[i][k] / static_cast<double>(n);
    }
    const auto& worst = s.x[n];
    const auto reflected = affine(centroid, worst, -1.0);
    const double fr = eval(reflected);
    if (fr < s.f[0]) {
      const auto expanded = affine(centroid, worst, -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        s.x[n] = expanded;
        s.f[n] = fe;
      } else {
        s.x[n] = reflected;
        s.f[n] = fr;
      }
      continue;
    }
    if (fr < s.f[n - 1]) {
      s.x[n] = reflected;
      s.f[n] = fr;
      continue;
    }
    const bool outside = fr < s.f[n];
    const auto contracted = outside ? affine(centroid, worst, -0.5) : affine(centroid, worst, 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : s.f[n])) {
      s.x[n] = contracted;
      s.f[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      s.x[i] = affine(s.x[0], s.x[i], 0.5);
      s.f[i] = eval(s.x[i]);
    }
  }
  s.order();
  return {s.x[0], s.f[0], evals, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, double initial_step, double tolerance,
                             std::size_t max_evals) {
  NelderMeadResult first = nelder_mead_pass(f, start, initial_step, tolerance, max_evals);
  if (!first.converged || first.n_evals >= max_evals) return first;
  // Restart with a fresh simplex around the optimum to escape premature collapse.
  NelderMeadResult second =
      nelder_mead_pass(f, first.x, 100.0 * tolerance + 1e-3, tolerance, max_evals - first.n_evals);
  second.n_evals += first.n_evals;
  if (second.value > first.value) {
    first.n_evals = second.n_evals;
    return first;
  }
  return second;
}

}  // namespace detail

}  // namespace sphcox
