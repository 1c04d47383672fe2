#include "sphcox/envelope.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "sphcox/error.hpp"
#include "sphcox/random.hpp"

namespace sphcox {

CurveSet::CurveSet(std::vector<double> observed, std::vector<std::vector<double>> simulated,
                   std::vector<std::size_t> segment_bounds, std::vector<std::string> segment_labels,
                   std::vector<double> r)
    : observed_(std::move(observed)),
      simulated_(std::move(simulated)),
      bounds_(std::move(segment_bounds)),
      labels_(std::move(segment_labels)),
      r_(std::move(r)) {
  const std::size_t m = observed_.size();
  require(m >= 1, ErrorCode::kInvalidArgument, "curve set needs at least one coordinate");
  require(!simulated_.empty(), ErrorCode::kInsufficientSimulations,
          "curve set needs at least one simulated curve");
  for (const auto& row : simulated_) {
    require(row.size() == m, ErrorCode::kInvalidArgument, "simulated curve length differs");
    for (std::size_t k = 0; k < m; ++k) {
      require(is_missing(row[k]) == is_missing(observed_[k]), ErrorCode::kMissingData,
              "missing coordinates differ between curves at index " + std::to_string(k));
    }
  }
  require(bounds_.size() == labels_.size() + 1 && bounds_.front() == 0 && bounds_.back() == m &&
              std::is_sorted(bounds_.begin(), bounds_.end()),
          ErrorCode::kInvalidArgument, "segment bounds do not partition the coordinates");
  require(r_.size() == m, ErrorCode::kInvalidArgument, "r vector length differs");
}

namespace {

std::vector<double> index_vector(std::size_t m) {
  std::vector<double> r(m);
  for (std::size_t k = 0; k < m; ++k) r[k] = static_cast<double>(k);
  return r;
}

}  // namespace

CurveSet::CurveSet(std::vector<double> observed, std::vector<std::vector<double>> simulated)
    : CurveSet(observed, std::move(simulated), {0, observed.size()}, {"T"},
               index_vector(observed.size())) {}

std::string CurveSet::segment_of(std::size_t coordinate) const {
  const auto it = std::upper_bound(bounds_.begin(), bounds_.end(), coordinate);
  return labels_[static_cast<std::size_t>(it - bounds_.begin()) - 1];
}

CurveSet CurveSet::with_simulated(std::vector<std::vector<double>> simulated) const {
  return CurveSet(observed_, std::move(simulated), bounds_, labels_, r_);
}

std::vector<std::size_t> extreme_ranks(const CurveSet& curves) {
  const std::size_t n = curves.s() + 1;
  std::vector<std::size_t> ranks(n, n);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < curves.m(); ++k) {
    if (is_missing(curves.observed()[k])) continue;
    for (std::size_t i = 0; i < n; ++i) column[i] = curves.curve(i)[k];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), column[i]) - sorted.begin();
      const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), column[i]);
      const std::size_t rank = static_cast<std::size_t>(std::min(below, above)) + 1;
      ranks[i] = std::min(ranks[i], rank);
    }
  }
  return ranks;
}

PInterval p_interval(const std::vector<std::size_t>& ranks, std::size_t observed_index) {
  require(ranks.size() >= 2 && observed_index < ranks.size(), ErrorCode::kInvalidArgument,
          "p_interval needs the observed rank and at least one simulated rank");
  const std::size_t obs = ranks[observed_index];
  std::size_t less = 0, less_equal = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (i == observed_index) continue;
    less += ranks[i] < obs;
    less_equal += ranks[i] <= obs;
  }
  const double denom = static_cast<double>(ranks.size());
  return {static_cast<double>(less + 1) / denom, static_cast<double>(less_equal + 1) / denom};
}

EnvelopeResult rank_envelope(const CurveSet& curves, double level) {
  require(level >= 0.0 && level < 1.0, ErrorCode::kInvalidArgument, "level must lie in [0, 1)");
  const std::size_t s = curves.s();
  const double budget = level * static_cast<double>(s + 1);
  require(budget >= 1.0, ErrorCode::kInsufficientSimulations,
          "increase simulations: level * (s + 1) must be at least 1");

  const std::vector<std::size_t> ranks = extreme_ranks(curves);
  std::vector<std::size_t> sim_ranks(ranks.begin() + 1, ranks.end());
  std::sort(sim_ranks.begin(), sim_ranks.end());

  // Largest k with #{simulated rank < k} <= budget.
  std::size_t k_level = 1;
  for (std::size_t k = 2; k <= s + 1; ++k) {
    const auto count = std::lower_bound(sim_ranks.begin(), sim_ranks.end(), k) - sim_ranks.begin();
    if (static_cast<double>(count) > budget) break;
    k_level = k;
  }
  // An envelope needs k-th smallest <= k-th largest.
  k_level = std::min(k_level, (s + 2) / 2);

  EnvelopeResult out;
  const std::size_t m = curves.m();
  out.r = curves.r();
  out.observed = curves.observed();
  out.segment.reserve(m);
  out.lower.assign(m, kMissing);
  out.upper.assign(m, kMissing);
  std::vector<double> column(s + 1);
  for (std::size_t k = 0; k < m; ++k) {
    out.segment.push_back(curves.segment_of(k));
    if (is_missing(curves.observed()[k])) continue;
    for (std::size_t i = 0; i <= s; ++i) column[i] = curves.curve(i)[k];
    std::sort(column.begin(), column.end());
    out.lower[k] = column[k_level - 1];
    out.upper[k] = column[s + 1 - k_level];
  }
  const PInterval p = p_interval(ranks, 0);
  out.p_lo = p.p_lo;
  out.p_hi = p.p_hi;
  out.level = level;
  out.k_level = k_level;
  out.observed_rank = ranks[0];
  out.n_sims = s;
  return out;
}

CurveSet make_curve_set(const FgjCurves& observed, const std::vector<FgjCurves>& simulated) {
  require(!simulated.empty(), ErrorCode::kInsufficientSimulations, "no simulated curves");
  const SummaryCurve FgjCurves::*segments[] = {&FgjCurves::F, &FgjCurves::G, &FgjCurves::J};
  const char* labels[] = {"F", "G", "J"};

  std::vector<double> obs_row, r;
  std::vector<std::vector<double>> sim_rows(simulated.size());
  std::vector<std::size_t> bounds{0};
  std::vector<std::string> kept_labels;
  for (std::size_t seg = 0; seg < 3; ++seg) {
    const SummaryCurve& o = observed.*segments[seg];
    const std::size_t before = obs_row.size();
    for (std::size_t k = 0; k < o.values.size(); ++k) {
      const double v = o.values[k];
      bool keep = !is_missing(v);
      bool constant = true;
      for (const auto& sim : simulated) {
        const double w = (sim.*segments[seg]).values.at(k);
        if (is_missing(w)) keep = false;
        if (w != v) constant = false;
      }
      if (!keep || constant) continue;
      obs_row.push_back(v);
      r.push_back(o.grid[k]);
      for (std::size_t i = 0; i < simulated.size(); ++i) {
        sim_rows[i].push_back((simulated[i].*segments[seg]).values[k]);
      }
    }
    if (obs_row.size() > before) {
      bounds.push_back(obs_row.size());
      kept_labels.emplace_back(labels[seg]);
    }
  }
  require(!obs_row.empty(), ErrorCode::kMissingData,
          "no informative coordinates left after dropping missing and constant ones");
  return CurveSet(std::move(obs_row), std::move(sim_rows), std::move(bounds),
                  std::move(kept_labels), std::move(r));
}

namespace {

PointPattern thin_observed(const PointPattern& data, const IntensityModel& intensity, Rng rng) {
  return independent_thinning(data, intensity, rng);
}

std::vector<FgjCurves> simulate_curves(const ProcessModel& model, const BandWindow& window,
                                       const IntensityModel& intensity, const DistanceGrid& grid,
                                       const GofOptions& options, std::uint64_t seed) {
  const double lambda_min = intensity.minimum();
  require(lambda_min > 0.0, ErrorCode::kInvalidArgument, "thinning needs a positive intensity");
  std::vector<std::optional<FgjCurves>> curves(options.n_sims);
  parallel_for(options.n_sims, [&](std::size_t i) {
    try {
      Rng rng = make_stream(seed, i + 1);
      const PointPattern full = simulate_process(model, BandWindow::full_sphere(), rng);
      const PointPattern thinned = independent_thinning(full, intensity, rng);
      curves[i] = estimate_fgj(thinned.restricted_to(window), grid, options.n_ref);
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<FgjCurves> out;
  out.reserve(options.n_sims);
  for (auto& c : curves) out.push_back(std::move(*c));
  return out;
}

}  // namespace

EnvelopeResult run_gof_pipeline(const ProcessModel& model, const PointPattern& data,
                                const IntensityModel& intensity, const DistanceGrid& grid,
                                const GofOptions& options, std::uint64_t seed) {
  const PointPattern thinned = thin_observed(data, intensity, make_stream(seed, 0));
  const FgjCurves observed = estimate_fgj(thinned, grid, options.n_ref);
  const std::vector<FgjCurves> simulated =
      simulate_curves(model, data.window(), intensity, grid, options, seed);
  return rank_envelope(make_curve_set(observed, simulated), options.level);
}

ThinningSweep thinning_sweep(const ProcessModel& model, const PointPattern& data,
                             const IntensityModel& intensity, const DistanceGrid& grid,
                             const GofOptions& options, std::size_t n_thinnings,
                             std::uint64_t seed) {
  require(n_thinnings >= 1, ErrorCode::kInvalidArgument, "need at least one thinning");
  const std::vector<FgjCurves> simulated =
      simulate_curves(model, data.window(), intensity, grid, options, seed);

  ThinningSweep sweep;
  sweep.intervals.resize(n_thinnings);
  parallel_for(n_thinnings, [&](std::size_t j) {
    const std::uint64_t stream = j == 0 ? 0 : options.n_sims + j;
    const PointPattern thinned = thin_observed(data, intensity, make_stream(seed, stream));
    const CurveSet set = make_curve_set(estimate_fgj(thinned, grid, options.n_ref), simulated);
    if (j == 0) {
      sweep.envelope = rank_envelope(set, options.level);
      sweep.intervals[j] = {sweep.envelope.p_lo, sweep.envelope.p_hi};
    } else {
      sweep.intervals[j] = p_interval(extreme_ranks(set), 0);
    }
  });

  double sum = 0.0;
  for (const auto& p : sweep.intervals) sum += p.p_hi;
  sweep.p_hi_mean = sum / static_cast<double>(n_thinnings);
  double ss = 0.0;
  for (const auto& p : sweep.intervals) ss += (p.p_hi - sweep.p_hi_mean) * (p.p_hi - sweep.p_hi_mean);
  sweep.p_hi_variance = n_thinnings > 1 ? ss / static_cast<double>(n_thinnings - 1) : 0.0;
  return sweep;
}

}  // namespace sphcox
