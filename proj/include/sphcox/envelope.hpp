#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sphcox/point_process.hpp"
#include "sphcox/summary.hpp"

namespace sphcox {

/// Observed curve plus s simulated curves on a common coordinate vector.
/// Curve 0 is the observed one in every rank vector.
class CurveSet {
 public:
  /// `segment_bounds` delimit segments: segment i covers coordinates
  /// [bounds[i], bounds[i+1]). `r` gives the distance of each coordinate.
  CurveSet(std::vector<double> observed, std::vector<std::vector<double>> simulated,
           std::vector<std::size_t> segment_bounds, std::vector<std::string> segment_labels,
           std::vector<double> r);

  /// Single-segment set with r = coordinate index.
  CurveSet(std::vector<double> observed, std::vector<std::vector<double>> simulated);

  std::size_t m() const { return observed_.size(); }
  std::size_t s() const { return simulated_.size(); }
  const std::vector<double>& observed() const { return observed_; }
  const std::vector<std::vector<double>>& simulated() const { return simulated_; }
  /// Curve i of the s+1 curves (0 = observed).
  const std::vector<double>& curve(std::size_t i) const { return i == 0 ? observed_ : simulated_[i - 1]; }
  const std::vector<std::size_t>& segment_bounds() const { return bounds_; }
  const std::vector<std::string>& segment_labels() const { return labels_; }
  const std::vector<double>& r() const { return r_; }
  std::string segment_of(std::size_t coordinate) const;

  /// Same curves with simulated curve order permuted.
  CurveSet with_simulated(std::vector<std::vector<double>> simulated) const;

 private:
  std::vector<double> observed_;
  std::vector<std::vector<double>> simulated_;
  std::vector<std::size_t> bounds_;
  std::vector<std::string> labels_;
  std::vector<double> r_;
};

/// Extreme rank of each of the s+1 curves: the minimum over non-missing
/// coordinates of min(rank from below, rank from above), ties sharing the
/// minimal rank.
std::vector<std::size_t> extreme_ranks(const CurveSet& curves);

struct PInterval {
  double p_lo;
  double p_hi;
};

PInterval p_interval(const std::vector<std::size_t>& ranks, std::size_t observed_index = 0);

struct EnvelopeResult {
  std::vector<double> r;
  std::vector<std::string> segment;
  std::vector<double> observed;
  std::vector<double> lower;
  std::vector<double> upper;
  double p_lo = 1.0;
  double p_hi = 1.0;
  double level = 0.05;
  std::size_t k_level = 1;
  std::size_t observed_rank = 1;
  std::size_t n_sims = 0;
};

/// Global rank envelope at the given level. Throws kInsufficientSimulations
/// when level (s+1) < 1, i.e. no curve may be excluded.
EnvelopeResult rank_envelope(const CurveSet& curves, double level = 0.05);

/// Concatenates F, G, J of the observed and simulated patterns. Coordinates
/// missing in any curve, or constant across all curves, are dropped; throws
/// kMissingData if nothing is left.
CurveSet make_curve_set(const FgjCurves& observed, const std::vector<FgjCurves>& simulated);

struct GofOptions {
  std::size_t n_sims = 2499;
  double level = 0.05;
  std::size_t n_ref = kDefaultReferencePoints;
};

/// Thins the data to homogeneity (stream 0), simulates n_sims replicates of
/// the model on the sphere (replicate i on stream i+1), thins and restricts
/// them to the data window, and ranks the combined F/G/J curves.
EnvelopeResult run_gof_pipeline(const ProcessModel& model, const PointPattern& data,
                                const IntensityModel& intensity, const DistanceGrid& grid,
                                const GofOptions& options, std::uint64_t seed);

struct ThinningSweep {
  /// Envelope for thinning 0, identical to run_gof_pipeline with the same seed.
  EnvelopeResult envelope;
  std::vector<PInterval> intervals;
  double p_hi_mean = 0.0;
  double p_hi_variance = 0.0;
};

/// Repeats the observed-data thinning n_thinnings times against one fixed set
/// of simulated curves and collects the p-intervals. Thinning 0 matches the
/// pipeline's observed thinning.
ThinningSweep thinning_sweep(const ProcessModel& model, const PointPattern& data,
                             const IntensityModel& intensity, const DistanceGrid& grid,
                             const GofOptions& options, std::size_t n_thinnings,
                             std::uint64_t seed);

}  // namespace sphcox
