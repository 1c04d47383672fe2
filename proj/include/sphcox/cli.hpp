#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "sphcox/fitting.hpp"
#include "sphcox/geometry.hpp"
#include "sphcox/io.hpp"

namespace sphcox {

enum class Subcommand { kSimulate, kFit, kSummarize, kEnvelope, kThin, kCertify };

std::string_view subcommand_name(Subcommand sub);
Subcommand parse_subcommand(std::string_view name);
/// simulate, envelope and thin draw random numbers and need a seed.
bool is_stochastic(Subcommand sub);

struct RunConfig {
  Subcommand subcommand = Subcommand::kCertify;
  /// Model in key=value form ("" = subcommand default).
  std::string model;
  /// Excluded colatitude band; the window is its complement. Full sphere if unset.
  std::optional<std::pair<double, double>> window_band;
  std::size_t grid_n = 4098;
  /// short | long | a,b
  std::string interval = "long";
  std::optional<std::uint64_t> seed;
  std::size_t n_sims = 2499;
  std::string out = ".";
  /// Pattern CSV (fit, summarize, envelope, thin).
  std::string input;
  /// K curve CSV for fit, used instead of estimating K from `input`.
  std::string k_hat;
  /// Distance grid for F, G and J: n_r points on [0, r_max].
  double r_max = kPi / 2.0;
  std::size_t n_r = 512;
  std::size_t n_ref = kDefaultReferencePoints;
  double level = 0.05;
  /// Observed-data thinnings in the envelope test; more than one runs the
  /// sensitivity sweep.
  std::size_t thinnings = 1;
};

BandWindow window_of(const RunConfig& config);
ContrastSpec contrast_of(const RunConfig& config);
ModelSpec model_of(const RunConfig& config);

/// Config echo written to every manifest; from_manifest inverts it.
KeyValues to_manifest(const RunConfig& config);
RunConfig from_manifest(const KeyValues& manifest);

/// Runs one subcommand, writing artifacts plus manifest.txt into config.out.
/// Progress goes to `log`. On failure prints one line "error=<code>: <message>"
/// to `err` and returns 1.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// Parses the command line and calls run(); usage errors return 2.
int cli_main(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace sphcox
