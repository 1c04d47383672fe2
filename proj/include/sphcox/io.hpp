#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sphcox/covariance.hpp"
#include "sphcox/envelope.hpp"
#include "sphcox/fitting.hpp"
#include "sphcox/gaussian_field.hpp"
#include "sphcox/point_process.hpp"
#include "sphcox/summary.hpp"

namespace sphcox {

inline constexpr std::string_view kLibraryVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Point patterns
//
//   # units=degrees        (optional; radians otherwise)
//   theta,phi
//   0.5,1.25
//
// theta is colatitude in [0, pi], phi longitude in [0, 2pi).

struct CatalogIngest {
  PointPattern pattern;
  std::size_t n_rows = 0;
  /// Rows that parsed but fell outside the window (e.g. inside an excluded band).
  std::size_t omitted = 0;
};

CatalogIngest ingest_catalog(std::istream& in, const BandWindow& window);
CatalogIngest ingest_catalog(const std::string& path, const BandWindow& window);

/// Radians, 15 significant digits.
void write_pattern_csv(std::ostream& out, const PointPattern& pattern);

// ---------------------------------------------------------------------------
// Curves: "r,value,kind", missing values as empty fields. Several curves may
// share one file; they are grouped by kind in order of first appearance.

void write_curve_csv(std::ostream& out, const std::vector<SummaryCurve>& curves);
std::vector<SummaryCurve> read_curve_csv(std::istream& in);

/// "node_index,x,y,z,value".
void write_field_csv(std::ostream& out, const GridField& field);

/// "index,segment,r,lower,observed,upper".
void write_envelope_csv(std::ostream& out, const EnvelopeResult& result);
/// key=value lines: p_lo, p_hi, level, k_level, observed_rank, n_sims.
void write_envelope_summary(std::ostream& out, const EnvelopeResult& result);

/// "thinning,p_lo,p_hi".
void write_sweep_csv(std::ostream& out, const ThinningSweep& sweep);

// ---------------------------------------------------------------------------
// key=value text

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// One pair per line, or ';'-separated on one line. Blank lines and '#'
/// comments are skipped. Throws kParse on a line without '='.
KeyValues parse_key_values(std::string_view text);
void write_key_values(std::ostream& out, const KeyValues& values);
std::optional<std::string> find_value(const KeyValues& values, std::string_view key);

/// family=<name>, variance=<v> and the shape parameters the family uses.
KeyValues format_covariance(const CovarianceModel& model);
/// Inverse of format_covariance; omitted shape parameters take their defaults.
CovarianceModel parse_covariance(const KeyValues& values);

/// "b0,bx,by,bz,gamma" (prefixed "log:" for the log link), or the names
/// galaxy_fit, galaxy_fit_log and constant:<lambda>.
std::string format_intensity(const IntensityModel& model);
IntensityModel parse_intensity(std::string_view text);

enum class ProcessKind { kPoisson, kThomas, kLgcp };

std::string_view process_kind_name(ProcessKind kind);
ProcessKind parse_process_kind(std::string_view name);

/// A model as written in config files:
///   process=thomas;kappa=5.64;xi=266.6;intensity=galaxy_fit
///   process=lgcp;family=multiquadric;variance=1.3;delta=0.87;tau=2.03
/// Missing parameters fall back to defaults (Thomas (1, 1), multiquadric
/// (1, 0.5, 1), galaxy-fit intensity).
struct ModelSpec {
  ProcessKind kind = ProcessKind::kPoisson;
  IntensityModel intensity = IntensityModel::galaxy_fit();
  ThomasParams thomas;
  CovarianceModel covariance = CovarianceModel::multiquadric(1.0, 0.5, 1.0);
};

KeyValues format_model(const ModelSpec& spec);
ModelSpec parse_model(const KeyValues& values);

/// Builds a simulatable model; LGCPs are factorized over a Fibonacci mesh of
/// grid_n nodes.
ProcessModel to_process_model(const ModelSpec& spec, std::size_t grid_n);

/// Report lines: model, parameter values, contrast, n_evals, converged,
/// at_boundary and the contrast settings.
void write_fit_report(std::ostream& out, std::string_view model, const FitResult& fit,
                      const ContrastSpec& spec);
/// "eval,<param names...>,value".
void write_fit_trace(std::ostream& out, const FitResult& fit);

// ---------------------------------------------------------------------------

std::string format_double(double v, int digits = 17);
/// Whole-string parse; throws kParse naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);

std::string read_file(const std::string& path);
/// Writes via a temporary file in the same directory, then renames.
void write_file(const std::string& path, const std::string& contents);

}  // namespace sphcox
