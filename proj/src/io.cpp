#include "sphcox/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "sphcox/error.hpp"

namespace sphcox {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string fixed_digits(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string optional_value(double v) { return is_missing(v) ? std::string() : format_double(v); }

}  // namespace

std::string format_double(double v, int digits) {
  if (digits > 0) return fixed_digits(v, digits);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty(),
          ErrorCode::kParse, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    require(out.good(), ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  require(!ec, ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Patterns

CatalogIngest ingest_catalog(std::istream& in, const BandWindow& window) {
  bool degrees = false;
  bool header_seen = false;
  std::vector<UnitVector> points;
  CatalogIngest out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string_view body = trim(text.substr(1));
      if (body == "units=degrees") {
        degrees = true;
      } else if (body == "units=radians") {
        degrees = false;
      }
      continue;
    }
    if (!header_seen) {
      const auto cols = split(text, ',');
      if (cols.size() != 2 || cols[0] != "theta" || cols[1] != "phi") fail("expected header 'theta,phi'");
      header_seen = true;
      continue;
    }
    const auto cols = split(text, ',');
    if (cols.size() != 2) fail("expected 2 fields, got " + std::to_string(cols.size()));
    double theta = 0.0, phi = 0.0;
    try {
      theta = parse_double(cols[0], "theta");
      phi = parse_double(cols[1], "phi");
    } catch (const Error& e) {
      fail(e.what());
    }
    if (degrees) {
      theta *= kPi / 180.0;
      phi *= kPi / 180.0;
    }
    // Tolerate values that printing pushed a hair past the range.
    constexpr double kSlack = 1e-12;
    if (!(theta >= -kSlack && theta <= kPi + kSlack)) fail("theta out of range [0, pi]");
    if (!(phi >= -kSlack && phi <= kTwoPi + kSlack)) fail("phi out of range [0, 2pi)");
    const UnitVector u =
        SphericalCoord{std::clamp(theta, 0.0, kPi), std::clamp(phi, 0.0, kTwoPi)}.to_unit_vector();
    ++out.n_rows;
    if (window.contains(u)) {
      points.push_back(u);
    } else {
      ++out.omitted;
    }
  }
  if (!header_seen) {
    line_no = 0;
    fail("missing header 'theta,phi'");
  }
  out.pattern = PointPattern(window, std::move(points));
  return out;
}

CatalogIngest ingest_catalog(const std::string& path, const BandWindow& window) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path);
  try {
    return ingest_catalog(in, window);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_pattern_csv(std::ostream& out, const PointPattern& pattern) {
  out << "theta,phi\n";
  for (const auto& u : pattern.points()) {
    const SphericalCoord c = SphericalCoord::from_unit_vector(u);
    out << fixed_digits(c.theta, 15) << ',' << fixed_digits(c.phi, 15) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Curves and tables

void write_curve_csv(std::ostream& out, const std::vector<SummaryCurve>& curves) {
  out << "r,value,kind\n";
  for (const auto& c : curves) {
    const std::string_view kind = curve_kind_name(c.kind);
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      out << format_double(c.grid[i]) << ',' << optional_value(c.values[i]) << ',' << kind << '\n';
    }
  }
}

std::vector<SummaryCurve> read_curve_csv(std::istream& in) {
  std::vector<CurveKind> order;
  std::map<CurveKind, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto cols = split(text, ',');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      require(cols.size() == 3 && cols[0] == "r" && cols[1] == "value" && cols[2] == "kind",
              ErrorCode::kParse, where + "expected header 'r,value,kind'");
      header_seen = true;
      continue;
    }
    require(cols.size() == 3, ErrorCode::kParse, where + "expected 3 fields");
    try {
      const CurveKind kind = parse_curve_kind(cols[2]);
      if (!groups.count(kind)) order.push_back(kind);
      auto& g = groups[kind];
      g.first.push_back(parse_double(cols[0], "r"));
      g.second.push_back(cols[1].empty() ? kMissing : parse_double(cols[1], "value"));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + e.what());
    }
  }
  require(header_seen, ErrorCode::kParse, "missing header 'r,value,kind'");
  std::vector<SummaryCurve> curves;
  for (CurveKind kind : order) {
    auto& g = groups[kind];
    curves.emplace_back(DistanceGrid(std::move(g.first)), std::move(g.second), kind);
  }
  return curves;
}

void write_field_csv(std::ostream& out, const GridField& field) {
  out << "node_index,x,y,z,value\n";
  const GridMesh& mesh = field.mesh();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const UnitVector& u = mesh.node(i);
    out << i << ',' << format_double(u.x()) << ',' << format_double(u.y()) << ','
        << format_double(u.z()) << ',' << format_double(field[i]) << '\n';
  }
}

void write_envelope_csv(std::ostream& out, const EnvelopeResult& result) {
  out << "index,segment,r,lower,observed,upper\n";
  for (std::size_t k = 0; k < result.observed.size(); ++k) {
    out << k << ',' << result.segment[k] << ',' << format_double(result.r[k]) << ','
        << optional_value(result.lower[k]) << ',' << optional_value(result.observed[k]) << ','
        << optional_value(result.upper[k]) << '\n';
  }
}

void write_envelope_summary(std::ostream& out, const EnvelopeResult& result) {
  write_key_values(out, {{"p_lo", format_double(result.p_lo)},
                         {"p_hi", format_double(result.p_hi)},
                         {"level", format_double(result.level)},
                         {"k_level", std::to_string(result.k_level)},
                         {"observed_rank", std::to_string(result.observed_rank)},
                         {"n_sims", std::to_string(result.n_sims)}});
}

void write_sweep_csv(std::ostream& out, const ThinningSweep& sweep) {
  out << "thinning,p_lo,p_hi\n";
  for (std::size_t j = 0; j < sweep.intervals.size(); ++j) {
    out << j << ',' << format_double(sweep.intervals[j].p_lo) << ','
        << format_double(sweep.intervals[j].p_hi) << '\n';
  }
}

// ---------------------------------------------------------------------------
// key=value

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    for (std::string_view item : split(line, ';')) {
      if (item.empty() || item.front() == '#') continue;
      const auto eq = item.find('=');
      require(eq != std::string_view::npos && eq > 0, ErrorCode::kParse,
              "line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(item) + "'");
      out.emplace_back(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
    }
  }
  return out;
}

void write_key_values(std::ostream& out, const KeyValues& values) {
  for (const auto& [k, v] : values) out << k << '=' << v << '\n';
}

std::optional<std::string> find_value(const KeyValues& values, std::string_view key) {
  std::optional<std::string> found;
  for (const auto& [k, v] : values) {
    if (k == key) found = v;  // last one wins
  }
  return found;
}

namespace {

using ShapeField = double ShapeParams::*;

std::vector<std::pair<const char*, ShapeField>> shape_keys(Family family) {
  const std::pair<const char*, ShapeField> alpha{"alpha", &ShapeParams::alpha};
  const std::pair<const char*, ShapeField> phi{"phi", &ShapeParams::phi};
  const std::pair<const char*, ShapeField> nu{"nu", &ShapeParams::nu};
  const std::pair<const char*, ShapeField> tau{"tau", &ShapeParams::tau};
  const std::pair<const char*, ShapeField> delta{"delta", &ShapeParams::delta};
  switch (family) {
    case Family::kPoweredExponential: return {alpha, phi};
    case Family::kMatern: return {nu, phi};
    case Family::kGeneralizedCauchy: return {alpha, phi, tau};
    case Family::kDagum: return {alpha, phi, tau};
    case Family::kMultiquadric: return {delta, tau};
    case Family::kSinePower: return {alpha};
    case Family::kSpherical: return {phi};
    case Family::kAskey: return {phi, tau};
    case Family::kC2Wendland: return {phi, tau};
    case Family::kC4Wendland: return {phi, tau};
  }
  return {};
}

}  // namespace

KeyValues format_covariance(const CovarianceModel& model) {
  KeyValues out{{"family", std::string(family_name(model.family()))},
                {"variance", format_double(model.variance())}};
  for (const auto& [key, field] : shape_keys(model.family())) {
    out.emplace_back(key, format_double(model.params().*field));
  }
  return out;
}

CovarianceModel parse_covariance(const KeyValues& values) {
  const auto family_text = find_value(values, "family");
  require(family_text.has_value(), ErrorCode::kParse, "covariance needs family=<name>");
  const Family family = parse_family(*family_text);
  ShapeParams params;
  for (const auto& [key, field] : shape_keys(family)) {
    if (const auto v = find_value(values, key)) params.*field = parse_double(*v, key);
  }
  double variance = 1.0;
  if (const auto v = find_value(values, "variance")) variance = parse_double(*v, "variance");
  return CovarianceModel(family, params, variance);
}

std::string format_intensity(const IntensityModel& model) {
  return std::string(model.log_link ? "log:" : "") + format_double(model.beta0) + "," + format_double(model.beta[0]) + "," +
         format_double(model.beta[1]) + "," + format_double(model.beta[2]) + "," +
         format_double(model.gamma);
}

IntensityModel parse_intensity(std::string_view text) {
  text = trim(text);
  if (text == "galaxy_fit") return IntensityModel::galaxy_fit();
  if (text == "galaxy_fit_log") return IntensityModel::galaxy_fit_log();
  if (text.starts_with("constant:")) {
    return IntensityModel::constant(parse_double(text.substr(9), "constant intensity"));
  }
  const bool log_link = text.starts_with("log:");
  if (log_link) text.remove_prefix(4);
  const auto parts = split(text, ',');
  require(parts.size() == 5, ErrorCode::kParse,
          "intensity must be galaxy_fit, galaxy_fit_log, constant:<lambda> or [log:]b0,bx,by,bz,gamma");
  return {parse_double(parts[0], "intensity b0"),
          {parse_double(parts[1], "intensity bx"), parse_double(parts[2], "intensity by"),
           parse_double(parts[3], "intensity bz")},
          parse_double(parts[4], "intensity gamma"),
          log_link};
}

std::string_view process_kind_name(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::kPoisson: return "poisson";
    case ProcessKind::kThomas: return "thomas";
    case ProcessKind::kLgcp: return "lgcp";
  }
  return "unknown";
}

ProcessKind parse_process_kind(std::string_view name) {
  for (ProcessKind k : {ProcessKind::kPoisson, ProcessKind::kThomas, ProcessKind::kLgcp}) {
    if (process_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown process '" + std::string(name) + "'");
}

KeyValues format_model(const ModelSpec& spec) {
  KeyValues out{{"process", std::string(process_kind_name(spec.kind))}};
  if (spec.kind == ProcessKind::kThomas) {
    out.emplace_back("kappa", format_double(spec.thomas.kappa));
    out.emplace_back("xi", format_double(spec.thomas.xi));
  } else if (spec.kind == ProcessKind::kLgcp) {
    for (auto& kv : format_covariance(spec.covariance)) out.push_back(std::move(kv));
  }
  out.emplace_back("intensity", format_intensity(spec.intensity));
  return out;
}

ModelSpec parse_model(const KeyValues& values) {
  static const char* const kKnown[] = {"process", "kappa", "xi", "family", "variance", "alpha",
                                       "phi", "nu", "tau", "delta", "intensity"};
  for (const auto& [k, v] : values) {
    bool known = false;
    for (const char* name : kKnown) known = known || k == name;
    require(known, ErrorCode::kParse, "unknown model key '" + k + "'");
  }
  ModelSpec spec;
  const auto process = find_value(values, "process");
  require(process.has_value(), ErrorCode::kParse, "model needs process=poisson|thomas|lgcp");
  spec.kind = parse_process_kind(*process);
  if (const auto v = find_value(values, "intensity")) spec.intensity = parse_intensity(*v);
  if (spec.kind == ProcessKind::kThomas) {
    double kappa = 1.0, xi = 1.0;
    if (const auto v = find_value(values, "kappa")) kappa = parse_double(*v, "kappa");
    if (const auto v = find_value(values, "xi")) xi = parse_double(*v, "xi");
    spec.thomas = ThomasParams(kappa, xi);
  } else if (spec.kind == ProcessKind::kLgcp) {
    KeyValues cov = values;
    if (!find_value(values, "family")) cov.emplace_back("family", "multiquadric");
    spec.covariance = parse_covariance(cov);
  }
  return spec;
}

ProcessModel to_process_model(const ModelSpec& spec, std::size_t grid_n) {
  switch (spec.kind) {
    case ProcessKind::kPoisson:
      return PoissonProcess{spec.intensity};
    case ProcessKind::kThomas:
      return ThomasProcess{spec.thomas, spec.intensity};
    case ProcessKind::kLgcp: {
      auto mesh = std::make_shared<const GridMesh>(build_grid(grid_n));
      auto fact = std::make_shared<const FieldFactorization>(factorize(mesh, spec.covariance));
      return LgcpProcess{LgcpParams{spec.intensity, spec.covariance}, std::move(fact)};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown process kind");
}

void write_fit_report(std::ostream& out, std::string_view model, const FitResult& fit,
                      const ContrastSpec& spec) {
  KeyValues kv{{"model", std::string(model)}};
  for (std::size_t i = 0; i < fit.params.size(); ++i) {
    kv.emplace_back(fit.param_names[i], format_double(fit.params[i]));
  }
  kv.emplace_back("contrast", format_double(fit.contrast_value));
  kv.emplace_back("n_evals", std::to_string(fit.n_evals));
  kv.emplace_back("converged", fit.converged ? "true" : "false");
  kv.emplace_back("at_boundary", fit.at_boundary ? "true" : "false");
  kv.emplace_back("interval_a", format_double(spec.a));
  kv.emplace_back("interval_b", format_double(spec.b));
  kv.emplace_back("exponent", format_double(spec.exponent));
  kv.emplace_back("n_quad", std::to_string(spec.n_quad));
  write_key_values(out, kv);
}

void write_fit_trace(std::ostream& out, const FitResult& fit) {
  out << "eval";
  for (const auto& name : fit.param_names) out << ',' << name;
  out << ",value\n";
  for (std::size_t i = 0; i < fit.trace.size(); ++i) {
    out << i;
    for (double p : fit.trace[i].params) out << ',' << format_double(p);
    out << ',' << format_double(fit.trace[i].value) << '\n';
  }
}

}  // namespace sphcox
