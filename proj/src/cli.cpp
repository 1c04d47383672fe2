#include "sphcox/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sphcox/envelope.hpp"
#include "sphcox/error.hpp"

namespace sphcox {

namespace {

constexpr Subcommand kAllSubcommands[] = {Subcommand::kSimulate,  Subcommand::kFit,
                                          Subcommand::kSummarize, Subcommand::kEnvelope,
                                          Subcommand::kThin,      Subcommand::kCertify};

std::string join_model(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

std::pair<double, double> parse_pair(std::string_view text, std::string_view what) {
  const auto comma = text.find(',');
  require(comma != std::string_view::npos, ErrorCode::kParse,
          std::string(what) + " must be two comma-separated numbers");
  return {parse_double(text.substr(0, comma), what), parse_double(text.substr(comma + 1), what)};
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  const double v = parse_double(text, what);
  require(v >= 0.0 && v == std::floor(v), ErrorCode::kParse,
          std::string(what) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string_view subcommand_name(Subcommand sub) {
  switch (sub) {
    case Subcommand::kSimulate: return "simulate";
    case Subcommand::kFit: return "fit";
    case Subcommand::kSummarize: return "summarize";
    case Subcommand::kEnvelope: return "envelope";
    case Subcommand::kThin: return "thin";
    case Subcommand::kCertify: return "certify";
  }
  return "unknown";
}

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : kAllSubcommands) {
    if (subcommand_name(s) == name) return s;
  }
  throw Error(ErrorCode::kParse, "unknown subcommand '" + std::string(name) + "'");
}

bool is_stochastic(Subcommand sub) {
  return sub == Subcommand::kSimulate || sub == Subcommand::kEnvelope || sub == Subcommand::kThin;
}

BandWindow window_of(const RunConfig& config) {
  if (!config.window_band) return BandWindow::full_sphere();
  return BandWindow::band_complement(config.window_band->first, config.window_band->second);
}

ContrastSpec contrast_of(const RunConfig& config) {
  if (config.interval == "short") return ContrastSpec::short_interval();
  if (config.interval == "long") return ContrastSpec::long_interval();
  const auto [a, b] = parse_pair(config.interval, "interval");
  return ContrastSpec(a, b);
}

ModelSpec model_of(const RunConfig& config) {
  if (config.model.empty()) {
    // fit defaults to Thomas; everything else only reads the intensity.
    ModelSpec spec;
    spec.kind = config.subcommand == Subcommand::kFit ? ProcessKind::kThomas : ProcessKind::kPoisson;
    return spec;
  }
  const std::filesystem::path path(config.model);
  const bool is_file = config.model.find('=') == std::string::npos && std::filesystem::exists(path);
  return parse_model(parse_key_values(is_file ? read_file(config.model) : config.model));
}

KeyValues to_manifest(const RunConfig& config) {
  KeyValues kv{{"version", std::string(kLibraryVersion)},
               {"subcommand", std::string(subcommand_name(config.subcommand))}};
  // One line per model key, so the manifest stays parseable as key=value lines.
  if (!config.model.empty()) {
    for (const auto& [k, v] : format_model(model_of(config))) kv.emplace_back("model." + k, v);
  }
  kv.emplace_back("window_band", config.window_band ? format_double(config.window_band->first) + "," +
                                                          format_double(config.window_band->second)
                                                    : "");
  kv.emplace_back("grid_n", std::to_string(config.grid_n));
  kv.emplace_back("interval", config.interval);
  kv.emplace_back("seed", config.seed ? std::to_string(*config.seed) : "");
  kv.emplace_back("n_sims", std::to_string(config.n_sims));
  kv.emplace_back("input", config.input);
  kv.emplace_back("k_hat", config.k_hat);
  kv.emplace_back("r_max", format_double(config.r_max));
  kv.emplace_back("n_r", std::to_string(config.n_r));
  kv.emplace_back("n_ref", std::to_string(config.n_ref));
  kv.emplace_back("level", format_double(config.level));
  kv.emplace_back("thinnings", std::to_string(config.thinnings));
  return kv;
}

RunConfig from_manifest(const KeyValues& manifest) {
  RunConfig c;
  auto get = [&](std::string_view key) { return find_value(manifest, key).value_or(""); };
  const std::string sub = get("subcommand");
  require(!sub.empty(), ErrorCode::kParse, "manifest has no subcommand");
  c.subcommand = parse_subcommand(sub);
  KeyValues model;
  for (const auto& [k, v] : manifest) {
    if (k.starts_with("model.")) model.emplace_back(k.substr(6), v);
  }
  c.model = join_model(model);
  if (const auto band = get("window_band"); !band.empty()) c.window_band = parse_pair(band, "window_band");
  if (const auto v = get("grid_n"); !v.empty()) c.grid_n = parse_count(v, "grid_n");
  if (const auto v = get("interval"); !v.empty()) c.interval = v;
  if (const auto v = get("seed"); !v.empty()) {
    std::uint64_t seed = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), seed);
    require(res.ec == std::errc() && res.ptr == v.data() + v.size(), ErrorCode::kParse,
            "manifest seed is not an unsigned 64-bit integer");
    c.seed = seed;
  }
  if (const auto v = get("n_sims"); !v.empty()) c.n_sims = parse_count(v, "n_sims");
  c.input = get("input");
  c.k_hat = get("k_hat");
  if (const auto v = get("r_max"); !v.empty()) c.r_max = parse_double(v, "r_max");
  if (const auto v = get("n_r"); !v.empty()) c.n_r = parse_count(v, "n_r");
  if (const auto v = get("n_ref"); !v.empty()) c.n_ref = parse_count(v, "n_ref");
  if (const auto v = get("level"); !v.empty()) c.level = parse_double(v, "level");
  if (const auto v = get("thinnings"); !v.empty()) c.thinnings = parse_count(v, "thinnings");
  return c;
}

// ---------------------------------------------------------------------------

namespace {

class Runner {
 public:
  Runner(const RunConfig& config, std::ostream& log) : config_(config), log_(log) {}

  void execute() {
    require(!is_stochastic(config_.subcommand) || config_.seed.has_value(),
            ErrorCode::kInvalidArgument,
            "--seed is required for " + std::string(subcommand_name(config_.subcommand)));
    for (const std::string* path : {&config_.input, &config_.k_hat}) {
      require(path->empty() || std::filesystem::exists(*path), ErrorCode::kIo,
              "input file does not exist: " + *path);
    }
    std::filesystem::create_directories(config_.out);
    switch (config_.subcommand) {
      case Subcommand::kSimulate: simulate(); break;
      case Subcommand::kFit: fit(); break;
      case Subcommand::kSummarize: summarize(); break;
      case Subcommand::kEnvelope: envelope(); break;
      case Subcommand::kThin: thin(); break;
      case Subcommand::kCertify: certify(); break;
    }
    KeyValues manifest = to_manifest(config_);
    for (auto& kv : results_) manifest.push_back(std::move(kv));
    std::ostringstream ss;
    ss << "# sphcox run manifest\n";
    write_key_values(ss, manifest);
    emit("manifest.txt", ss.str());
  }

 private:
  void emit(const std::string& name, const std::string& contents) {
    const std::string path = (std::filesystem::path(config_.out) / name).string();
    write_file(path, contents);
    log_ << "wrote " << path << '\n';
  }

  template <typename Writer>
  void emit_with(const std::string& name, Writer&& writer) {
    std::ostringstream ss;
    writer(ss);
    emit(name, ss.str());
  }

  void note(std::string key, std::string value) {
    log_ << key << '=' << value << '\n';
    results_.emplace_back("result." + key, std::move(value));
  }

  PointPattern load_input() {
    require(!config_.input.empty(), ErrorCode::kInvalidArgument,
            std::string(subcommand_name(config_.subcommand)) + " needs --input <pattern.csv>");
    CatalogIngest ingest = ingest_catalog(config_.input, window_of(config_));
    note("n_points", std::to_string(ingest.pattern.size()));
    note("omitted", std::to_string(ingest.omitted));
    return std::move(ingest.pattern);
  }

  ModelSpec required_model() {
    require(!config_.model.empty(), ErrorCode::kInvalidArgument,
            std::string(subcommand_name(config_.subcommand)) + " needs --model");
    return model_of(config_);
  }

  DistanceGrid fgj_grid() const {
    require(config_.n_r >= 2, ErrorCode::kInvalidArgument, "--n-r must be at least 2");
    return DistanceGrid::linspace(0.0, config_.r_max, config_.n_r);
  }

  void simulate() {
    const ModelSpec spec = required_model();
    const ProcessModel model = to_process_model(spec, config_.grid_n);
    Rng rng = make_stream(*config_.seed, 0);
    const PointPattern pattern = simulate_process(model, window_of(config_), rng);
    note("n_points", std::to_string(pattern.size()));
    emit_with("pattern.csv", [&](std::ostream& os) { write_pattern_csv(os, pattern); });
  }

  void fit() {
    const ModelSpec spec = model_of(config_);
    const ContrastSpec contrast = contrast_of(config_);
    const SummaryCurve k_hat = estimated_k(spec, contrast);

    FitResult result;
    ModelSpec fitted = spec;
    if (spec.kind == ProcessKind::kThomas) {
      result = fit_thomas(k_hat, contrast);
    } else if (spec.kind == ProcessKind::kLgcp) {
      result = fit_lgcp(k_hat, contrast, spec.covariance.family());
    } else {
      throw Error(ErrorCode::kUnsupported, "fit supports process=thomas or process=lgcp");
    }
    require(std::isfinite(result.contrast_value), ErrorCode::kNumerical,
            "every initial contrast evaluation was non-finite");
    if (spec.kind == ProcessKind::kThomas) {
      fitted.thomas = result.thomas_params();
    } else {
      fitted.covariance = result.covariance_model();
    }
    for (std::size_t i = 0; i < result.params.size(); ++i) {
      note(result.param_names[i], format_double(result.params[i]));
    }
    note("contrast", format_double(result.contrast_value));
    note("converged", result.converged ? "true" : "false");
    const std::string name(process_kind_name(spec.kind));
    emit_with("fit_report.txt", [&](std::ostream& os) { write_fit_report(os, name, result, contrast); });
    emit_with("fit_trace.csv", [&](std::ostream& os) { write_fit_trace(os, result); });
    emit_with("fitted_model.txt", [&](std::ostream& os) { write_key_values(os, format_model(fitted)); });
  }

  SummaryCurve estimated_k(const ModelSpec& spec, const ContrastSpec& contrast) {
    if (!config_.k_hat.empty()) {
      std::ifstream in(config_.k_hat);
      for (auto& curve : read_curve_csv(in)) {
        if (curve.kind == CurveKind::kK) return std::move(curve);
      }
      throw Error(ErrorCode::kMissingData, config_.k_hat + " holds no K curve");
    }
    const PointPattern pattern = load_input();
    return estimate_k_inhom(pattern, spec.intensity, contrast.nodes());
  }

  void summarize() {
    const ModelSpec spec = model_of(config_);
    const PointPattern pattern = load_input();
    const ContrastSpec contrast = contrast_of(config_);
    const SummaryCurve k =
        estimate_k_inhom(pattern, spec.intensity, DistanceGrid::linspace(contrast.a, contrast.b, 512));
    emit_with("k.csv", [&](std::ostream& os) { write_curve_csv(os, {k}); });

    PointPattern homogeneous = pattern;
    if (!spec.intensity.is_constant()) {
      require(config_.seed.has_value(), ErrorCode::kInvalidArgument,
              "--seed is required to thin a pattern with non-constant intensity");
      Rng rng = make_stream(*config_.seed, 0);
      homogeneous = independent_thinning(pattern, spec.intensity, rng);
      note("n_thinned", std::to_string(homogeneous.size()));
    }
    const FgjCurves fgj = estimate_fgj(homogeneous, fgj_grid(), config_.n_ref);
    emit_with("fgj.csv", [&](std::ostream& os) { write_curve_csv(os, {fgj.F, fgj.G, fgj.J}); });
  }

  void envelope() {
    const ModelSpec spec = required_model();
    const PointPattern data = load_input();
    const ProcessModel model = to_process_model(spec, config_.grid_n);
    GofOptions options;
    options.n_sims = config_.n_sims;
    options.level = config_.level;
    options.n_ref = config_.n_ref;
    require(config_.thinnings >= 1, ErrorCode::kInvalidArgument, "--thinnings must be at least 1");

    EnvelopeResult result;
    if (config_.thinnings == 1) {
      result = run_gof_pipeline(model, data, spec.intensity, fgj_grid(), options, *config_.seed);
    } else {
      const ThinningSweep sweep = thinning_sweep(model, data, spec.intensity, fgj_grid(), options,
                                                 config_.thinnings, *config_.seed);
      result = sweep.envelope;
      note("p_hi_mean", format_double(sweep.p_hi_mean));
      note("p_hi_variance", format_double(sweep.p_hi_variance));
      emit_with("p_intervals.csv", [&](std::ostream& os) { write_sweep_csv(os, sweep); });
    }
    note("p_lo", format_double(result.p_lo));
    note("p_hi", format_double(result.p_hi));
    emit_with("envelope.csv", [&](std::ostream& os) { write_envelope_csv(os, result); });
    emit_with("envelope_summary.txt", [&](std::ostream& os) { write_envelope_summary(os, result); });
  }

  void thin() {
    const ModelSpec spec = model_of(config_);
    const PointPattern pattern = load_input();
    Rng rng = make_stream(*config_.seed, 0);
    const PointPattern thinned = independent_thinning(pattern, spec.intensity, rng);
    note("n_thinned", std::to_string(thinned.size()));
    emit_with("pattern.csv", [&](std::ostream& os) { write_pattern_csv(os, thinned); });
  }

  void certify() {
    std::vector<CovarianceModel> models;
    if (!config_.model.empty()) {
      const ModelSpec spec = model_of(config_);
      require(spec.kind == ProcessKind::kLgcp, ErrorCode::kInvalidArgument,
              "certify needs an lgcp model or no model");
      models.push_back(spec.covariance);
    } else {
      models = {CovarianceModel::powered_exponential(1.0, 0.5, 1.0),
                CovarianceModel::matern(1.0, 0.3, 0.5),
                CovarianceModel::generalized_cauchy(1.0, 0.7, 1.0, 2.0),
                CovarianceModel::dagum(1.0, 0.5, 1.0, 0.8),
                CovarianceModel::multiquadric(1.0, 0.5, 1.0),
                CovarianceModel::sine_power(1.0, 1.0),
                CovarianceModel::spherical(1.0, 1.0),
                CovarianceModel::askey(1.0, 1.0, 3.0),
                CovarianceModel::c2_wendland(1.0, 1.0, 4.0),
                CovarianceModel::c4_wendland(1.0, 1.0, 6.0)};
    }
    constexpr std::size_t kSamples = 10000;
    std::ostringstream csv;
    csv << "family,model,s,ell,m,verified\n";
    std::size_t failures = 0;
    for (const auto& model : models) {
      const HoelderCertificate cert = holder_certificate(model);
      const bool ok = verify_certificate(model, cert, kSamples);
      failures += !ok;
      csv << family_name(model.family()) << ',' << join_model(format_covariance(model)) << ','
          << format_double(cert.s) << ',' << format_double(cert.ell) << ',' << format_double(cert.m)
          << ',' << (ok ? "true" : "false") << '\n';
      log_ << family_name(model.family()) << (ok ? " verified" : " FAILED") << '\n';
    }
    emit("certificates.csv", csv.str());
    note("n_failed", std::to_string(failures));
    require(failures == 0, ErrorCode::kNumerical,
            std::to_string(failures) + " certificate(s) failed verification");
  }

  RunConfig config_;
  std::ostream& log_;
  KeyValues results_;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    Runner(config, log).execute();
    return 0;
  } catch (const Error& e) {
    err << "error=" << error_code_name(e.code()) << ": " << one_line(e.what()) << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error=" << error_code_name(ErrorCode::kIo) << ": " << one_line(e.what()) << '\n';
  } catch (const std::exception& e) {
    err << "error=internal: " << one_line(e.what()) << '\n';
  }
  return 1;
}

int cli_main(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Log Gaussian Cox and Thomas processes on the sphere", "sphcox"};
  app.fallthrough();
  app.set_version_flag("--version", std::string(kLibraryVersion));

  RunConfig config;
  std::string window_band, from_manifest_path;
  std::optional<std::string> out_override;
  app.add_option("--model", config.model,
                 "Model as key=value pairs separated by ';', or a file holding them");
  app.add_option("--window-band", window_band,
                 "Excluded colatitude band 'lo,hi' in radians; the window is its complement");
  app.add_option("--grid-n", config.grid_n, "Nodes of the Fibonacci mesh for LGCP fields");
  app.add_option("--interval", config.interval, "Contrast interval: short, long or 'a,b'");
  app.add_option("--seed", config.seed, "Root seed (required by simulate, envelope, thin)");
  app.add_option("--n-sims", config.n_sims, "Simulated replicates in the envelope test");
  app.add_option("--out", out_override, "Output directory");
  app.add_option("--input", config.input, "Pattern CSV with header theta,phi");
  app.add_option("--k-hat", config.k_hat, "K curve CSV for fit (instead of --input)");
  app.add_option("--r-max", config.r_max, "Largest distance of the F/G/J grid");
  app.add_option("--n-r", config.n_r, "Points of the F/G/J grid");
  app.add_option("--n-ref", config.n_ref, "Reference locations for F");
  app.add_option("--level", config.level, "Envelope level");
  app.add_option("--thinnings", config.thinnings,
                 "Observed-data thinnings; above 1 runs the sensitivity sweep");
  app.add_option("--from-manifest", from_manifest_path,
                 "Re-run the configuration recorded in a manifest.txt");

  std::vector<std::pair<CLI::App*, Subcommand>> subs;
  subs.emplace_back(app.add_subcommand("simulate", "Simulate a pattern from --model"), Subcommand::kSimulate);
  subs.emplace_back(app.add_subcommand("fit", "Minimum-contrast fit of a Thomas or LGCP model"), Subcommand::kFit);
  subs.emplace_back(app.add_subcommand("summarize", "Estimate K and F/G/J of a pattern"), Subcommand::kSummarize);
  subs.emplace_back(app.add_subcommand("envelope", "Global rank envelope test of --model"), Subcommand::kEnvelope);
  subs.emplace_back(app.add_subcommand("thin", "Thin a pattern to homogeneity"), Subcommand::kThin);
  subs.emplace_back(app.add_subcommand("certify", "Hoelder certificates of covariance models"), Subcommand::kCertify);
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, log, err);
  } catch (const CLI::ParseError& e) {
    err << "error=usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (!from_manifest_path.empty()) {
      config = from_manifest(parse_key_values(read_file(from_manifest_path)));
    } else {
      bool chosen = false;
      for (const auto& [sub, kind] : subs) {
        if (sub->parsed()) {
          config.subcommand = kind;
          chosen = true;
        }
      }
      require(chosen, ErrorCode::kInvalidArgument,
              "a subcommand is required: simulate|fit|summarize|envelope|thin|certify");
      if (!window_band.empty()) config.window_band = parse_pair(window_band, "--window-band");
    }
  } catch (const Error& e) {
    err << "error=" << error_code_name(e.code()) << ": " << one_line(e.what()) << '\n';
    return 2;
  }
  if (out_override) config.out = *out_override;
  return run(config, log, err);
}

}  // namespace sphcox
