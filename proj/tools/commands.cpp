#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "mrenet/error.hpp"
#include "mrenet/gps_ingest.hpp"
#include "mrenet/profile.hpp"
#include "mrenet/serialize.hpp"
#include "mrenet/study.hpp"

namespace mrenet::cli {

using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path, const char* what) {
  if (path.empty()) throw ArgumentError(std::string("missing input: ") + what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError(std::string("cannot open ") + what + " '" + path.string() + "'");
  return in;
}

// Parse errors are rethrown with the file name so diagnostics read file:line.
template <class Fn>
auto parse_file(const fs::path& path, const char* what, Fn&& fn) {
  auto in = open_input(path, what);
  try {
    return fn(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  }
}

fs::path output(const fs::path& dir, const std::string& name) { return dir / name; }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ArgumentError("write failed for '" + path.string() + "'");
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_file(path, ss.str());
}

json pipeline_config(const RunConfig& c) {
  return {{"gap_threshold", c.gap_threshold},
          {"min_session", c.min_session},
          {"max_sampling_gap", c.max_sampling_gap},
          {"clean_speed", c.clean_speed},
          {"clean_seconds", c.clean_seconds},
          {"min_period_sessions", c.min_period_sessions},
          {"resolutions", c.resolutions},
          {"lambda2_grid", c.lambda2_grid},
          {"fractions", c.fractions},
          {"folds", c.folds},
          {"repeats", c.repeats},
          {"seed", c.seed},
          {"test_runners", c.test_runners}};
}

void ensure_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ArgumentError("cannot create output directory '" + out.string() + "': " + ec.message());
}

}  // namespace

void RunConfig::validate_resolutions() const {
  if (resolutions.empty()) throw ArgumentError("resolution set is empty");
  std::set<int> seen;
  for (int G : resolutions) {
    if (G < 1) throw ArgumentError("resolution " + std::to_string(G) + " must be >= 1");
    if (!seen.insert(G).second) throw ArgumentError("resolution " + std::to_string(G) + " listed twice");
  }
}

std::vector<int> parse_resolutions(const std::string& text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ArgumentError("bad resolution list '" + text + "'");
    }
    return v;
  };
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::vector<int> parts;
    std::size_t pos = 0;
    while (true) {
      const auto next = text.find(':', pos);
      parts.push_back(to_int(std::string_view(text).substr(pos, next - pos)));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (parts.size() != 3 || parts[2] < 1 || parts[0] > parts[1]) {
      throw ArgumentError("resolution range must be first:last:step with step >= 1");
    }
    for (int g = parts[0]; g <= parts[1]; g += parts[2]) out.push_back(g);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto next = text.find(',', pos);
      out.push_back(to_int(std::string_view(text).substr(pos, next - pos)));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
  }
  return out;
}

std::string sha256_hex_bytes(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

std::string sha256_hex(const fs::path& file) {
  auto in = open_input(file, "file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex_bytes(ss.str());
}

void write_manifest(const fs::path& out, const std::string& command, const json& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  json in = json::object(), produced = json::object();
  for (const auto& p : inputs) in[p.string()] = sha256_hex(p);
  for (const auto& p : outputs) produced[p.filename().string()] = sha256_hex(p);
  const std::string canonical = config.dump();
  const json manifest = {{"command", command},
                         {"tool_version", "0.1.0"},
                         {"config", config},
                         {"config_sha256", sha256_hex_bytes(canonical)},
                         {"inputs", std::move(in)},
                         {"outputs", std::move(produced)}};
  write_file(output(out, "manifest_" + command + ".json"), manifest.dump(2) + "\n");
}

IngestSummary cmd_ingest(const RunConfig& c) {
  auto parsed = parse_file(c.records, "GPS records", [](std::istream& in) { return parse_records(in); });
  const auto sessions = segment_sessions(parsed.records, {c.gap_threshold, c.min_session});
  std::vector<Session> with_speeds;
  with_speeds.reserve(sessions.size());
  for (const auto& s : sessions) with_speeds.push_back(compute_speed_profile(s, c.max_sampling_gap));

  ensure_out(c.out);
  IngestSummary summary{parsed.records.size(), with_speeds.size(), parsed.warnings};
  const auto sessions_path = output(c.out, "sessions.jsonl");
  const auto summary_path = output(c.out, "ingest_summary.json");
  write_with(sessions_path, [&](std::ostream& o) { io::write_sessions(o, with_speeds); });
  const json j = {{"records", summary.records},
                  {"sessions", summary.sessions},
                  {"duplicates_removed", summary.warnings.duplicates_removed},
                  {"conflicting_timestamps", summary.warnings.conflicting_timestamps},
                  {"distance_resets", summary.warnings.distance_resets}};
  write_file(summary_path, j.dump(2) + "\n");
  const json cfg = {{"gap_threshold", c.gap_threshold},
                    {"min_session", c.min_session},
                    {"max_sampling_gap", c.max_sampling_gap}};
  write_manifest(c.out, "ingest", cfg, {c.records}, {sessions_path, summary_path});
  return summary;
}

ProfileSummary cmd_profile(const RunConfig& c) {
  c.validate_resolutions();
  const auto sessions = parse_file(c.sessions, "sessions", [](std::istream& in) { return io::read_sessions(in); });
  const auto windows =
      parse_file(c.period_windows, "period windows", [](std::istream& in) { return parse_period_windows(in); });
  const auto grid = SpeedGrid::for_resolutions(c.resolutions);

  std::vector<TrainingDistributionProfile> profiles;
  profiles.reserve(sessions.size());
  for (const auto& s : sessions) profiles.push_back(smooth_profile(observed_profile(s, grid)));
  auto cleaned = clean_sessions(std::move(profiles), {c.clean_speed, c.clean_seconds});
  const auto periods = build_period_profiles(cleaned.kept, windows, c.min_period_sessions);

  ensure_out(c.out);
  const auto profiles_path = output(c.out, "profiles.csv");
  const auto periods_path = output(c.out, "periods.json");
  const auto period_csv_path = output(c.out, "period_profiles.csv");
  const auto dropped_path = output(c.out, "dropped_sessions.csv");
  write_with(profiles_path, [&](std::ostream& o) { io::write_profiles_csv(o, cleaned.kept); });
  write_file(periods_path, io::to_json(periods).dump() + "\n");
  write_with(period_csv_path, [&](std::ostream& o) {
    o << "runner_id,period_index,v,P\n";
    for (const auto& p : periods.periods) {
      o << p.runner_id << ',' << p.period_index << ",-1," << io::format_number(p.mean_session_length) << '\n';
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        o << p.runner_id << ',' << p.period_index << ',' << io::format_number(p.grid[i]) << ','
          << io::format_number(p.values[i]) << '\n';
      }
    }
  });
  write_with(dropped_path, [&](std::ostream& o) {
    o << "session_id,runner_id,seconds_above\n";
    for (const auto& p : cleaned.dropped) {
      o << p.session_id << ',' << p.runner_id << ',' << io::format_number(p.value_at(c.clean_speed)) << '\n';
    }
  });
  const json cfg = {{"resolutions", c.resolutions},
                    {"clean_speed", c.clean_speed},
                    {"clean_seconds", c.clean_seconds},
                    {"min_period_sessions", c.min_period_sessions}};
  write_manifest(c.out, "profile", cfg, {c.sessions, c.period_windows},
                 {profiles_path, periods_path, period_csv_path, dropped_path});
  return {cleaned.kept.size(), cleaned.dropped.size(), periods.periods.size(), periods.uninformative.size()};
}

ResolutionReport cmd_fit(const RunConfig& c) {
  c.validate_resolutions();
  auto tests = parse_file(c.field_tests, "field tests", [](std::istream& in) { return parse_field_tests(in); });
  auto labs = parse_file(c.lab_results, "lab results", [](std::istream& in) { return parse_lab_results(in); });
  auto periods = parse_file(c.period_profiles, "period profiles", [](std::istream& in) {
    try {
      return io::period_set_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("malformed period JSON: ") + e.what());
    }
  });
  if (periods.periods.empty()) throw ArgumentError("period profiles file has no informative periods");
  const auto& grid = periods.periods.front().grid;
  for (int G : c.resolutions) {
    if (!grid.aligned(G)) {
      throw ArgumentError("resolution " + std::to_string(G) +
                          " does not align with the profile grid; rerun `profile` with it in --resolutions");
    }
  }

  const auto runners = build_table(tests, labs, periods, c.resolutions.front()).runners();
  auto held_out = choose_test_runners(runners, c.test_runners, c.seed);

  MultiresOptions options;
  options.resolutions = c.resolutions;
  options.grid = {c.lambda2_grid, c.fractions};
  options.cv.folds = c.folds;
  options.cv.repeats = c.repeats;
  options.cv.seed = c.seed;
  options.cv.threads = std::max<std::size_t>(1, c.threads);
  auto source = make_table_source(std::move(tests), std::move(labs), std::move(periods), std::move(held_out));
  const auto report = select_resolution(source, options);

  const auto& best = report.entry(report.selected_resolution);
  const auto estimation = source(report.selected_resolution).first;
  const ElasticNetProblem problem(estimation.covariates, estimation.response, estimation.column_names);
  const auto path = solution_path(problem, best.tuning.lambda2, options.grid.fractions, options.cv.solver);

  ensure_out(c.out);
  const std::vector<fs::path> outputs = {
      output(c.out, "report.json"),       output(c.out, "equation.json"),    output(c.out, "equation.txt"),
      output(c.out, "coefficients.csv"),  output(c.out, "test_errors.csv"),  output(c.out, "cv_surface.csv"),
      output(c.out, "path.csv")};
  write_file(outputs[0], io::to_json(report).dump(2) + "\n");
  write_file(outputs[1], io::to_json(report.equation).dump(2) + "\n");
  write_file(outputs[2], render_equation(report.equation));
  write_with(outputs[3], [&](std::ostream& o) { io::write_coefficients_csv(o, report); });
  write_with(outputs[4], [&](std::ostream& o) { io::write_test_errors_csv(o, report); });
  write_with(outputs[5], [&](std::ostream& o) { io::write_cv_surface_csv(o, report); });
  write_with(outputs[6], [&](std::ostream& o) { io::write_path_csv(o, path); });
  write_manifest(c.out, "fit", pipeline_config(c), {c.field_tests, c.lab_results, c.period_profiles}, outputs);
  return report;
}

double cmd_predict(const RunConfig& c) {
  const auto eq = parse_file(c.equation, "equation", [](std::istream& in) {
    try {
      return io::equation_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("malformed equation JSON: ") + e.what());
    }
  });
  const auto cov = parse_file(c.covariates, "covariates", [](std::istream& in) {
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("malformed covariate JSON: ") + e.what());
    }
  });
  double distance = 0.0;
  std::map<std::string, double> scalars;
  std::vector<double> minutes;
  try {
    distance = cov.at("distance_m").get<double>();
    scalars = cov.value("scalars", std::map<std::string, double>{});
    minutes = cov.value("interval_minutes", std::vector<double>{});
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed covariate JSON: ") + e.what());
  }
  const double seconds = predict(eq, distance, scalars, minutes);

  ensure_out(c.out);
  const auto path = output(c.out, "prediction.json");
  write_file(path, json{{"distance_m", distance}, {"seconds", seconds}}.dump(2) + "\n");
  write_manifest(c.out, "predict", json::object(), {c.equation, c.covariates}, {path});
  return seconds;
}

SyntheticStudy cmd_simulate(const RunConfig& c) {
  auto study = generate(c.synth);
  ensure_out(c.out);
  const std::vector<fs::path> outputs = {output(c.out, "records.csv"), output(c.out, "periods.csv"),
                                         output(c.out, "lab_results.csv"), output(c.out, "field_tests.csv"),
                                         output(c.out, "truth.json")};
  write_with(outputs[0], [&](std::ostream& o) { io::write_records_csv(o, study.records); });
  write_with(outputs[1], [&](std::ostream& o) { io::write_period_windows_csv(o, study.periods); });
  write_with(outputs[2], [&](std::ostream& o) { io::write_lab_results_csv(o, study.lab_results); });
  write_with(outputs[3], [&](std::ostream& o) { io::write_field_tests_csv(o, study.field_tests); });
  write_file(outputs[4], io::to_json(study.truth).dump() + "\n");
  const auto& s = c.synth;
  const json cfg = {{"runners", s.runner_count},    {"periods", s.periods_per_runner},
                    {"sessions_min", s.sessions_min}, {"sessions_max", s.sessions_max},
                    {"period_days", s.period_days}, {"sample_interval", s.sample_interval},
                    {"tau", s.tau},                 {"alpha", s.alpha},
                    {"gamma", s.gamma},             {"delta0", s.delta0},
                    {"band_lower", s.delta_lower},  {"band_upper", s.delta_upper},
                    {"band_magnitude", s.delta_magnitude}, {"noise_sd", s.noise_sd},
                    {"interval_session_share", s.interval_session_share},
                    {"pause_share", s.pause_share}, {"seed", s.seed}};
  write_manifest(c.out, "simulate", cfg, {}, outputs);
  return study;
}

}  // namespace mrenet::cli
