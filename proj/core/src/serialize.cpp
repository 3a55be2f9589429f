#include "mrenet/serialize.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "mrenet/error.hpp"

namespace mrenet::io {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_records_csv(std::ostream& out, std::span<const GpsRecord> records) {
  out << "runner_id,timestamp_s,cumulative_distance_m\n";
  for (const auto& r : records) {
    out << r.runner_id << ',' << format_number(r.timestamp) << ',' << format_number(r.cumulative_distance) << '\n';
  }
}

void write_field_tests_csv(std::ostream& out, std::span<const FieldTest> tests) {
  out << "runner_id,period_index,distance_m,performance_s\n";
  for (const auto& t : tests) {
    out << t.runner_id << ',' << t.period_index << ',' << t.distance_m << ',' << format_number(t.performance_s)
        << '\n';
  }
}

void write_lab_results_csv(std::ostream& out, std::span<const LabResult> labs) {
  out << "runner_id,period_index";
  for (const auto& name : kLabCovariateNames) out << ',' << name;
  out << '\n';
  for (const auto& l : labs) {
    out << l.runner_id << ',' << l.period_index;
    for (double v : l.values) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_period_windows_csv(std::ostream& out, std::span<const PeriodWindow> windows) {
  out << "runner_id,period_index,start_s,end_s\n";
  for (const auto& w : windows) {
    out << w.runner_id << ',' << w.period_index << ',' << format_number(w.start_s) << ',' << format_number(w.end_s)
        << '\n';
  }
}

void write_sessions(std::ostream& out, std::span<const Session> sessions) {
  for (const auto& s : sessions) {
    if (!s.has_speeds()) throw ArgumentError("session " + s.session_id + " has no speeds to write");
    json records = json::array();
    for (std::size_t j = 0; j < s.size(); ++j) records.push_back({s.offsets[j], s.speeds[j]});
    const json line = {{"runner_id", s.runner_id}, {"session_id", s.session_id}, {"start", s.start},
                       {"duration", s.duration()}, {"records", std::move(records)}};
    out << line.dump() << '\n';
  }
}

std::vector<Session> read_sessions(std::istream& in) {
  std::vector<Session> sessions;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      Session s;
      s.runner_id = j.at("runner_id").get<std::string>();
      s.session_id = j.at("session_id").get<std::string>();
      s.start = j.at("start").get<double>();
      for (const auto& rec : j.at("records")) {
        if (!rec.is_array() || rec.size() != 2) throw ParseError(line, "record must be a [T, V] pair");
        const double t = rec[0].get<double>();
        const double v = rec[1].get<double>();
        if (!std::isfinite(v) || v < 0.0) throw ParseError(line, "speed must be finite and >= 0");
        if (!s.offsets.empty() && !(t > s.offsets.back())) {
          throw ParseError(line, "offsets must be strictly increasing");
        }
        s.offsets.push_back(t);
        s.speeds.push_back(v);
      }
      if (s.offsets.size() < 2 || s.offsets.front() != 0.0) {
        throw ParseError(line, "session needs at least two records starting at offset 0");
      }
      if (j.at("duration").get<double>() != s.duration()) {
        throw ParseError(line, "duration does not match the last offset");
      }
      sessions.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  return sessions;
}

void write_profiles_csv(std::ostream& out, std::span<const TrainingDistributionProfile> profiles) {
  out << "session_id,v,P\n";
  for (const auto& p : profiles) {
    out << p.session_id << ",-1," << format_number(p.total_duration) << '\n';
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      out << p.session_id << ',' << format_number(p.grid[i]) << ',' << format_number(p.values[i]) << '\n';
    }
  }
}

json to_json(const PeriodSet& periods) {
  json grid = json::array();
  if (!periods.periods.empty()) {
    for (double v : periods.periods.front().grid.speeds()) grid.push_back(v);
  }
  json list = json::array();
  for (const auto& p : periods.periods) {
    list.push_back({{"runner_id", p.runner_id},
                    {"period_index", p.period_index},
                    {"session_count", p.session_count},
                    {"mean_session_length", p.mean_session_length},
                    {"values", p.values}});
  }
  json dropped = json::array();
  for (const auto& k : periods.uninformative) {
    dropped.push_back({{"runner_id", k.runner_id}, {"period_index", k.period_index}});
  }
  return {{"grid", std::move(grid)}, {"periods", std::move(list)}, {"uninformative", std::move(dropped)}};
}

PeriodSet period_set_from_json(const json& j) {
  try {
    PeriodSet set;
    const auto& periods = j.at("periods");
    if (!periods.empty()) {
      const SpeedGrid grid(j.at("grid").get<std::vector<double>>());
      for (const auto& p : periods) {
        PeriodProfile profile;
        profile.runner_id = p.at("runner_id").get<std::string>();
        profile.period_index = p.at("period_index").get<int>();
        profile.session_count = p.at("session_count").get<std::size_t>();
        profile.mean_session_length = p.at("mean_session_length").get<double>();
        profile.values = p.at("values").get<std::vector<double>>();
        profile.grid = grid;
        if (profile.values.size() != grid.size()) {
          throw ArgumentError("period " + profile.runner_id + "/" + std::to_string(profile.period_index) +
                              " has " + std::to_string(profile.values.size()) + " values for a grid of " +
                              std::to_string(grid.size()));
        }
        set.periods.push_back(std::move(profile));
      }
    }
    for (const auto& k : j.at("uninformative")) {
      set.uninformative.push_back({k.at("runner_id").get<std::string>(), k.at("period_index").get<int>()});
    }
    return set;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed period JSON: ") + e.what());
  }
}

json to_json(const PredictiveEquation& eq) {
  json scalars = json::array();
  for (const auto& s : eq.scalars) scalars.push_back({{"name", s.name}, {"coefficient", s.coefficient}});
  json intervals = json::array();
  for (const auto& t : eq.intervals) {
    intervals.push_back({{"lower", t.lower}, {"upper", t.upper}, {"coefficient_per_minute", t.coefficient_per_minute}});
  }
  return {{"resolution", eq.resolution},
          {"tau", eq.tau},
          {"alpha", eq.alpha},
          {"scalars", std::move(scalars)},
          {"intervals", std::move(intervals)}};
}

PredictiveEquation equation_from_json(const json& j) {
  try {
    PredictiveEquation eq;
    eq.resolution = j.value("resolution", 0);
    eq.tau = j.at("tau").get<double>();
    eq.alpha = j.at("alpha").get<double>();
    if (!(eq.tau > 0.0) || !std::isfinite(eq.tau) || !std::isfinite(eq.alpha)) {
      throw ArgumentError("equation needs a positive finite tau and a finite alpha");
    }
    std::set<std::string> seen;
    for (const auto& s : j.value("scalars", json::array())) {
      ScalarTerm term{s.at("name").get<std::string>(), s.at("coefficient").get<double>()};
      if (!seen.insert(term.name).second) throw ArgumentError("duplicate scalar term " + term.name);
      eq.scalars.push_back(std::move(term));
    }
    for (const auto& t : j.value("intervals", json::array())) {
      IntervalTerm term{t.at("lower").get<double>(), t.at("upper").get<double>(),
                        t.at("coefficient_per_minute").get<double>()};
      if (!(term.lower < term.upper)) throw ArgumentError("interval term needs lower < upper");
      eq.intervals.push_back(term);
    }
    return eq;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed equation JSON: ") + e.what());
  }
}

namespace {

json surface_json(const TuningResult& t) {
  json rows = json::array();
  for (const auto& row : t.surface) {
    json r = json::array();
    for (double v : row) r.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    rows.push_back(std::move(r));
  }
  return rows;
}

json fit_json(const ElasticNetFit& fit) {
  json coefs = json::array();
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    coefs.push_back({{"name", fit.names[j]},
                     {"naive", fit.naive[static_cast<Eigen::Index>(j)]},
                     {"rescaled", fit.rescaled[static_cast<Eigen::Index>(j)]}});
  }
  json active = json::array();
  for (auto j : fit.active) active.push_back(fit.names[j]);
  return {{"lambda1", fit.lambda1},
          {"lambda2", fit.lambda2},
          {"l1_fraction", fit.l1_fraction},
          {"intercept_naive", fit.intercept_naive},
          {"intercept_rescaled", fit.intercept_rescaled},
          {"coefficients", std::move(coefs)},
          {"active", std::move(active)},
          {"diagnostics",
           {{"sweeps", fit.diagnostics.sweeps},
            {"search_steps", fit.diagnostics.search_steps},
            {"kkt_violation", fit.diagnostics.kkt_violation}}}};
}

}  // namespace

json to_json(const ResolutionReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json blocks = json::array();
    for (const auto& b : e.blocks) {
      blocks.push_back({{"first", b.first},
                        {"last", b.last},
                        {"lower", b.lower},
                        {"upper", b.upper},
                        {"sign", b.sign},
                        {"persists_in", b.persists_in}});
    }
    entries.push_back({{"resolution", e.resolution},
                       {"tuning",
                        {{"lambda2", e.tuning.lambda2},
                         {"l1_fraction", e.tuning.l1_fraction},
                         {"cv_error", e.tuning.cv_error},
                         {"lambda2s", e.tuning.lambda2s},
                         {"fractions", e.tuning.fractions},
                         {"surface", surface_json(e.tuning)}}},
                       {"fit", fit_json(e.fit)},
                       {"test",
                        {{"error", e.test.error},
                         {"squared_residual_sd", e.test.squared_residual_sd},
                         {"error_sd", e.test.error_sd},
                         {"rows", e.test.rows}}},
                       {"blocks", std::move(blocks)}});
  }
  return {{"estimation_runners", report.estimation_runners},
          {"test_runners", report.test_runners},
          {"estimation_rows", report.estimation_rows},
          {"test_rows", report.test_rows},
          {"selected_resolution", report.selected_resolution},
          {"equation", to_json(report.equation)},
          {"notes", report.notes},
          {"resolutions", std::move(entries)}};
}

void write_coefficients_csv(std::ostream& out, const ResolutionReport& report) {
  out << "resolution,name,naive,rescaled,standardized\n";
  for (const auto& e : report.entries) {
    for (std::size_t j = 0; j < e.fit.names.size(); ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      out << e.resolution << ',' << e.fit.names[j] << ',' << format_number(e.fit.naive[i]) << ','
          << format_number(e.fit.rescaled[i]) << ',' << format_number(e.fit.standardized[i]) << '\n';
    }
  }
}

void write_test_errors_csv(std::ostream& out, const ResolutionReport& report) {
  out << "resolution,lambda2,l1_fraction,cv_error,test_error,error_sd,lower95,upper95,selected\n";
  for (const auto& e : report.entries) {
    out << e.resolution << ',' << format_number(e.tuning.lambda2) << ',' << format_number(e.tuning.l1_fraction)
        << ',' << format_number(e.tuning.cv_error) << ',' << format_number(e.test.error) << ','
        << format_number(e.test.error_sd) << ',' << format_number(e.test.error - 1.96 * e.test.error_sd) << ','
        << format_number(e.test.error + 1.96 * e.test.error_sd) << ','
        << (e.resolution == report.selected_resolution ? 1 : 0) << '\n';
  }
}

void write_cv_surface_csv(std::ostream& out, const ResolutionReport& report) {
  out << "resolution,lambda2,fraction,cv_error\n";
  for (const auto& e : report.entries) {
    const auto& t = e.tuning;
    for (std::size_t i = 0; i < t.lambda2s.size(); ++i) {
      for (std::size_t k = 0; k < t.fractions.size(); ++k) {
        const double v = t.surface[i][k];
        out << e.resolution << ',' << format_number(t.lambda2s[i]) << ',' << format_number(t.fractions[k]) << ','
            << (std::isfinite(v) ? format_number(v) : std::string()) << '\n';
      }
    }
  }
}

void write_path_csv(std::ostream& out, const SolutionPath& path) {
  out << "fraction,coefficient_name,value\n";
  for (std::size_t k = 0; k < path.fits.size(); ++k) {
    const auto& fit = path.fits[k];
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      out << format_number(path.fractions[k]) << ',' << fit.names[j] << ','
          << format_number(fit.standardized[static_cast<Eigen::Index>(j)]) << '\n';
    }
  }
}

json to_json(const GroundTruth& truth) {
  const auto& c = truth.config;
  json gamma = json::object();
  for (std::size_t i = 0; i < kLabCovariateCount; ++i) gamma[std::string(kLabCovariateNames[i])] = c.gamma[i];
  json coefficients = {{"tau", c.tau},
                       {"alpha", c.alpha},
                       {"gamma", std::move(gamma)},
                       {"delta0", c.delta0},
                       {"delta", {{"lower", c.delta_lower}, {"upper", c.delta_upper}, {"per_second", c.delta_magnitude}}},
                       {"noise_sd", c.noise_sd}};
  json sessions = json::array();
  for (const auto& s : truth.sessions) {
    json segments = json::array();
    for (const auto& seg : s.segments) segments.push_back({seg.speed, seg.duration, seg.recorded});
    // The true profile is a right-continuous step function: P(v) at each
    // breakpoint holds until the next one.
    std::set<double> speeds;
    for (const auto& seg : s.segments) speeds.insert(seg.speed);
    json steps = json::array();
    steps.push_back({-1.0, true_profile_value(s, -1.0)});
    for (double v : speeds) steps.push_back({v, true_profile_value(s, v)});
    sessions.push_back({{"runner_id", s.runner_id},
                        {"period_index", s.period_index},
                        {"start", s.start},
                        {"end", s.end},
                        {"segments", std::move(segments)},
                        {"profile_steps", std::move(steps)}});
  }
  json periods = json::array();
  for (const auto& p : truth.periods) {
    periods.push_back({{"runner_id", p.runner_id},
                       {"period_index", p.period_index},
                       {"session_count", p.session_count},
                       {"mean_session_length", p.mean_session_length},
                       {"band_time", p.band_time}});
  }
  return {{"seed", c.seed},
          {"coefficients", std::move(coefficients)},
          {"periods", std::move(periods)},
          {"sessions", std::move(sessions)}};
}

}  // namespace mrenet::io
