#include "mrenet/study.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mrenet/csv.hpp"
#include "mrenet/error.hpp"
#include "mrenet/random.hpp"

namespace mrenet {

namespace {
constexpr std::array<std::string_view, 4> kFieldHeader = {"runner_id", "period_index", "distance_m",
                                                          "performance_s"};
constexpr std::array<std::string_view, 10> kLabHeader = {
    "runner_id",  "period_index", "weight_kg",    "height_cm",    "age_y",
    "vo2max_ml",  "vo2max_kmh",   "economy_ml",   "economy_kcal", "obla_ms"};
constexpr std::array<std::string_view, 4> kPeriodHeader = {"runner_id", "period_index", "start_s", "end_s"};

int period_field(const csv::Reader& reader, const std::string& field) {
  const long v = reader.integer(field, "period_index");
  if (v < 1) throw ParseError(reader.line(), "period_index must be >= 1");
  return static_cast<int>(v);
}
}  // namespace

std::vector<FieldTest> parse_field_tests(std::istream& in) {
  csv::Reader reader(in, kFieldHeader);
  std::vector<FieldTest> out;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f[0].empty()) throw ParseError(reader.line(), "empty runner_id");
    FieldTest t;
    t.runner_id = f[0];
    t.period_index = period_field(reader, f[1]);
    t.distance_m = static_cast<int>(reader.integer(f[2], kFieldHeader[2]));
    if (std::find(kFieldTestDistances.begin(), kFieldTestDistances.end(), t.distance_m) ==
        kFieldTestDistances.end()) {
      throw ParseError(reader.line(), "distance_m must be one of 1200, 2400, 3600");
    }
    t.performance_s = reader.number(f[3], kFieldHeader[3]);
    if (!(t.performance_s > 0.0)) throw ParseError(reader.line(), "performance_s must be positive");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<LabResult> parse_lab_results(std::istream& in) {
  csv::Reader reader(in, kLabHeader);
  std::vector<LabResult> out;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f[0].empty()) throw ParseError(reader.line(), "empty runner_id");
    LabResult r;
    r.runner_id = f[0];
    r.period_index = period_field(reader, f[1]);
    for (std::size_t i = 0; i < kLabCovariateCount; ++i) {
      r.values[i] = reader.number(f[i + 2], kLabHeader[i + 2]);
      if (!(r.values[i] > 0.0)) {
        throw ParseError(reader.line(), std::string(kLabHeader[i + 2]) + " must be positive");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PeriodWindow> parse_period_windows(std::istream& in) {
  csv::Reader reader(in, kPeriodHeader);
  std::vector<PeriodWindow> out;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f[0].empty()) throw ParseError(reader.line(), "empty runner_id");
    PeriodWindow w;
    w.runner_id = f[0];
    w.period_index = period_field(reader, f[1]);
    w.start_s = reader.number(f[2], kPeriodHeader[2]);
    w.end_s = reader.number(f[3], kPeriodHeader[3]);
    if (!(w.end_s > w.start_s)) throw ParseError(reader.line(), "end_s must exceed start_s");
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> StudyTable::runners() const {
  std::vector<std::string> out;
  for (const auto& k : keys) out.push_back(k.runner_id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StudyTable StudyTable::subset(std::span<const std::size_t> rows) const {
  StudyTable out;
  out.resolution = resolution;
  out.column_names = column_names;
  out.covariates.resize(static_cast<Eigen::Index>(rows.size()), covariates.cols());
  out.response.resize(static_cast<Eigen::Index>(rows.size()));
  out.performance.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    const auto o = static_cast<Eigen::Index>(i);
    out.keys.push_back(keys[rows[i]]);
    out.covariates.row(o) = covariates.row(r);
    out.response(o) = response(r);
    out.performance(o) = performance(r);
  }
  return out;
}

std::vector<std::string> study_column_names(int G) {
  std::vector<std::string> names;
  names.emplace_back("log_distance");
  for (auto n : kLabCovariateNames) names.emplace_back(n);
  names.emplace_back("mean_session_length");
  for (int g = 1; g <= G; ++g) names.push_back("interval_" + std::to_string(g));
  return names;
}

StudyTable build_table(std::span<const FieldTest> field_tests, std::span<const LabResult> lab_results,
                       const PeriodSet& periods, int G) {
  if (G < 1) throw ArgumentError("resolution G must be >= 1");

  std::map<PeriodKey, const LabResult*> labs;
  for (const auto& l : lab_results) {
    if (!labs.emplace(PeriodKey{l.runner_id, l.period_index}, &l).second) {
      throw JoinError("duplicate lab result for runner '" + l.runner_id + "' period " +
                      std::to_string(l.period_index));
    }
  }

  std::vector<const FieldTest*> tests;
  for (const auto& t : field_tests) {
    if (periods.is_uninformative(t.runner_id, t.period_index)) continue;
    tests.push_back(&t);
  }
  std::sort(tests.begin(), tests.end(), [](const FieldTest* a, const FieldTest* b) {
    return RowKey{a->runner_id, a->period_index, a->distance_m} <
           RowKey{b->runner_id, b->period_index, b->distance_m};
  });
  for (std::size_t i = 1; i < tests.size(); ++i) {
    if (tests[i]->runner_id == tests[i - 1]->runner_id && tests[i]->period_index == tests[i - 1]->period_index &&
        tests[i]->distance_m == tests[i - 1]->distance_m) {
      throw JoinError("duplicate field test for runner '" + tests[i]->runner_id + "' period " +
                      std::to_string(tests[i]->period_index) + " distance " +
                      std::to_string(tests[i]->distance_m));
    }
  }

  StudyTable table;
  table.resolution = G;
  table.column_names = study_column_names(G);
  const auto n = static_cast<Eigen::Index>(tests.size());
  const auto p = static_cast<Eigen::Index>(table.column_names.size());
  table.covariates.resize(n, p);
  table.response.resize(n);
  table.performance.resize(n);

  // interval times are shared by the three distances of a field test
  std::map<PeriodKey, std::vector<double>> interval_cache;

  for (Eigen::Index i = 0; i < n; ++i) {
    const FieldTest& t = *tests[static_cast<std::size_t>(i)];
    const PeriodKey key{t.runner_id, t.period_index};
    const auto lab = labs.find(key);
    if (lab == labs.end()) {
      throw JoinError("no lab result for runner '" + t.runner_id + "' period " + std::to_string(t.period_index));
    }
    const PeriodProfile* period = periods.find(t.runner_id, t.period_index);
    if (period == nullptr) {
      throw JoinError("no period profile for runner '" + t.runner_id + "' period " +
                      std::to_string(t.period_index));
    }
    auto cached = interval_cache.find(key);
    if (cached == interval_cache.end()) cached = interval_cache.emplace(key, interval_times(*period, G)).first;

    table.keys.push_back({t.runner_id, t.period_index, t.distance_m});
    table.covariates(i, 0) = std::log(static_cast<double>(t.distance_m));
    for (std::size_t c = 0; c < kLabCovariateCount; ++c) {
      table.covariates(i, static_cast<Eigen::Index>(c + 1)) = lab->second->values[c];
    }
    table.covariates(i, static_cast<Eigen::Index>(kMeanSessionColumn)) = period->mean_session_length;
    for (int g = 0; g < G; ++g) {
      table.covariates(i, static_cast<Eigen::Index>(kScalarColumnCount) + g) =
          cached->second[static_cast<std::size_t>(g)];
    }
    table.performance(i) = t.performance_s;
    table.response(i) = std::log(t.performance_s);
  }
  return table;
}

std::vector<std::string> choose_test_runners(std::vector<std::string> runners, std::size_t count,
                                             std::uint64_t seed) {
  std::sort(runners.begin(), runners.end());
  runners.erase(std::unique(runners.begin(), runners.end()), runners.end());
  if (runners.size() < count + 1) {
    throw ArgumentError("need at least " + std::to_string(count + 1) + " runners to hold out " +
                        std::to_string(count) + ", have " + std::to_string(runners.size()));
  }
  Rng rng(seed);
  rng.shuffle(runners);
  runners.resize(count);
  std::sort(runners.begin(), runners.end());
  return runners;
}

std::pair<StudyTable, StudyTable> partition_by_runners(const StudyTable& table,
                                                       const std::set<std::string>& test_runners) {
  std::vector<std::size_t> estimation, test;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    (test_runners.count(table.keys[i].runner_id) ? test : estimation).push_back(i);
  }
  return {table.subset(estimation), table.subset(test)};
}

std::pair<StudyTable, StudyTable> split_by_runner(const StudyTable& table, std::size_t test_runner_count,
                                                  std::uint64_t seed) {
  const auto chosen = choose_test_runners(table.runners(), test_runner_count, seed);
  return partition_by_runners(table, std::set<std::string>(chosen.begin(), chosen.end()));
}

}  // namespace mrenet
