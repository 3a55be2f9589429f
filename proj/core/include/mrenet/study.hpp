#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrenet/profile.hpp"

namespace mrenet {

inline constexpr std::size_t kLabCovariateCount = 8;

/// Lab covariate columns, in table order and in the lab CSV's units.
inline constexpr std::array<std::string_view, kLabCovariateCount> kLabCovariateNames = {
    "weight_kg", "height_cm", "age_y", "vo2max_ml", "vo2max_kmh", "economy_ml", "economy_kcal", "obla_ms"};

/// Laboratory measurements at the end of a training period.
struct LabResult {
  std::string runner_id;
  int period_index = 0;
  std::array<double, kLabCovariateCount> values{};  // order of kLabCovariateNames

  double weight_kg() const { return values[0]; }
  double height_cm() const { return values[1]; }
  double obla_ms() const { return values[7]; }
};

/// Best-effort time over one of the standard distances at the end of a period.
struct FieldTest {
  std::string runner_id;
  int period_index = 0;
  int distance_m = 0;  // 1200, 2400 or 3600
  double performance_s = 0.0;
};

inline constexpr std::array<int, 3> kFieldTestDistances = {1200, 2400, 3600};

std::vector<FieldTest> parse_field_tests(std::istream& in);
std::vector<LabResult> parse_lab_results(std::istream& in);
std::vector<PeriodWindow> parse_period_windows(std::istream& in);

struct RowKey {
  std::string runner_id;
  int period_index = 0;
  int distance_m = 0;
  auto operator<=>(const RowKey&) const = default;
};

/// Design matrix of the log-linear performance model at one resolution.
///
/// Columns: log distance, the 8 lab covariates, mean session length (s), then
/// the G interval times (s). No intercept column; the solver centres. The
/// unobserved "other effects" factor is taken as constant and absorbed there.
struct StudyTable {
  int resolution = 0;
  std::vector<std::string> column_names;
  std::vector<RowKey> keys;
  Eigen::MatrixXd covariates;  // rows x (10 + G)
  Eigen::VectorXd response;    // log performance
  Eigen::VectorXd performance; // seconds

  std::size_t rows() const noexcept { return keys.size(); }
  std::size_t columns() const noexcept { return column_names.size(); }
  std::vector<std::string> runners() const;
  StudyTable subset(std::span<const std::size_t> rows) const;
};

inline constexpr std::size_t kScalarColumnCount = 10;  // log D + 8 lab + mean session length
inline constexpr std::size_t kLogDistanceColumn = 0;
inline constexpr std::size_t kMeanSessionColumn = 9;

std::vector<std::string> study_column_names(int G);

/// Joins tests, lab results and period profiles; one row per field test
/// distance, ordered by (runner, period, distance). Tests in uninformative
/// periods are left out; any other missing partner raises JoinError.
StudyTable build_table(std::span<const FieldTest> field_tests, std::span<const LabResult> lab_results,
                       const PeriodSet& periods, int G);

/// Picks `count` runners at random (deterministic in `seed`); result sorted.
std::vector<std::string> choose_test_runners(std::vector<std::string> runners, std::size_t count,
                                             std::uint64_t seed);

/// Rows of `test_runners` go to the second table, the rest to the first.
std::pair<StudyTable, StudyTable> partition_by_runners(const StudyTable& table,
                                                       const std::set<std::string>& test_runners);

/// Estimation/test split keeping each runner's rows on one side.
std::pair<StudyTable, StudyTable> split_by_runner(const StudyTable& table, std::size_t test_runner_count,
                                                  std::uint64_t seed);

}  // namespace mrenet
