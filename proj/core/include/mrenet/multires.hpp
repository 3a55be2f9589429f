#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrenet/elasticnet.hpp"
#include "mrenet/study.hpp"

namespace mrenet {

/// Candidate tuning constants: ridge weights and L1 fractions.
struct TuningGrid {
  std::vector<double> lambda2s;
  std::vector<double> fractions;

  /// lambda2 in {0, 0.01, 0.1, 1, 10, 100}; fractions 0.05, 0.10, ..., 1.
  static TuningGrid defaults();
};

struct CvOptions {
  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 20160101;
  std::size_t threads = 1;
  SolverOptions solver;
};

struct TuningResult {
  int resolution = 0;
  double lambda2 = 0.0;
  double l1_fraction = 0.0;
  double cv_error = 0.0;
  std::vector<double> lambda2s;
  std::vector<double> fractions;
  /// Mean held-out squared error on the log scale, surface[i][j] for
  /// (lambda2s[i], fractions[j]); +inf where the fit is undefined.
  std::vector<std::vector<double>> surface;
};

/// Repeated k-fold cross-validation over the grid. Folds allocate rows; each
/// repeat draws its own allocation from a seed stream keyed by (seed, G,
/// repeat), so the result does not depend on `threads`. Ties prefer the larger
/// lambda2, then the smaller fraction.
TuningResult cross_validate(const StudyTable& estimation, const TuningGrid& grid, const CvOptions& options);

struct TestError {
  double error = 0.0;                // sum of squared residuals, seconds^2
  double squared_residual_sd = 0.0;  // sample sd of the squared residuals
  double error_sd = 0.0;             // sd of the sum: sqrt(rows) * squared_residual_sd
  std::size_t rows = 0;
  std::vector<double> residuals;     // y - mu, seconds
};

/// Squared prediction error on the seconds scale, mu = exp(linear predictor)
/// with the rescaled coefficients.
TestError test_error(const ElasticNetFit& fit, const StudyTable& test);

/// Maximal run of consecutive nonzero interval coefficients of one sign.
struct IntervalBlock {
  int first = 0;  // 1-based interval index
  int last = 0;
  double lower = 0.0;  // speed range (lower, upper]
  double upper = 0.0;
  int sign = 0;
  std::vector<int> persists_in;  // other resolutions with an overlapping same-sign block
};

std::vector<IntervalBlock> interval_blocks(const ElasticNetFit& fit, int G);

struct ScalarTerm {
  std::string name;  // covariate name in exported units
  double coefficient = 0.0;
};

struct IntervalTerm {
  double lower = 0.0;
  double upper = 0.0;
  double coefficient_per_minute = 0.0;
};

/// tau * D^alpha * exp(sum scalar terms) * exp(sum interval terms), in seconds.
struct PredictiveEquation {
  int resolution = 0;
  double tau = 1.0;
  double alpha = 1.0;
  std::vector<ScalarTerm> scalars;
  std::vector<IntervalTerm> intervals;
};

/// Exported name and unit factor (exported value = table value * factor) of a
/// study column.
std::pair<std::string, double> exported_unit(const std::string& column);

/// Builds the equation from the nonzero rescaled coefficients of a study fit,
/// converting height to m, economy to L/kg/km, OBLA to km/h and interval
/// times to minutes.
PredictiveEquation export_equation(const ElasticNetFit& fit, int G);

/// Evaluates the equation. `scalars` must hold every scalar term by exported
/// name; `interval_minutes` lines up with equation.intervals.
double predict(const PredictiveEquation& equation, double distance_m, const std::map<std::string, double>& scalars,
               std::span<const double> interval_minutes);

/// Multi-line text form of the equation.
std::string render_equation(const PredictiveEquation& equation);

struct ResolutionEntry {
  int resolution = 0;
  TuningResult tuning;
  ElasticNetFit fit;
  TestError test;
  std::vector<IntervalBlock> blocks;
};

struct ResolutionReport {
  std::vector<std::string> estimation_runners;
  std::vector<std::string> test_runners;
  std::size_t estimation_rows = 0;
  std::size_t test_rows = 0;
  std::vector<ResolutionEntry> entries;
  int selected_resolution = 0;
  PredictiveEquation equation;
  std::vector<std::string> notes;

  const ResolutionEntry& entry(int G) const;
};

struct MultiresOptions {
  std::vector<int> resolutions;
  TuningGrid grid = TuningGrid::defaults();
  CvOptions cv;

  /// 5, 10, ..., 125.
  static std::vector<int> default_resolutions();
};

/// (estimation, test) tables at resolution G.
using TableSource = std::function<std::pair<StudyTable, StudyTable>(int G)>;

/// Table source over a joined study with a fixed set of held-out runners.
TableSource make_table_source(std::vector<FieldTest> field_tests, std::vector<LabResult> lab_results,
                              PeriodSet periods, std::vector<std::string> test_runners);

/// For each G: tune by cross-validation, refit on the whole estimation set,
/// and score on the test set. Selects the G with the smallest test error
/// (ties go to the smaller G) and exports its equation.
ResolutionReport select_resolution(const TableSource& tables, const MultiresOptions& options);

}  // namespace mrenet
