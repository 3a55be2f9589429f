#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mrenet/error.hpp"
#include "mrenet/multires.hpp"
#include "mrenet/random.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace mrenet;

namespace {

StudyTable linear_table(int G, std::size_t rows, double noise, std::uint64_t seed) {
  Rng rng(seed);
  StudyTable t;
  t.resolution = G;
  t.column_names = study_column_names(G);
  const auto p = static_cast<Eigen::Index>(t.column_names.size());
  t.covariates.resize(static_cast<Eigen::Index>(rows), p);
  t.response.resize(static_cast<Eigen::Index>(rows));
  t.performance.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    double eta = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      t.covariates(r, j) = rng.normal();
      eta += (j % 3 == 0 ? 0.2 : 0.0) * t.covariates(r, j);
    }
    t.response(r) = eta + noise * rng.normal();
    t.performance(r) = std::exp(t.response(r));
    t.keys.push_back({"r" + std::to_string(i % 7), static_cast<int>(i / 7) + 1, 1200});
  }
  return t;
}

ElasticNetFit fixed_fit(int G, double intercept, std::map<std::string, double> coefs) {
  ElasticNetFit f;
  f.names = study_column_names(G);
  f.resolution = G;
  const auto p = static_cast<Eigen::Index>(f.names.size());
  f.naive = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto it = coefs.find(f.names[static_cast<std::size_t>(j)]);
    if (it != coefs.end()) f.naive(j) = it->second;
  }
  f.rescaled = f.naive;
  f.standardized = f.naive;
  f.intercept_naive = f.intercept_rescaled = intercept;
  return f;
}

}  // namespace

TEST(CrossValidate, SinglePointChosen) {
  const auto t = linear_table(5, 40, 0.1, 1);
  const auto r = cross_validate(t, {{0.3}, {0.4}}, {});
  EXPECT_EQ(r.lambda2, 0.3);
  EXPECT_EQ(r.l1_fraction, 0.4);
  EXPECT_EQ(r.surface.size(), 1u);
  EXPECT_EQ(r.cv_error, r.surface[0][0]);
}

TEST(CrossValidate, NoiselessLinearDataFavoursUnpenalizedFit) {
  const auto t = linear_table(5, 60, 0.0, 2);
  const auto r = cross_validate(t, TuningGrid::defaults(), {});
  EXPECT_EQ(r.lambda2, 0.0);
  EXPECT_EQ(r.l1_fraction, 1.0);
  EXPECT_LT(r.cv_error, 1e-20);
}

TEST(CrossValidate, ChosenPairAttainsSurfaceMinimum) {
  const auto t = linear_table(5, 50, 0.3, 3);
  const auto r = cross_validate(t, TuningGrid::defaults(), {});
  for (const auto& row : r.surface)
    for (double v : row) EXPECT_GE(v, r.cv_error);
}

TEST(CrossValidate, DeterministicAndThreadIndependent) {
  const auto t = linear_table(5, 50, 0.3, 4);
  CvOptions serial;
  CvOptions parallel;
  parallel.threads = 4;
  const auto a = cross_validate(t, TuningGrid::defaults(), serial);
  const auto b = cross_validate(t, TuningGrid::defaults(), serial);
  const auto c = cross_validate(t, TuningGrid::defaults(), parallel);
  EXPECT_EQ(a.surface, b.surface);
  EXPECT_EQ(a.surface, c.surface);
  EXPECT_EQ(a.lambda2, c.lambda2);
  EXPECT_EQ(a.l1_fraction, c.l1_fraction);
}

TEST(CrossValidate, SingularUnridgedPointsAreInfinite) {
  auto t = linear_table(5, 30, 0.1, 5);
  t.covariates.col(3) = t.covariates.col(1) + t.covariates.col(2);
  const auto r = cross_validate(t, {{0.0, 1.0}, {0.5, 1.0}}, {});
  EXPECT_TRUE(std::isinf(r.surface[0][0]));
  EXPECT_TRUE(std::isfinite(r.surface[1][0]));
  EXPECT_EQ(r.lambda2, 1.0);
}

TEST(CrossValidate, TooFewRows) {
  const auto t = linear_table(5, 8, 0.1, 6);
  EXPECT_THROW(cross_validate(t, TuningGrid::defaults(), {}), ArgumentError);
}

TEST(TestError, PerfectAndSingleRow) {
  StudyTable t = linear_table(5, 1, 0.0, 7);
  t.covariates.setZero();
  t.performance(0) = 300.0;
  t.response(0) = std::log(300.0);
  const auto perfect = test_error(fixed_fit(5, std::log(300.0), {}), t);
  EXPECT_NEAR(perfect.error, 0.0, 1e-20);
  const auto off = test_error(fixed_fit(5, std::log(310.0), {}), t);
  EXPECT_NEAR(off.error, 100.0, 1e-9);
  EXPECT_EQ(off.rows, 1u);
}

TEST(TestError, MatchesRowByRowEvaluation) {
  const auto t = linear_table(5, 30, 0.2, 8);
  const auto fit = fixed_fit(5, 0.7, {{"log_distance", 0.3}, {"age_y", -0.1}, {"interval_2", 0.05}});
  const auto e = test_error(fit, t);
  double ref = 0.0;
  std::vector<double> sq;
  for (Eigen::Index i = 0; i < t.covariates.rows(); ++i) {
    std::vector<std::pair<double, double>> terms;
    for (Eigen::Index j = 1; j < t.covariates.cols(); ++j) terms.push_back({fit.rescaled(j), t.covariates(i, j)});
    const double mu = oracle::equation_seconds(std::exp(0.7), 0.3, std::exp(t.covariates(i, 0)), terms);
    sq.push_back((t.performance(i) - mu) * (t.performance(i) - mu));
    ref += sq.back();
  }
  EXPECT_NEAR(e.error, ref, 1e-9 * ref);
  double mean = ref / static_cast<double>(sq.size()), var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(sq.size() - 1));
  EXPECT_NEAR(e.squared_residual_sd, sd, 1e-9 * sd);
  EXPECT_NEAR(e.error_sd, std::sqrt(30.0) * sd, 1e-9 * sd);
}

TEST(TestError, ResolutionMismatch) {
  const auto t = linear_table(5, 10, 0.1, 9);
  EXPECT_THROW(test_error(fixed_fit(10, 0.0, {}), t), ArgumentError);
}

TEST(IntervalBlocks, MaximalSignedRuns) {
  const auto fit = fixed_fit(
      10, 0.0, {{"interval_2", -1.0}, {"interval_3", -2.0}, {"interval_4", 1.0}, {"interval_7", 0.5}});
  const auto blocks = interval_blocks(fit, 10);
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[0].first, 2);
  EXPECT_EQ(blocks[0].last, 3);
  EXPECT_EQ(blocks[0].sign, -1);
  EXPECT_DOUBLE_EQ(blocks[0].lower, 1.25);
  EXPECT_DOUBLE_EQ(blocks[0].upper, 3.75);
  EXPECT_EQ(blocks[1].first, 4);
  EXPECT_EQ(blocks[1].sign, 1);
  EXPECT_EQ(blocks[2].first, 7);
  EXPECT_EQ(blocks[2].last, 7);
}

TEST(ExportEquation, UnitConversions) {
  const auto fit = fixed_fit(5, std::log(0.5), {{"log_distance", 1.1},
                                                {"height_cm", 0.002},
                                                {"economy_ml", 0.0003},
                                                {"obla_ms", -0.036},
                                                {"mean_session_length", 1e-5},
                                                {"interval_3", -0.001}});
  const auto eq = export_equation(fit, 5);
  EXPECT_NEAR(eq.tau, 0.5, 1e-15);
  EXPECT_EQ(eq.alpha, 1.1);
  std::map<std::string, double> c;
  for (const auto& s : eq.scalars) c[s.name] = s.coefficient;
  EXPECT_EQ(c.size(), 4u);
  EXPECT_NEAR(c["height_m"], 0.2, 1e-15);
  EXPECT_NEAR(c["economy_l"], 0.3, 1e-15);
  EXPECT_NEAR(c["obla_kmh"], -0.01, 1e-15);
  EXPECT_NEAR(c["mean_session_length_s"], 1e-5, 1e-20);
  ASSERT_EQ(eq.intervals.size(), 1u);
  EXPECT_DOUBLE_EQ(eq.intervals[0].lower, 5.0);
  EXPECT_DOUBLE_EQ(eq.intervals[0].upper, 7.5);
  EXPECT_NEAR(eq.intervals[0].coefficient_per_minute, -0.06, 1e-15);

  // Same prediction in table units and in exported units.
  const double height_cm = 180, economy_ml = 200, obla_ms = 4.5, tbar = 3000, t3_s = 600;
  const double table_units =
      0.5 * std::pow(2400.0, 1.1) *
      std::exp(0.002 * height_cm + 0.0003 * economy_ml - 0.036 * obla_ms + 1e-5 * tbar - 0.001 * t3_s);
  const std::vector<double> minutes = {t3_s / 60.0};
  const double exported = predict(eq, 2400.0,
                                  {{"height_m", 1.8}, {"economy_l", 0.2}, {"obla_kmh", 16.2},
                                   {"mean_session_length_s", tbar}},
                                  minutes);
  EXPECT_NEAR(exported, table_units, 1e-12 * table_units);
}

TEST(Predict, Examples) {
  PredictiveEquation identity;
  identity.tau = 1.0;
  identity.alpha = 1.0;
  EXPECT_DOUBLE_EQ(predict(identity, 2400.0, {}, {}), 2400.0);

  PredictiveEquation eq;
  eq.tau = 0.1310;
  eq.alpha = 1.0568;
  eq.intervals = {{5.26, 5.39, -0.0078}, {5.39, 5.53, -0.0279}, {5.53, 5.66, -0.0307}};
  const std::vector<double> base = {1, 2, 3}, doubled = {1, 2, 6};
  const double ratio = predict(eq, 1200.0, {}, doubled) / predict(eq, 1200.0, {}, base);
  EXPECT_NEAR(ratio, std::exp(-0.0307 * 3.0), 1e-14);
}

TEST(Predict, Errors) {
  PredictiveEquation eq;
  eq.scalars = {{"height_m", 0.1}};
  eq.intervals = {{1, 2, -0.1}};
  const std::vector<double> one = {1.0}, none = {};
  EXPECT_THROW(predict(eq, 1200.0, {}, one), ArgumentError);
  EXPECT_THROW(predict(eq, 1200.0, {{"height_m", 1.8}}, none), ArgumentError);
  EXPECT_THROW(predict(eq, 0.0, {{"height_m", 1.8}}, one), ArgumentError);
  EXPECT_THROW(predict(eq, 1200.0, {{"height_m", std::nan("")}}, one), ArgumentError);
  EXPECT_GT(predict(eq, 1200.0, {{"height_m", 1.8}}, one), 0.0);
}

TEST(RenderEquation, MentionsEveryTerm) {
  PredictiveEquation eq;
  eq.tau = 0.131;
  eq.alpha = 1.0568;
  eq.scalars = {{"height_m", 0.1007}};
  eq.intervals = {{5.26, 5.39, -0.0078}};
  const auto text = render_equation(eq);
  EXPECT_NE(text.find("0.131"), std::string::npos);
  EXPECT_NE(text.find("1.0568"), std::string::npos);
  EXPECT_NE(text.find("height_m"), std::string::npos);
  EXPECT_NE(text.find("t1"), std::string::npos);
}

TEST(SelectResolution, SingleResolutionSelected) {
  SynthConfig cfg;
  cfg.seed = 3;
  const std::vector<int> res = {10};
  const auto prepared = testing_pipeline::prepare(cfg, res);
  MultiresOptions options;
  options.resolutions = res;
  options.cv.repeats = 2;
  const auto report = select_resolution(testing_pipeline::table_source(prepared, 4, 1), options);
  EXPECT_EQ(report.selected_resolution, 10);
  EXPECT_EQ(report.entries.size(), 1u);
  EXPECT_EQ(report.test_runners.size(), 4u);
  EXPECT_EQ(report.estimation_rows + report.test_rows, 120u);
  EXPECT_EQ(report.equation.resolution, 10);
}

TEST(SelectResolution, NoiselessRefinementNeverHurts) {
  // Enough periods that the unpenalized fit is identified at G = 125: each
  // period contributes one distinct interval-time vector.
  SynthConfig cfg;
  cfg.runner_count = 30;
  cfg.noise_sd = 0.0;
  cfg.delta_lower = 5.0;
  cfg.delta_upper = 7.5;
  cfg.seed = 5;
  const std::vector<int> res = {5, 10, 25, 125};
  const auto prepared = testing_pipeline::prepare(cfg, res);
  MultiresOptions options;
  options.resolutions = res;
  options.grid = {{0.0}, {1.0}};
  options.cv.repeats = 1;
  const auto report = select_resolution(testing_pipeline::table_source(prepared, 4, 2), options);
  const double base = report.entry(5).test.error;
  EXPECT_LT(base, 1e-6);
  for (int G : {10, 25, 125}) EXPECT_LE(report.entry(G).test.error, base + 1e-6) << G;
}

TEST(SelectResolution, ValidatesResolutionSet) {
  MultiresOptions options;
  options.resolutions = {};
  EXPECT_THROW(select_resolution([](int) -> std::pair<StudyTable, StudyTable> { return {}; }, options),
               ArgumentError);
  options.resolutions = {5, 5};
  EXPECT_THROW(select_resolution([](int) -> std::pair<StudyTable, StudyTable> { return {}; }, options),
               ArgumentError);
}
