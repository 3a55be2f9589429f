#include <gtest/gtest.h>

#include <cmath>

#include "mrenet/elasticnet.hpp"
#include "mrenet/error.hpp"
#include "mrenet/random.hpp"
#include "oracles.hpp"

using namespace mrenet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index p) {
  MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

VectorXd random_vector(Rng& rng, Eigen::Index n) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

double soft(double b, double l1, double l2) {
  const double m = std::max(std::abs(b) - 0.5 * l1, 0.0);
  return std::copysign(m, b) / (1.0 + l2);
}

}  // namespace

TEST(GramSystem, OrthonormalClosedForm) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd Q = random_matrix(rng, 8, 4).householderQr().householderQ() * MatrixXd::Identity(8, 4);
    const VectorXd y = random_vector(rng, 8);
    const GramSystem sys(Q, y);
    const VectorXd b = Q.transpose() * y;
    const double l1 = rng.uniform(0.0, 2.0 * b.cwiseAbs().maxCoeff());
    const double l2 = rng.uniform(0.0, 10.0);
    const auto sol = sys.solve(l1, l2);
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(sol.beta(j), soft(b(j), l1, l2), 1e-8);
  }
}

TEST(GramSystem, ObjectiveNeverIncreasesAcrossSweeps) {
  Rng rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    MatrixXd X = random_matrix(rng, 30, 12);
    X.col(1) = X.col(0) + 0.01 * random_vector(rng, 30);
    const VectorXd y = random_vector(rng, 30);
    const GramSystem sys(X, y);
    std::vector<double> trace;
    const double l1 = 0.1 * sys.lambda1_max();
    sys.solve(l1, 0.0, {}, nullptr, &trace);
    ASSERT_FALSE(trace.empty());
    for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1] + 1e-12 * std::abs(trace[0]));
  }
}

TEST(GramSystem, KktHoldsAtSolution) {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const MatrixXd X = random_matrix(rng, 20, 8);
    const VectorXd y = random_vector(rng, 20);
    const GramSystem sys(X, y);
    const double l1 = rng.uniform(0.0, sys.lambda1_max());
    const double l2 = rng.uniform(0.0, 5.0);
    const auto sol = sys.solve(l1, l2);
    EXPECT_LE(sys.kkt_violation(sol.beta, l1, l2), 1e-8);
    const VectorXd r = y - X * sol.beta;
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double g = 2.0 * X.col(j).dot(r);
      if (sol.beta(j) == 0.0) {
        EXPECT_LE(std::abs(g), l1 + 1e-8);
      } else {
        EXPECT_NEAR(g - 2.0 * l2 * sol.beta(j), l1 * (sol.beta(j) > 0 ? 1.0 : -1.0), 1e-8);
      }
    }
  }
}

TEST(GramSystem, AboveLambdaMaxAllZero) {
  Rng rng(4);
  const MatrixXd X = random_matrix(rng, 10, 3);
  const GramSystem sys(X, random_vector(rng, 10));
  EXPECT_TRUE(sys.solve(sys.lambda1_max() * 1.0001, 0.3).beta.isZero());
}

TEST(ElasticNet, UnpenalizedIsLeastSquares) {
  Rng rng(5);
  const MatrixXd X = random_matrix(rng, 15, 4);
  const VectorXd y = random_vector(rng, 15);
  const auto fit = solve(ElasticNetProblem(X, y), 0.0, 1.0);
  MatrixXd A(15, 5);
  A << MatrixXd::Ones(15, 1), X;
  const VectorXd ols = A.colPivHouseholderQr().solve(y);
  EXPECT_NEAR(fit.intercept_naive, ols(0), 1e-9);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(fit.naive(j), ols(j + 1), 1e-9);
  EXPECT_NEAR(fit.predict(X).cwiseAbs().sum(), (A * ols).cwiseAbs().sum(), 1e-8);
}

TEST(ElasticNet, FractionEndpoints) {
  Rng rng(6);
  const MatrixXd X = random_matrix(rng, 12, 5);
  const VectorXd y = random_vector(rng, 12);
  const ElasticNetProblem problem(X, y);
  const auto zero = solve(problem, 0.5, 0.0);
  EXPECT_TRUE(zero.naive.isZero());
  EXPECT_TRUE(zero.active.empty());
  EXPECT_NEAR(zero.intercept_naive, y.mean(), 1e-12);

  const auto full = solve(problem, 0.5, 1.0);
  const auto s = oracle::standardize(X, y);
  const VectorXd ridge = (s.X.transpose() * s.X + 0.5 * MatrixXd::Identity(5, 5)).ldlt().solve(s.X.transpose() * s.y);
  for (Eigen::Index j = 0; j < 5; ++j) {
    EXPECT_NEAR(full.standardized(j), ridge(j), 1e-10);
    EXPECT_NEAR(full.rescaled(j), 1.5 * ridge(j) / s.scale(j), 1e-9);
  }
}

TEST(ElasticNet, RescaledIsOnePlusLambda2TimesNaive) {
  Rng rng(7);
  const MatrixXd X = random_matrix(rng, 12, 5);
  const VectorXd y = random_vector(rng, 12);
  const auto fit = solve(ElasticNetProblem(X, y), 2.5, 0.6);
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_EQ(fit.rescaled(j), 3.5 * fit.naive(j));
  for (Eigen::Index j = 0; j < 5; ++j) {
    const bool active = std::find(fit.active.begin(), fit.active.end(), static_cast<std::size_t>(j)) !=
                        fit.active.end();
    EXPECT_EQ(active, fit.naive(j) != 0.0);
  }
  EXPECT_NEAR(fit.l1_fraction, 0.6, 1e-9);
}

TEST(ElasticNet, MatchesEnumerationOracle) {
  Rng rng(8);
  for (int rep = 0; rep < 40; ++rep) {
    const auto p = rng.integer(1, 4);
    const auto n = rng.integer(p + 2, 10);
    const MatrixXd X = random_matrix(rng, n, p);
    const VectorXd y = random_vector(rng, n);
    const double l2 = rep % 4 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
    const double frac = rng.uniform();
    const auto fit = solve(ElasticNetProblem(X, y), l2, frac);
    const auto s = oracle::standardize(X, y);
    const VectorXd ref = oracle::elastic_net_fraction(s.X, s.y, l2, frac);
    for (Eigen::Index j = 0; j < p; ++j) EXPECT_NEAR(fit.naive(j), ref(j) / s.scale(j), 1e-6);
  }
}

TEST(ElasticNet, ZeroVarianceColumnDropped) {
  Rng rng(9);
  MatrixXd X = random_matrix(rng, 10, 3);
  X.col(1).setConstant(4.0);
  const VectorXd y = random_vector(rng, 10);
  const ElasticNetProblem problem(X, y, {"a", "b", "c"});
  EXPECT_EQ(problem.kept_columns(), (std::vector<Eigen::Index>{0, 2}));
  const auto fit = solve(problem, 0.1, 1.0);
  EXPECT_EQ(fit.naive.size(), 3);
  EXPECT_EQ(fit.naive(1), 0.0);
  EXPECT_EQ(fit.names[1], "b");
}

TEST(ElasticNet, RankDeficientWithoutRidge) {
  Rng rng(10);
  MatrixXd X = random_matrix(rng, 10, 3);
  X.col(2) = X.col(0) + X.col(1);
  const VectorXd y = random_vector(rng, 10);
  const ElasticNetProblem problem(X, y);
  EXPECT_THROW(solve(problem, 0.0, 0.5), RankDeficientError);
  EXPECT_NO_THROW(solve(problem, 0.01, 0.5));
}

TEST(ElasticNet, InvalidArguments) {
  Rng rng(11);
  const MatrixXd X = random_matrix(rng, 10, 3);
  const VectorXd y = random_vector(rng, 10);
  const ElasticNetProblem problem(X, y);
  EXPECT_THROW(solve(problem, -1.0, 0.5), ArgumentError);
  EXPECT_THROW(solve(problem, 1.0, 1.5), ArgumentError);
  EXPECT_THROW(ElasticNetProblem(X, VectorXd::Zero(9)), ArgumentError);
  EXPECT_THROW(ElasticNetProblem(X.topRows(1), y.head(1)), ArgumentError);
  MatrixXd bad = X;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(ElasticNetProblem(bad, y), ArgumentError);
  const std::vector<double> unsorted = {0.5, 0.2};
  EXPECT_THROW(solution_path(problem, 1.0, unsorted), ArgumentError);
}

TEST(SolutionPath, ContinuousAndGrouped) {
  Rng rng(12);
  MatrixXd X = random_matrix(rng, 25, 6);
  X.col(4) = X.col(1);
  const VectorXd y = random_vector(rng, 25);
  std::vector<double> fractions;
  for (int k = 0; k <= 200; ++k) fractions.push_back(k / 200.0);
  const auto path = solution_path(ElasticNetProblem(X, y), 0.7, fractions);
  ASSERT_EQ(path.fits.size(), fractions.size());
  EXPECT_TRUE(path.fits.front().naive.isZero());
  for (std::size_t k = 0; k < path.fits.size(); ++k) {
    EXPECT_LE(std::abs(path.fits[k].naive(1) - path.fits[k].naive(4)), 1e-8);
    if (k > 0) {
      EXPECT_LE((path.fits[k].standardized - path.fits[k - 1].standardized).lpNorm<Eigen::Infinity>(), 0.1);
    }
  }
}
