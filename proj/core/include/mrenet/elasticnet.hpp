#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrenet {

struct SolverOptions {
  /// Converged when no standardized coefficient moves more than this in a sweep.
  double tolerance = 1e-8;
  /// Maximum number of coordinate-descent sweeps per solve.
  std::size_t max_iterations = 100000;
};

/**
 * Naive elastic net in Gram form,
 *
 *   f(b) = |y - X b|^2 + lambda2 |b|^2 + lambda1 |b|_1
 *        = y'y - 2 c'b + b'G b + lambda2 |b|^2 + lambda1 |b|_1,
 *
 * with G = X'X and c = X'y. The design is used as given; see
 * ElasticNetProblem for the standardized version.
 */
class GramSystem {
 public:
  GramSystem() = default;
  GramSystem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
  GramSystem(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yty);

  struct Solution {
    Eigen::VectorXd beta;
    std::size_t sweeps = 0;
    double kkt_violation = 0.0;
  };

  struct FractionSolution {
    Eigen::VectorXd beta;
    double lambda1 = 0.0;
    double fraction = 0.0;  // |beta|_1 / |ridge|_1 actually attained
    std::size_t sweeps = 0;
    std::size_t steps = 0;  // bracketing steps of the lambda1 search
    double kkt_violation = 0.0;
  };

  Eigen::Index dimension() const noexcept { return xty_.size(); }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  const Eigen::VectorXd& xty() const noexcept { return xty_; }

  double objective(const Eigen::VectorXd& beta, double lambda1, double lambda2) const;

  /// Largest violation of the optimality conditions: for b_j != 0,
  /// |2(c_j - (Gb)_j - lambda2 b_j) - lambda1 sign(b_j)|; for b_j = 0,
  /// max(0, |2(c_j - (Gb)_j)| - lambda1).
  double kkt_violation(const Eigen::VectorXd& beta, double lambda1, double lambda2) const;

  /// Smallest lambda1 with an all-zero solution: 2 max_j |c_j|.
  double lambda1_max() const;

  /// Minimizer at fixed penalties by cyclic coordinate descent (column order),
  /// finished with an exact solve on the active set when that verifies.
  /// Throws ConvergenceError after options.max_iterations sweeps. When
  /// `objective_trace` is given, the objective after every sweep is appended.
  Solution solve(double lambda1, double lambda2, const SolverOptions& options = {},
                 const Eigen::VectorXd* warm_start = nullptr,
                 std::vector<double>* objective_trace = nullptr) const;

  /// The lambda1 = 0 solution (G + lambda2 I)^{-1} c, or nullopt when that
  /// matrix is numerically singular.
  std::optional<Eigen::VectorXd> ridge(double lambda2) const;

  /// Minimizer whose L1 norm is `fraction` times the L1 norm of ridge(lambda2).
  /// lambda1 is located by bracketing on the piecewise-linear path. Throws
  /// RankDeficientError when ridge(lambda2) does not exist.
  FractionSolution solve_fraction(double fraction, double lambda2, const SolverOptions& options = {},
                                  const Eigen::VectorXd* warm_beta = nullptr,
                                  std::optional<double> warm_lambda1 = std::nullopt) const;

 private:
  struct Segment;
  std::optional<Segment> segment(const Eigen::VectorXd& beta, double lambda2) const;
  bool polish(Eigen::VectorXd& beta, Eigen::VectorXd& gb, double lambda1, double lambda2) const;

  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  double yty_ = 0.0;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Design standardized for the elastic net: columns centred and scaled to
/// unit Euclidean norm, response centred. Columns without variation are
/// dropped and get coefficient 0.
class ElasticNetProblem {
 public:
  ElasticNetProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> names = {});

  Eigen::Index observations() const noexcept { return n_; }
  Eigen::Index covariates() const noexcept { return static_cast<Eigen::Index>(names_.size()); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<Eigen::Index>& kept_columns() const noexcept { return kept_; }
  const Eigen::VectorXd& means() const noexcept { return means_; }
  const Eigen::VectorXd& scales() const noexcept { return scales_; }
  double response_mean() const noexcept { return y_mean_; }
  const GramSystem& system() const noexcept { return system_; }

 private:
  Eigen::Index n_ = 0;
  std::vector<std::string> names_;
  std::vector<Eigen::Index> kept_;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  double y_mean_ = 0.0;
  GramSystem system_;
};

struct FitDiagnostics {
  std::size_t sweeps = 0;
  std::size_t search_steps = 0;
  double kkt_violation = 0.0;
};

/// Elastic net estimate in original covariate units.
struct ElasticNetFit {
  std::vector<std::string> names;
  Eigen::VectorXd naive;         // minimizer of the naive objective
  Eigen::VectorXd rescaled;      // (1 + lambda2) * naive
  Eigen::VectorXd standardized;  // naive, in standardized units
  double intercept_naive = 0.0;
  double intercept_rescaled = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double l1_fraction = 0.0;
  std::vector<std::size_t> active;  // indices with nonzero coefficient
  FitDiagnostics diagnostics;
  int resolution = 0;  // study resolution G the fit belongs to, 0 if none

  /// Linear predictor with the rescaled coefficients.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  double predict(const Eigen::RowVectorXd& row) const;
};

/// Fit at (lambda2, L1 fraction). A previous fit on the same problem can be
/// passed as a warm start.
ElasticNetFit solve(const ElasticNetProblem& problem, double lambda2, double l1_fraction,
                    const SolverOptions& options = {}, const ElasticNetFit* warm_start = nullptr);

struct SolutionPath {
  double lambda2 = 0.0;
  std::vector<double> fractions;
  std::vector<ElasticNetFit> fits;
};

/// Warm-started fits along ascending L1 fractions.
SolutionPath solution_path(const ElasticNetProblem& problem, double lambda2, std::span<const double> fractions,
                           const SolverOptions& options = {});

}  // namespace mrenet
