#include "mrenet/elasticnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrenet/error.hpp"

namespace mrenet {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Relative slack used when checking a candidate active-set solution.
constexpr double kVerifySlack = 1e-11;
constexpr double kSingularRatio = 1e-10;
constexpr std::size_t kPolishEvery = 20;
constexpr std::size_t kMaxSearchSteps = 200;

}  // namespace

struct GramSystem::Segment {
  std::vector<Eigen::Index> active;
  Eigen::VectorXd signs;
  Eigen::VectorXd base;   // M^{-1} c_A
  Eigen::VectorXd slope;  // M^{-1} sign_A; beta_A(l1) = base - l1/2 * slope
};

GramSystem::GramSystem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
    : GramSystem(X.transpose() * X, X.transpose() * y, y.squaredNorm()) {
  if (X.rows() != y.size()) throw ArgumentError("design and response have different row counts");
}

GramSystem::GramSystem(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yty)
    : gram_(std::move(gram)), xty_(std::move(xty)), yty_(yty) {
  if (gram_.rows() != gram_.cols() || gram_.rows() != xty_.size()) {
    throw ArgumentError("Gram matrix and X'y have inconsistent sizes");
  }
  if (xty_.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
  }
}

double GramSystem::objective(const Eigen::VectorXd& beta, double lambda1, double lambda2) const {
  return yty_ - 2.0 * xty_.dot(beta) + beta.dot(gram_ * beta) + lambda2 * beta.squaredNorm() +
         lambda1 * beta.lpNorm<1>();
}

double GramSystem::kkt_violation(const Eigen::VectorXd& beta, double lambda1, double lambda2) const {
  const Eigen::VectorXd residual_corr = xty_ - gram_ * beta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      worst = std::max(worst, std::abs(2.0 * (residual_corr(j) - lambda2 * beta(j)) - lambda1 * sign(beta(j))));
    } else {
      worst = std::max(worst, std::abs(2.0 * residual_corr(j)) - lambda1);
    }
  }
  return worst;
}

double GramSystem::lambda1_max() const {
  return xty_.size() == 0 ? 0.0 : 2.0 * xty_.cwiseAbs().maxCoeff();
}

std::optional<Eigen::VectorXd> GramSystem::ridge(double lambda2) const {
  const Eigen::Index p = dimension();
  if (p == 0) return Eigen::VectorXd();
  const double top = std::max(1.0, eigenvalues_.maxCoeff() + lambda2);
  Eigen::VectorXd projected = eigenvectors_.transpose() * xty_;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = eigenvalues_(i) + lambda2;
    if (d <= kSingularRatio * top) return std::nullopt;
    projected(i) /= d;
  }
  return Eigen::VectorXd(eigenvectors_ * projected);
}

// Exact solution for the sign pattern of `beta`, valid on a segment of the
// lambda1 path. nullopt when the active block is singular.
std::optional<GramSystem::Segment> GramSystem::segment(const Eigen::VectorXd& beta, double lambda2) const {
  Segment seg;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) seg.active.push_back(j);
  }
  const auto k = static_cast<Eigen::Index>(seg.active.size());
  if (k == 0) return std::nullopt;
  Eigen::MatrixXd m(k, k);
  Eigen::VectorXd c(k);
  seg.signs.resize(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::Index ja = seg.active[static_cast<std::size_t>(a)];
    c(a) = xty_(ja);
    seg.signs(a) = sign(beta(ja));
    for (Eigen::Index b = 0; b < k; ++b) m(a, b) = gram_(ja, seg.active[static_cast<std::size_t>(b)]);
    m(a, a) += lambda2;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > 1e-12)) return std::nullopt;
  seg.base = ldlt.solve(c);
  seg.slope = ldlt.solve(seg.signs);
  return seg;
}

// Replaces beta by the exact solution for its sign pattern if that solution
// satisfies every optimality condition.
bool GramSystem::polish(Eigen::VectorXd& beta, Eigen::VectorXd& gb, double lambda1, double lambda2) const {
  const auto seg = segment(beta, lambda2);
  if (!seg) return false;
  const Eigen::VectorXd candidate_a = seg->base - 0.5 * lambda1 * seg->slope;
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(beta.size());
  for (std::size_t a = 0; a < seg->active.size(); ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    if (seg->signs(ai) * candidate_a(ai) <= 0.0) return false;
    candidate(seg->active[a]) = candidate_a(ai);
  }
  const Eigen::VectorXd corr = xty_ - gram_ * candidate;
  const double slack = kVerifySlack * std::max(1.0, lambda1_max());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (candidate(j) == 0.0 && std::abs(2.0 * corr(j)) > lambda1 + slack) return false;
  }
  beta = std::move(candidate);
  gb = gram_ * beta;
  return true;
}

GramSystem::Solution GramSystem::solve(double lambda1, double lambda2, const SolverOptions& options,
                                       const Eigen::VectorXd* warm_start,
                                       std::vector<double>* objective_trace) const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ArgumentError("penalties must be non-negative");
  const Eigen::Index p = dimension();
  Solution out;
  out.beta = Eigen::VectorXd::Zero(p);
  if (p == 0) return out;
  if (warm_start != nullptr && warm_start->size() == p) out.beta = *warm_start;

  Eigen::VectorXd& beta = out.beta;
  Eigen::VectorXd gb = gram_ * beta;
  const double half_l1 = 0.5 * lambda1;

  auto update = [&](Eigen::Index j) {
    const double gjj = gram_(j, j);
    const double denom = gjj + lambda2;
    if (!(denom > 0.0)) return 0.0;
    const double z = xty_(j) - gb(j) + gjj * beta(j);
    const double next = soft_threshold(z, half_l1) / denom;
    const double delta = next - beta(j);
    if (delta != 0.0) {
      gb.noalias() += gram_.col(j) * delta;
      beta(j) = next;
    }
    return std::abs(delta);
  };

  auto budget_exhausted = [&] {
    if (out.sweeps < options.max_iterations) return;
    throw ConvergenceError("coordinate descent did not converge in " + std::to_string(options.max_iterations) +
                               " sweeps",
                           kkt_violation(beta, lambda1, lambda2));
  };

  std::vector<Eigen::Index> active;
  bool polished = false;
  while (!polished) {
    budget_exhausted();
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    ++out.sweeps;
    if (objective_trace) objective_trace->push_back(objective(beta, lambda1, lambda2));
    if (change < options.tolerance) break;

    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (beta(j) != 0.0) active.push_back(j);
    }
    std::size_t inner = 0;
    while (true) {
      budget_exhausted();
      double inner_change = 0.0;
      for (Eigen::Index j : active) inner_change = std::max(inner_change, update(j));
      ++out.sweeps;
      ++inner;
      if (objective_trace) objective_trace->push_back(objective(beta, lambda1, lambda2));
      if (inner_change < options.tolerance) break;
      if (inner % kPolishEvery == 0 && polish(beta, gb, lambda1, lambda2)) {
        polished = true;
        break;
      }
    }
  }
  if (!polished) polish(beta, gb, lambda1, lambda2);
  out.kkt_violation = kkt_violation(beta, lambda1, lambda2);
  return out;
}

GramSystem::FractionSolution GramSystem::solve_fraction(double fraction, double lambda2,
                                                        const SolverOptions& options,
                                                        const Eigen::VectorXd* warm_beta,
                                                        std::optional<double> warm_lambda1) const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ArgumentError("L1 fraction must lie in [0, 1]");
  if (!(lambda2 >= 0.0)) throw ArgumentError("lambda2 must be non-negative");
  const Eigen::Index p = dimension();
  FractionSolution out;
  out.beta = Eigen::VectorXd::Zero(p);
  if (p == 0) return out;

  const auto reference = ridge(lambda2);
  if (!reference) {
    throw RankDeficientError("lambda2 = " + std::to_string(lambda2) +
                             " leaves the design singular; the L1 fraction is undefined");
  }
  const double ref_norm = reference->lpNorm<1>();
  const double lmax = lambda1_max();

  if (fraction >= 1.0 || ref_norm == 0.0) {
    out.beta = *reference;
    out.fraction = 1.0;
    out.kkt_violation = kkt_violation(out.beta, 0.0, lambda2);
    return out;
  }
  if (fraction <= 0.0) {
    out.lambda1 = lmax;
    return out;
  }

  const double target = fraction * ref_norm;
  double lo = 0.0;   // norm(lo) >= target
  double hi = lmax;  // norm(hi) <= target
  double lambda1 = (warm_lambda1 && *warm_lambda1 > lo && *warm_lambda1 < hi) ? *warm_lambda1
                                                                               : (1.0 - fraction) * lmax;
  Eigen::VectorXd beta = (warm_beta != nullptr && warm_beta->size() == p) ? *warm_beta : *reference;

  const double slack = kVerifySlack * std::max(1.0, lmax);
  for (std::size_t step = 1; step <= kMaxSearchSteps; ++step) {
    out.steps = step;
    const auto sol = solve(lambda1, lambda2, options, &beta);
    out.sweeps += sol.sweeps;
    beta = sol.beta;
    const double norm = beta.lpNorm<1>();

    if (const auto seg = segment(beta, lambda2)) {
      const double sb = seg->signs.dot(seg->slope);
      if (sb > 0.0) {
        const double at = 2.0 * (seg->signs.dot(seg->base) - target) / sb;
        if (at >= lo - slack && at <= hi + slack) {
          const double l1 = std::clamp(at, 0.0, lmax);
          const Eigen::VectorXd cand_a = seg->base - 0.5 * l1 * seg->slope;
          Eigen::VectorXd cand = Eigen::VectorXd::Zero(p);
          bool valid = true;
          for (std::size_t a = 0; a < seg->active.size() && valid; ++a) {
            const auto ai = static_cast<Eigen::Index>(a);
            const double v = cand_a(ai);
            if (seg->signs(ai) * v < -kVerifySlack * std::max(1.0, std::abs(seg->base(ai)))) valid = false;
            cand(seg->active[a]) = seg->signs(ai) * v > 0.0 ? v : 0.0;
          }
          if (valid) {
            const Eigen::VectorXd corr = xty_ - gram_ * cand;
            for (Eigen::Index j = 0; j < p && valid; ++j) {
              if (cand(j) == 0.0 && std::abs(2.0 * corr(j)) > l1 + slack) valid = false;
            }
          }
          if (valid) {
            out.beta = std::move(cand);
            out.lambda1 = l1;
            out.fraction = out.beta.lpNorm<1>() / ref_norm;
            out.kkt_violation = kkt_violation(out.beta, l1, lambda2);
            return out;
          }
        }
      }
    }

    if (norm > target) {
      lo = lambda1;
    } else {
      hi = lambda1;
    }
    if (hi - lo <= 1e-15 * lmax) break;
    lambda1 = 0.5 * (lo + hi);
  }

  out.beta = beta;
  out.lambda1 = lambda1;
  out.fraction = beta.lpNorm<1>() / ref_norm;
  out.kkt_violation = kkt_violation(beta, lambda1, lambda2);
  return out;
}

namespace {

struct Standardized {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;
  std::vector<Eigen::Index> kept;
  double y_mean = 0.0;
  Eigen::MatrixXd z;
  Eigen::VectorXd yc;
};

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw ArgumentError("design and response have different row counts");
  if (X.rows() < 2) throw ArgumentError("need at least two observations");
  if (X.cols() < 1) throw ArgumentError("need at least one covariate");
  if (!X.allFinite() || !y.allFinite()) throw ArgumentError("design and response must be finite");
  Standardized s;
  const Eigen::Index n = X.rows();
  s.means = X.colwise().mean().transpose();
  s.scales = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double norm = (X.col(j).array() - s.means(j)).matrix().norm();
    const double magnitude = std::max(1.0, X.col(j).norm());
    if (norm > 1e-12 * magnitude) {
      s.scales(j) = norm;
      s.kept.push_back(j);
    }
  }
  s.y_mean = y.mean();
  s.yc = y.array() - s.y_mean;
  s.z.resize(n, static_cast<Eigen::Index>(s.kept.size()));
  for (std::size_t k = 0; k < s.kept.size(); ++k) {
    const Eigen::Index j = s.kept[k];
    s.z.col(static_cast<Eigen::Index>(k)) = (X.col(j).array() - s.means(j)) / s.scales(j);
  }
  return s;
}

}  // namespace

ElasticNetProblem::ElasticNetProblem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     std::vector<std::string> names)
    : n_(X.rows()), names_(std::move(names)) {
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names_.size()) != X.cols()) {
    throw ArgumentError("covariate name count does not match the design");
  }
  auto s = standardize(X, y);
  kept_ = std::move(s.kept);
  means_ = std::move(s.means);
  scales_ = std::move(s.scales);
  y_mean_ = s.y_mean;
  system_ = GramSystem(s.z, s.yc);
}

Eigen::VectorXd ElasticNetFit::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != rescaled.size()) throw ArgumentError("design has the wrong number of columns");
  return (X * rescaled).array() + intercept_rescaled;
}

double ElasticNetFit::predict(const Eigen::RowVectorXd& row) const {
  if (row.size() != rescaled.size()) throw ArgumentError("row has the wrong number of columns");
  return intercept_rescaled + row.dot(rescaled);
}

ElasticNetFit solve(const ElasticNetProblem& problem, double lambda2, double l1_fraction,
                    const SolverOptions& options, const ElasticNetFit* warm_start) {
  const auto& kept = problem.kept_columns();
  const auto k = static_cast<Eigen::Index>(kept.size());

  Eigen::VectorXd warm_beta;
  std::optional<double> warm_lambda1;
  if (warm_start != nullptr && warm_start->standardized.size() == problem.covariates() &&
      warm_start->lambda2 == lambda2) {
    warm_beta.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) warm_beta(a) = warm_start->standardized(kept[static_cast<std::size_t>(a)]);
    warm_lambda1 = warm_start->lambda1;
  }

  const auto sol = problem.system().solve_fraction(l1_fraction, lambda2, options,
                                                   warm_beta.size() == k && k > 0 ? &warm_beta : nullptr,
                                                   warm_lambda1);

  ElasticNetFit fit;
  const Eigen::Index p = problem.covariates();
  fit.names = problem.names();
  fit.lambda1 = sol.lambda1;
  fit.lambda2 = lambda2;
  fit.l1_fraction = l1_fraction;
  fit.standardized = Eigen::VectorXd::Zero(p);
  fit.naive = Eigen::VectorXd::Zero(p);
  for (Eigen::Index a = 0; a < k; ++a) {
    const Eigen::Index j = kept[static_cast<std::size_t>(a)];
    fit.standardized(j) = sol.beta(a);
    fit.naive(j) = sol.beta(a) / problem.scales()(j);
  }
  fit.rescaled = (1.0 + lambda2) * fit.naive;
  fit.intercept_naive = problem.response_mean() - problem.means().dot(fit.naive);
  fit.intercept_rescaled = problem.response_mean() - problem.means().dot(fit.rescaled);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.naive(j) != 0.0) fit.active.push_back(static_cast<std::size_t>(j));
  }
  fit.diagnostics.sweeps = sol.sweeps;
  fit.diagnostics.search_steps = sol.steps;
  fit.diagnostics.kkt_violation = sol.kkt_violation;
  return fit;
}

SolutionPath solution_path(const ElasticNetProblem& problem, double lambda2, std::span<const double> fractions,
                           const SolverOptions& options) {
  if (!std::is_sorted(fractions.begin(), fractions.end())) {
    throw ArgumentError("path fractions must be sorted ascending");
  }
  SolutionPath path;
  path.lambda2 = lambda2;
  path.fractions.assign(fractions.begin(), fractions.end());
  path.fits.reserve(fractions.size());
  for (double s : fractions) {
    path.fits.push_back(solve(problem, lambda2, s, options, path.fits.empty() ? nullptr : &path.fits.back()));
  }
  return path;
}

}  // namespace mrenet
