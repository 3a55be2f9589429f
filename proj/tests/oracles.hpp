#pragma once

// Reference implementations used only by the tests. None of them shares code
// with the library's numerics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

/// Minimizer of |y - Xb|^2 + l2 |b|^2 + l1 |b|_1 by enumerating all 3^p sign
/// patterns: each pattern fixes the active set and signs, which turns the
/// problem into a linear system; the best sign-consistent candidate wins.
inline Eigen::VectorXd elastic_net_enumerate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1,
                                             double l2) {
  const auto p = static_cast<int>(X.cols());
  const Eigen::MatrixXd G = X.transpose() * X;
  const Eigen::VectorXd c = X.transpose() * y;
  auto objective = [&](const Eigen::VectorXd& b) {
    return (y - X * b).squaredNorm() + l2 * b.squaredNorm() + l1 * b.lpNorm<1>();
  };
  Eigen::VectorXd best = Eigen::VectorXd::Zero(p);
  double best_obj = objective(best);
  int patterns = 1;
  for (int j = 0; j < p; ++j) patterns *= 3;
  for (int code = 1; code < patterns; ++code) {
    std::vector<int> idx;
    std::vector<double> sign;
    for (int j = 0, k = code; j < p; ++j, k /= 3) {
      if (k % 3 == 0) continue;
      idx.push_back(j);
      sign.push_back(k % 3 == 1 ? 1.0 : -1.0);
    }
    const auto a = static_cast<int>(idx.size());
    Eigen::MatrixXd M(a, a);
    Eigen::VectorXd rhs(a);
    for (int r = 0; r < a; ++r) {
      for (int s = 0; s < a; ++s) M(r, s) = G(idx[r], idx[s]) + (r == s ? l2 : 0.0);
      rhs(r) = c(idx[r]) - 0.5 * l1 * sign[r];
    }
    const auto qr = M.colPivHouseholderQr();
    if (qr.rank() < a) continue;
    const Eigen::VectorXd bA = qr.solve(rhs);
    bool consistent = true;
    for (int r = 0; r < a; ++r) consistent = consistent && bA(r) * sign[r] >= 0.0;
    if (!consistent) continue;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (int r = 0; r < a; ++r) b(idx[r]) = bA(r);
    const double obj = objective(b);
    if (obj < best_obj) {
      best_obj = obj;
      best = b;
    }
  }
  return best;
}

struct Standardized {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  double y_mean = 0.0;
};

/// Columns centred and scaled to unit length; response centred.
inline Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Standardized s;
  const auto n = X.rows();
  s.mean = X.colwise().sum().transpose() / static_cast<double>(n);
  s.X = X;
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    s.X.col(j).array() -= s.mean(j);
    s.scale(j) = s.X.col(j).norm();
    s.X.col(j) /= s.scale(j);
  }
  s.y_mean = y.sum() / static_cast<double>(n);
  s.y = y.array() - s.y_mean;
  return s;
}

/// Naive elastic net at L1 fraction s of the ridge solution, in standardized
/// units. lambda1 is found by plain bisection; |b(lambda1)|_1 is non-increasing.
inline Eigen::VectorXd elastic_net_fraction(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& ys, double l2,
                                            double s) {
  const auto p = Xs.cols();
  const Eigen::MatrixXd A = Xs.transpose() * Xs + l2 * Eigen::MatrixXd::Identity(p, p);
  const Eigen::VectorXd ridge = A.fullPivLu().solve(Xs.transpose() * ys);
  const double target = s * ridge.lpNorm<1>();
  if (s >= 1.0) return ridge;
  double lo = 0.0, hi = 2.0 * (Xs.transpose() * ys).cwiseAbs().maxCoeff();
  if (s <= 0.0) return Eigen::VectorXd::Zero(p);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (elastic_net_enumerate(Xs, ys, mid, l2).lpNorm<1>() > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return elastic_net_enumerate(Xs, ys, 0.5 * (lo + hi), l2);
}

/// Time strictly above v from speeds and offsets, by a double loop.
inline double profile_value(const std::vector<double>& offsets, const std::vector<double>& speeds, double v) {
  double total = 0.0;
  for (std::size_t j = 1; j < offsets.size(); ++j) {
    if (speeds[j] > v) total += offsets[j] - offsets[j - 1];
  }
  return total;
}

/// Projection onto non-increasing sequences by exhaustive search over block
/// partitions: every optimal solution is constant on blocks of consecutive
/// points with the block mean as value. Feasible for n <= 12.
inline std::vector<double> isotonic_decreasing(const std::vector<double>& y) {
  const auto n = y.size();
  std::vector<double> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<double> fit;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i + 1 == n || (mask >> i & 1u)) {
        double mean = 0.0;
        for (std::size_t k = start; k <= i; ++k) mean += y[k];
        mean /= static_cast<double>(i + 1 - start);
        for (std::size_t k = start; k <= i; ++k) fit.push_back(mean);
        start = i + 1;
      }
    }
    bool monotone = true;
    for (std::size_t i = 1; i < n; ++i) monotone = monotone && fit[i] <= fit[i - 1];
    if (!monotone) continue;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += (fit[i] - y[i]) * (fit[i] - y[i]);
    if (err < best_err) {
      best_err = err;
      best = fit;
    }
  }
  return best;
}

/// log(tau) + alpha log D + sum of products, then exp; written independently of
/// the library's predict().
inline double equation_seconds(double tau, double alpha, double distance,
                               const std::vector<std::pair<double, double>>& coefficient_value_pairs) {
  double log_mu = std::log(tau) + alpha * std::log(distance);
  for (const auto& [coef, value] : coefficient_value_pairs) log_mu += coef * value;
  return std::exp(log_mu);
}

}  // namespace oracle
