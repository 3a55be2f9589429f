#include "mrenet/multires.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "mrenet/error.hpp"
#include "mrenet/parallel.hpp"
#include "mrenet/profile.hpp"
#include "mrenet/random.hpp"

namespace mrenet {

TuningGrid TuningGrid::defaults() {
  TuningGrid grid;
  grid.lambda2s = {0.0, 0.01, 0.1, 1.0, 10.0, 100.0};
  for (int k = 1; k <= 20; ++k) grid.fractions.push_back(k / 20.0);
  return grid;
}

std::vector<int> MultiresOptions::default_resolutions() {
  std::vector<int> out;
  for (int G = 5; G <= 125; G += 5) out.push_back(G);
  return out;
}

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Held-out squared errors for one fold: errors[i][j] for (lambda2s[i], fractions[j]).
std::vector<std::vector<double>> fold_errors(const StudyTable& table, std::span<const std::size_t> train,
                                             std::span<const std::size_t> held_out, const TuningGrid& grid,
                                             std::span<const std::size_t> fraction_order,
                                             const SolverOptions& solver) {
  const StudyTable fit_rows = table.subset(train);
  const StudyTable eval_rows = table.subset(held_out);
  const ElasticNetProblem problem(fit_rows.covariates, fit_rows.response, fit_rows.column_names);

  std::vector<double> ordered(fraction_order.size());
  for (std::size_t k = 0; k < fraction_order.size(); ++k) ordered[k] = grid.fractions[fraction_order[k]];

  std::vector<std::vector<double>> out(grid.lambda2s.size(), std::vector<double>(grid.fractions.size(), kInfeasible));
  for (std::size_t i = 0; i < grid.lambda2s.size(); ++i) {
    SolutionPath path;
    try {
      path = solution_path(problem, grid.lambda2s[i], ordered, solver);
    } catch (const RankDeficientError&) {
      continue;
    }
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      const Eigen::VectorXd pred = path.fits[k].predict(eval_rows.covariates);
      out[i][fraction_order[k]] = (eval_rows.response - pred).squaredNorm() / static_cast<double>(eval_rows.rows());
    }
  }
  return out;
}

}  // namespace

TuningResult cross_validate(const StudyTable& estimation, const TuningGrid& grid, const CvOptions& options) {
  if (grid.lambda2s.empty() || grid.fractions.empty()) throw ArgumentError("tuning grid is empty");
  for (double l2 : grid.lambda2s) {
    if (!(l2 >= 0.0)) throw ArgumentError("lambda2 grid values must be non-negative");
  }
  for (double s : grid.fractions) {
    if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("fraction grid values must lie in [0, 1]");
  }
  if (options.folds < 2) throw ArgumentError("need at least 2 folds");
  if (options.repeats < 1) throw ArgumentError("need at least 1 repeat");
  const std::size_t n = estimation.rows();
  // balanced allocation: every fold is non-empty exactly when n >= folds
  if (n < options.folds) {
    throw ArgumentError("estimation set has " + std::to_string(n) + " rows, fewer than " +
                        std::to_string(options.folds) + " folds");
  }

  std::vector<std::size_t> fraction_order(grid.fractions.size());
  std::iota(fraction_order.begin(), fraction_order.end(), 0);
  std::stable_sort(fraction_order.begin(), fraction_order.end(),
                   [&](std::size_t a, std::size_t b) { return grid.fractions[a] < grid.fractions[b]; });

  using Surface = std::vector<std::vector<double>>;
  std::vector<std::vector<Surface>> per_fold(options.repeats, std::vector<Surface>(options.folds));

  parallel_for(options.repeats, options.threads, [&](std::size_t r) {
    Rng rng(split_seed(options.seed, static_cast<std::uint64_t>(estimation.resolution), r));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % options.folds;

    for (std::size_t f = 0; f < options.folds; ++f) {
      std::vector<std::size_t> train, held_out;
      for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? held_out : train).push_back(i);
      per_fold[r][f] = fold_errors(estimation, train, held_out, grid, fraction_order, options.solver);
    }
  });

  TuningResult out;
  out.resolution = estimation.resolution;
  out.lambda2s = grid.lambda2s;
  out.fractions = grid.fractions;
  out.surface.assign(grid.lambda2s.size(), std::vector<double>(grid.fractions.size(), 0.0));
  const double folds_total = static_cast<double>(options.repeats * options.folds);
  for (std::size_t i = 0; i < grid.lambda2s.size(); ++i) {
    for (std::size_t j = 0; j < grid.fractions.size(); ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < options.repeats; ++r) {
        for (std::size_t f = 0; f < options.folds; ++f) sum += per_fold[r][f][i][j];
      }
      out.surface[i][j] = sum / folds_total;
    }
  }

  // larger lambda2 first, then smaller fraction; only strict improvements move
  std::vector<std::size_t> l2_order(grid.lambda2s.size());
  std::iota(l2_order.begin(), l2_order.end(), 0);
  std::stable_sort(l2_order.begin(), l2_order.end(),
                   [&](std::size_t a, std::size_t b) { return grid.lambda2s[a] > grid.lambda2s[b]; });
  double best = kInfeasible;
  bool found = false;
  for (std::size_t i : l2_order) {
    for (std::size_t j : fraction_order) {
      const double e = out.surface[i][j];
      if (std::isfinite(e) && (!found || e < best)) {
        best = e;
        found = true;
        out.lambda2 = grid.lambda2s[i];
        out.l1_fraction = grid.fractions[j];
      }
    }
  }
  if (!found) throw ArgumentError("no tuning point gives a defined fit at resolution " +
                                  std::to_string(estimation.resolution));
  out.cv_error = best;
  return out;
}

TestError test_error(const ElasticNetFit& fit, const StudyTable& test) {
  if (fit.resolution != test.resolution) {
    throw ArgumentError("fit is at resolution " + std::to_string(fit.resolution) + " but test table at " +
                        std::to_string(test.resolution));
  }
  if (fit.names != test.column_names) throw ArgumentError("fit and test table have different columns");
  TestError out;
  out.rows = test.rows();
  if (out.rows == 0) return out;
  const Eigen::VectorXd linear = fit.predict(test.covariates);
  std::vector<double> squares(out.rows);
  for (std::size_t i = 0; i < out.rows; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double r = test.performance(ii) - std::exp(linear(ii));
    out.residuals.push_back(r);
    squares[i] = r * r;
    out.error += squares[i];
  }
  if (out.rows > 1) {
    const double mean = out.error / static_cast<double>(out.rows);
    double ss = 0.0;
    for (double s : squares) ss += (s - mean) * (s - mean);
    out.squared_residual_sd = std::sqrt(ss / static_cast<double>(out.rows - 1));
  }
  out.error_sd = std::sqrt(static_cast<double>(out.rows)) * out.squared_residual_sd;
  return out;
}

std::vector<IntervalBlock> interval_blocks(const ElasticNetFit& fit, int G) {
  if (fit.rescaled.size() != static_cast<Eigen::Index>(kScalarColumnCount) + G) {
    throw ArgumentError("fit does not have " + std::to_string(G) + " interval coefficients");
  }
  std::vector<IntervalBlock> out;
  for (int g = 1; g <= G; ++g) {
    const double c = fit.rescaled(static_cast<Eigen::Index>(kScalarColumnCount) + g - 1);
    const int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (!out.empty() && out.back().last == g - 1 && out.back().sign == s) {
      out.back().last = g;
      out.back().upper = interval_endpoint(g, G);
    } else {
      out.push_back({g, g, interval_endpoint(g - 1, G), interval_endpoint(g, G), s, {}});
    }
  }
  return out;
}

std::pair<std::string, double> exported_unit(const std::string& column) {
  if (column == "height_cm") return {"height_m", 0.01};
  if (column == "economy_ml") return {"economy_l", 0.001};
  if (column == "obla_ms") return {"obla_kmh", 3.6};
  if (column == "mean_session_length") return {"mean_session_length_s", 1.0};
  if (column.rfind("interval_", 0) == 0) return {column + "_min", 1.0 / 60.0};
  return {column, 1.0};
}

PredictiveEquation export_equation(const ElasticNetFit& fit, int G) {
  const auto expected = study_column_names(G);
  if (fit.names != expected) throw ArgumentError("fit columns do not match a study table at resolution " +
                                                 std::to_string(G));
  PredictiveEquation eq;
  eq.resolution = G;
  eq.tau = std::exp(fit.intercept_rescaled);
  eq.alpha = fit.rescaled(static_cast<Eigen::Index>(kLogDistanceColumn));
  for (std::size_t j = 1; j < kScalarColumnCount; ++j) {
    const double c = fit.rescaled(static_cast<Eigen::Index>(j));
    if (c == 0.0) continue;
    const auto [name, factor] = exported_unit(fit.names[j]);
    eq.scalars.push_back({name, c / factor});
  }
  for (int g = 1; g <= G; ++g) {
    const double c = fit.rescaled(static_cast<Eigen::Index>(kScalarColumnCount) + g - 1);
    if (c == 0.0) continue;
    eq.intervals.push_back({interval_endpoint(g - 1, G), interval_endpoint(g, G), c * 60.0});
  }
  return eq;
}

double predict(const PredictiveEquation& equation, double distance_m, const std::map<std::string, double>& scalars,
               std::span<const double> interval_minutes) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) throw ArgumentError("distance must be positive");
  if (interval_minutes.size() != equation.intervals.size()) {
    throw ArgumentError("equation has " + std::to_string(equation.intervals.size()) + " interval terms, got " +
                        std::to_string(interval_minutes.size()) + " interval times");
  }
  double scalar_sum = 0.0;
  for (const auto& term : equation.scalars) {
    const auto it = scalars.find(term.name);
    if (it == scalars.end()) throw ArgumentError("missing covariate '" + term.name + "'");
    if (!std::isfinite(it->second)) throw ArgumentError("covariate '" + term.name + "' is not finite");
    scalar_sum += term.coefficient * it->second;
  }
  double interval_sum = 0.0;
  for (std::size_t i = 0; i < interval_minutes.size(); ++i) {
    const double t = interval_minutes[i];
    if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("interval times must be finite and >= 0");
    interval_sum += equation.intervals[i].coefficient_per_minute * t;
  }
  return equation.tau * std::pow(distance_m, equation.alpha) * std::exp(scalar_sum) * std::exp(interval_sum);
}

namespace {
std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string signed_term(double c, const std::string& what, bool first) {
  std::string out;
  if (first) {
    out = c < 0 ? "-" : "";
  } else {
    out = c < 0 ? " - " : " + ";
  }
  return out + fmt("%.4g", std::abs(c)) + " " + what;
}
}  // namespace

std::string render_equation(const PredictiveEquation& eq) {
  std::string out = fmt("%.4f", eq.tau) + " \"Distance (m)\"^" + fmt("%.4f", eq.alpha) + "\n";
  if (!eq.scalars.empty()) {
    out += "  exp{";
    for (std::size_t i = 0; i < eq.scalars.size(); ++i) {
      out += signed_term(eq.scalars[i].coefficient, "\"" + eq.scalars[i].name + "\"", i == 0);
    }
    out += "}\n";
  }
  if (!eq.intervals.empty()) {
    out += "  exp{";
    for (std::size_t i = 0; i < eq.intervals.size(); ++i) {
      out += signed_term(eq.intervals[i].coefficient_per_minute, "t" + std::to_string(i + 1), i == 0);
    }
    out += "}\n";
    out += "where t1..t" + std::to_string(eq.intervals.size()) +
           " are period-average minutes spent in the speed intervals (m/s):\n";
    for (std::size_t i = 0; i < eq.intervals.size(); ++i) {
      out += "  t" + std::to_string(i + 1) + ": (" + fmt("%.4g", eq.intervals[i].lower) + ", " +
             fmt("%.4g", eq.intervals[i].upper) + "]\n";
    }
  }
  return out;
}

const ResolutionEntry& ResolutionReport::entry(int G) const {
  for (const auto& e : entries) {
    if (e.resolution == G) return e;
  }
  throw ArgumentError("report has no entry for resolution " + std::to_string(G));
}

TableSource make_table_source(std::vector<FieldTest> field_tests, std::vector<LabResult> lab_results,
                              PeriodSet periods, std::vector<std::string> test_runners) {
  struct Data {
    std::vector<FieldTest> tests;
    std::vector<LabResult> labs;
    PeriodSet periods;
    std::set<std::string> held_out;
  };
  auto data = std::make_shared<const Data>(Data{std::move(field_tests), std::move(lab_results), std::move(periods),
                                                {test_runners.begin(), test_runners.end()}});
  return [data](int G) {
    const auto table = build_table(data->tests, data->labs, data->periods, G);
    return partition_by_runners(table, data->held_out);
  };
}

ResolutionReport select_resolution(const TableSource& tables, const MultiresOptions& options) {
  if (options.resolutions.empty()) throw ArgumentError("resolution set is empty");
  std::vector<int> resolutions = options.resolutions;
  std::sort(resolutions.begin(), resolutions.end());
  if (std::adjacent_find(resolutions.begin(), resolutions.end()) != resolutions.end()) {
    throw ArgumentError("resolution set has duplicates");
  }

  ResolutionReport report;
  for (int G : resolutions) {
    auto [estimation, test] = tables(G);
    if (estimation.resolution != G || test.resolution != G) {
      throw ArgumentError("table source returned the wrong resolution for G = " + std::to_string(G));
    }
    if (report.entries.empty()) {
      report.estimation_runners = estimation.runners();
      report.test_runners = test.runners();
      report.estimation_rows = estimation.rows();
      report.test_rows = test.rows();
    }

    ResolutionEntry entry;
    entry.resolution = G;
    entry.tuning = cross_validate(estimation, options.grid, options.cv);
    const ElasticNetProblem problem(estimation.covariates, estimation.response, estimation.column_names);
    entry.fit = solve(problem, entry.tuning.lambda2, entry.tuning.l1_fraction, options.cv.solver);
    entry.fit.resolution = G;
    entry.test = test_error(entry.fit, test);
    entry.blocks = interval_blocks(entry.fit, G);
    report.entries.push_back(std::move(entry));
  }

  for (auto& e : report.entries) {
    for (auto& block : e.blocks) {
      for (const auto& other : report.entries) {
        if (other.resolution == e.resolution) continue;
        for (const auto& b : other.blocks) {
          if (b.sign == block.sign && b.lower < block.upper && block.lower < b.upper) {
            block.persists_in.push_back(other.resolution);
            break;
          }
        }
      }
    }
  }

  const ResolutionEntry* best = &report.entries.front();
  for (const auto& e : report.entries) {
    if (e.test.error < best->test.error) best = &e;
  }
  report.selected_resolution = best->resolution;
  report.equation = export_equation(best->fit, best->resolution);
  report.notes = {
      "cross-validation folds allocate rows, not runners; the estimation/test split is by runner",
      "confidence intervals for elastic net coefficients are not computed; magnitudes only",
      "tuning-grid points where lambda2 = 0 leaves the design singular are reported as null",
  };
  return report;
}

}  // namespace mrenet
