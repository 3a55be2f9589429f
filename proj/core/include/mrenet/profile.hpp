#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrenet/gps_ingest.hpp"

namespace mrenet {

/// Upper end of the speed domain, v_G (m/s). Time above it is in no interval.
inline constexpr double kMaxSpeed = 12.5;
/// Spacing of the base evaluation grid (m/s).
inline constexpr double kBaseGridStep = 0.025;

/// Right endpoint v_g of the g-th of G equal-width intervals on (0, kMaxSpeed].
inline double interval_endpoint(int g, int G) { return static_cast<double>(g) * kMaxSpeed / G; }

/// Strictly increasing list of speeds in [0, kMaxSpeed], shared cheaply
/// between the profiles evaluated on it.
class SpeedGrid {
 public:
  explicit SpeedGrid(std::vector<double> speeds);

  /// 0, 0.025, ..., 12.5.
  static SpeedGrid base();
  /// Base grid plus every interval endpoint of each resolution, so that
  /// interval_times() is exact for all of them.
  static SpeedGrid for_resolutions(std::span<const int> resolutions);

  std::span<const double> speeds() const noexcept { return *speeds_; }
  std::size_t size() const noexcept { return speeds_->size(); }
  double operator[](std::size_t i) const noexcept { return (*speeds_)[i]; }

  /// Index of `v` if it is a grid point (exact comparison).
  std::optional<std::size_t> find(double v) const;
  /// True when every endpoint of resolution G lies on the grid.
  bool aligned(int G) const;

  friend bool operator==(const SpeedGrid& a, const SpeedGrid& b) {
    return a.speeds_ == b.speeds_ || *a.speeds_ == *b.speeds_;
  }

 private:
  std::shared_ptr<const std::vector<double>> speeds_;
};

/// Time (seconds) a session spent strictly above each grid speed.
struct TrainingDistributionProfile {
  std::string session_id;
  std::string runner_id;
  double start = 0.0;  // session start, absolute seconds
  SpeedGrid grid = SpeedGrid::base();
  std::vector<double> values;
  double total_duration = 0.0;  // t_u

  /// P(v) for a grid speed, or t_u for v < 0. Throws for off-grid v >= 0.
  double value_at(double v) const;
};

/// P_u(v) = sum_{j>=2} (T_j - T_{j-1}) I(V_j > v) at every grid speed.
TrainingDistributionProfile observed_profile(const Session& session, const SpeedGrid& grid);

/// Least-squares projection onto non-increasing sequences (pool adjacent
/// violators, unit weights).
std::vector<double> isotonic_decreasing(std::span<const double> values);

/// Monotone smoothing: isotonic fit clamped to [0, t_u].
TrainingDistributionProfile smooth_profile(const TrainingDistributionProfile& profile);

struct CleaningRule {
  double speed = 8.0;         // m/s
  double max_seconds = 125.0; // a profile is dropped iff P(speed) > max_seconds
};

struct CleanResult {
  std::vector<TrainingDistributionProfile> kept;
  std::vector<TrainingDistributionProfile> dropped;
};

CleanResult clean_sessions(std::vector<TrainingDistributionProfile> profiles, const CleaningRule& rule = {});

/// The span between two consecutive field tests of one runner; a session
/// belongs to it when start_s <= session start < end_s.
struct PeriodWindow {
  std::string runner_id;
  int period_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Mean smoothed profile of a runner's sessions within one training period.
struct PeriodProfile {
  std::string runner_id;
  int period_index = 0;
  SpeedGrid grid = SpeedGrid::base();
  std::vector<double> values;        // mean P on the grid
  double mean_session_length = 0.0;  // mean t_u, equals the mean profile below 0
  std::size_t session_count = 0;

  double value_at(double v) const;
};

/// Pointwise mean of the profiles (summed in session_id order). All profiles
/// must share one grid. Throws UninformativePeriodError when empty.
PeriodProfile period_average(std::span<const TrainingDistributionProfile> profiles,
                             const std::string& runner_id, int period_index);

struct PeriodKey {
  std::string runner_id;
  int period_index = 0;
  auto operator<=>(const PeriodKey&) const = default;
};

/// Averaged periods plus the periods left out for having too few sessions.
struct PeriodSet {
  std::vector<PeriodProfile> periods;
  std::vector<PeriodKey> uninformative;

  const PeriodProfile* find(const std::string& runner_id, int period_index) const;
  bool is_uninformative(const std::string& runner_id, int period_index) const;
};

/// Assigns profiles to windows and averages each window. Windows with fewer
/// than `min_sessions` sessions are reported as uninformative.
PeriodSet build_period_profiles(std::span<const TrainingDistributionProfile> profiles,
                                std::span<const PeriodWindow> windows, std::size_t min_sessions = 1);

/// Average time spent in each speed interval (v_{g-1}, v_g], g = 1..G, of the
/// equal-width partition of (0, 12.5]. Throws for G < 1 or a grid not aligned
/// with G.
std::vector<double> interval_times(const PeriodProfile& period, int G);

}  // namespace mrenet
