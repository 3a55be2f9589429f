#include "mrenet/profile.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mrenet/error.hpp"

namespace mrenet {

SpeedGrid::SpeedGrid(std::vector<double> speeds) {
  if (speeds.empty()) throw ArgumentError("speed grid is empty");
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    const double v = speeds[i];
    if (!std::isfinite(v) || v < 0.0 || v > kMaxSpeed) {
      throw ArgumentError("speed grid values must lie in [0, 12.5]");
    }
    if (i > 0 && !(v > speeds[i - 1])) throw ArgumentError("speed grid must be strictly increasing");
  }
  speeds_ = std::make_shared<const std::vector<double>>(std::move(speeds));
}

SpeedGrid SpeedGrid::base() {
  static const SpeedGrid grid = [] {
    const int steps = static_cast<int>(std::lround(kMaxSpeed / kBaseGridStep));
    std::vector<double> v;
    v.reserve(steps + 1);
    for (int k = 0; k <= steps; ++k) v.push_back(static_cast<double>(k) / 40.0);
    return SpeedGrid(std::move(v));
  }();
  return grid;
}

SpeedGrid SpeedGrid::for_resolutions(std::span<const int> resolutions) {
  const auto b = base().speeds();
  std::vector<double> v(b.begin(), b.end());
  for (int G : resolutions) {
    if (G < 1) throw ArgumentError("resolution must be >= 1");
    for (int g = 0; g <= G; ++g) v.push_back(interval_endpoint(g, G));
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() == b.size()) return base();
  return SpeedGrid(std::move(v));
}

std::optional<std::size_t> SpeedGrid::find(double v) const {
  const auto& s = *speeds_;
  const auto it = std::lower_bound(s.begin(), s.end(), v);
  if (it == s.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - s.begin());
}

bool SpeedGrid::aligned(int G) const {
  if (G < 1) return false;
  for (int g = 0; g <= G; ++g) {
    if (!find(interval_endpoint(g, G))) return false;
  }
  return true;
}

double TrainingDistributionProfile::value_at(double v) const {
  if (v < 0.0) return total_duration;
  const auto idx = grid.find(v);
  if (!idx) throw ArgumentError("speed " + std::to_string(v) + " is not on the profile grid");
  return values[*idx];
}

TrainingDistributionProfile observed_profile(const Session& session, const SpeedGrid& grid) {
  if (!session.has_speeds()) {
    throw ArgumentError("session '" + session.session_id + "' has no speeds");
  }
  const auto speeds = grid.speeds();
  const std::size_t k = speeds.size();

  // acc[m] collects the time of records whose speed exceeds exactly grid
  // points 0..m; a suffix sum then gives P at every grid point.
  std::vector<double> acc(k, 0.0);
  for (std::size_t j = 1; j < session.offsets.size(); ++j) {
    const double dt = session.offsets[j] - session.offsets[j - 1];
    const auto above = static_cast<std::size_t>(
        std::lower_bound(speeds.begin(), speeds.end(), session.speeds[j]) - speeds.begin());
    if (above > 0) acc[above - 1] += dt;
  }

  TrainingDistributionProfile p;
  p.session_id = session.session_id;
  p.runner_id = session.runner_id;
  p.start = session.start;
  p.grid = grid;
  p.total_duration = session.duration();
  p.values.assign(k, 0.0);
  double running = 0.0;
  for (std::size_t m = k; m-- > 0;) {
    running += acc[m];
    p.values[m] = running;
  }
  return p;
}

std::vector<double> isotonic_decreasing(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double x : values) {
    blocks.push_back({x, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean());
  return out;
}

TrainingDistributionProfile smooth_profile(const TrainingDistributionProfile& profile) {
  TrainingDistributionProfile out = profile;
  out.values = isotonic_decreasing(profile.values);
  for (double& v : out.values) v = std::clamp(v, 0.0, profile.total_duration);
  return out;
}

CleanResult clean_sessions(std::vector<TrainingDistributionProfile> profiles, const CleaningRule& rule) {
  CleanResult out;
  for (auto& p : profiles) {
    if (p.value_at(rule.speed) > rule.max_seconds) {
      out.dropped.push_back(std::move(p));
    } else {
      out.kept.push_back(std::move(p));
    }
  }
  return out;
}

double PeriodProfile::value_at(double v) const {
  if (v < 0.0) return mean_session_length;
  const auto idx = grid.find(v);
  if (!idx) throw ArgumentError("speed " + std::to_string(v) + " is not on the period grid");
  return values[*idx];
}

PeriodProfile period_average(std::span<const TrainingDistributionProfile> profiles,
                             const std::string& runner_id, int period_index) {
  if (profiles.empty()) {
    throw UninformativePeriodError("runner '" + runner_id + "' period " + std::to_string(period_index) +
                                   " has no sessions");
  }
  std::vector<const TrainingDistributionProfile*> ordered;
  ordered.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (!(p.grid == profiles.front().grid)) throw ArgumentError("profiles are on different grids");
    ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->session_id < b->session_id; });

  PeriodProfile out;
  out.runner_id = runner_id;
  out.period_index = period_index;
  out.grid = profiles.front().grid;
  out.values.assign(out.grid.size(), 0.0);
  out.session_count = ordered.size();
  double total = 0.0;
  for (const auto* p : ordered) {
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += p->values[i];
    total += p->total_duration;
  }
  const double n = static_cast<double>(ordered.size());
  for (double& v : out.values) v /= n;
  out.mean_session_length = total / n;
  return out;
}

const PeriodProfile* PeriodSet::find(const std::string& runner_id, int period_index) const {
  for (const auto& p : periods) {
    if (p.runner_id == runner_id && p.period_index == period_index) return &p;
  }
  return nullptr;
}

bool PeriodSet::is_uninformative(const std::string& runner_id, int period_index) const {
  return std::find(uninformative.begin(), uninformative.end(), PeriodKey{runner_id, period_index}) !=
         uninformative.end();
}

PeriodSet build_period_profiles(std::span<const TrainingDistributionProfile> profiles,
                                std::span<const PeriodWindow> windows, std::size_t min_sessions) {
  std::map<PeriodKey, std::vector<TrainingDistributionProfile>> members;
  for (const auto& w : windows) {
    if (!(w.end_s > w.start_s)) throw ArgumentError("period window must have end > start");
    auto [it, inserted] = members.try_emplace(PeriodKey{w.runner_id, w.period_index});
    if (!inserted) {
      throw ArgumentError("duplicate period window for runner '" + w.runner_id + "' period " +
                          std::to_string(w.period_index));
    }
  }
  for (const auto& p : profiles) {
    for (const auto& w : windows) {
      if (w.runner_id == p.runner_id && p.start >= w.start_s && p.start < w.end_s) {
        members[PeriodKey{w.runner_id, w.period_index}].push_back(p);
        break;
      }
    }
  }

  PeriodSet out;
  for (auto& [key, group] : members) {
    if (group.empty() || group.size() < min_sessions) {
      out.uninformative.push_back(key);
      continue;
    }
    out.periods.push_back(period_average(group, key.runner_id, key.period_index));
  }
  return out;
}

std::vector<double> interval_times(const PeriodProfile& period, int G) {
  if (G < 1) throw ArgumentError("resolution G must be >= 1");
  if (!period.grid.aligned(G)) {
    throw ArgumentError("resolution " + std::to_string(G) + " is not aligned with the profile grid");
  }
  std::vector<double> out(static_cast<std::size_t>(G));
  double upper = period.value_at(0.0);
  for (int g = 1; g <= G; ++g) {
    const double next = period.value_at(interval_endpoint(g, G));
    out[static_cast<std::size_t>(g - 1)] = upper - next;
    upper = next;
  }
  return out;
}

}  // namespace mrenet
