#include "mrenet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "mrenet/error.hpp"
#include "mrenet/random.hpp"

namespace mrenet {

namespace {

constexpr double kEpoch = 1.5e9;
constexpr double kDay = 86400.0;

// Planned speeds sit 0.01 m/s above a base grid point. That keeps them clear
// of every interval endpoint for G <= 125, so computed speeds never straddle a
// grid point through rounding.
double planned_speed(Rng& rng, double lo, double hi) {
  const auto k_lo = static_cast<long>(std::ceil((lo - 0.01) * 40.0));
  const auto k_hi = static_cast<long>(std::floor((hi - 0.01) * 40.0));
  return static_cast<double>(rng.integer(k_lo, k_hi)) / 40.0 + 0.01;
}

double planned_duration(Rng& rng, double lo, double hi, double step) {
  const auto k_lo = static_cast<long>(std::ceil(lo / step));
  const auto k_hi = static_cast<long>(std::floor(hi / step));
  return static_cast<double>(rng.integer(k_lo, k_hi)) * step;
}

std::string runner_name(int r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R%02d", r);
  return buf;
}

std::vector<SpeedSegment> plan_session(Rng& rng, const SynthConfig& c, double band_focus) {
  const double dt = c.sample_interval;
  std::vector<SpeedSegment> plan;
  if (rng.uniform() >= c.interval_session_share) {
    plan.push_back({planned_speed(rng, 2.8, 4.2), planned_duration(rng, 1800, 4200, dt), true});
    return plan;
  }
  plan.push_back({planned_speed(rng, 2.6, 3.6), planned_duration(rng, 600, 1200, dt), true});
  const bool band_reps = rng.uniform() < band_focus;
  const int reps = static_cast<int>(rng.integer(4, 10));
  for (int i = 0; i < reps; ++i) {
    double v = 0.0;
    if (band_reps) {
      v = planned_speed(rng, c.delta_lower, c.delta_upper);
    } else {
      do {
        v = planned_speed(rng, 4.0, 7.4);
      } while (v > c.delta_lower && v <= c.delta_upper);
    }
    plan.push_back({v, planned_duration(rng, 60, 300, 10 * dt), true});
    const double u = rng.uniform();
    if (u < c.pause_share) {
      plan.push_back({0.0, planned_duration(rng, 60, 180, dt), false});
    } else if (u < 0.5 * (1.0 + c.pause_share)) {
      plan.push_back({0.0, planned_duration(rng, 60, 120, dt), true});
    } else {
      plan.push_back({planned_speed(rng, 2.0, 2.6), planned_duration(rng, 60, 180, dt), true});
    }
  }
  plan.push_back({planned_speed(rng, 2.6, 3.4), planned_duration(rng, 300, 900, dt), true});
  return plan;
}

}  // namespace

void SynthConfig::validate() const {
  if (runner_count < 1) throw ArgumentError("runner_count must be >= 1");
  if (periods_per_runner < 1) throw ArgumentError("periods_per_runner must be >= 1");
  if (sessions_min < 1 || sessions_max < sessions_min) throw ArgumentError("need 1 <= sessions_min <= sessions_max");
  if (period_days < sessions_max) throw ArgumentError("period_days must be >= sessions_max (one session per day)");
  if (!(sample_interval > 0.0) || sample_interval > 10.0) throw ArgumentError("sample_interval must lie in (0, 10]");
  if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
  if (!(delta_lower > 0.0 && delta_lower < delta_upper && delta_upper < kMaxSpeed)) {
    throw ArgumentError("need 0 < delta_lower < delta_upper < 12.5");
  }
  if (delta_upper - delta_lower < 0.05) throw ArgumentError("planted band must be at least 0.05 m/s wide");
  if (!(noise_sd >= 0.0)) throw ArgumentError("noise_sd must be >= 0");
  if (!(interval_session_share >= 0.0 && interval_session_share <= 1.0)) {
    throw ArgumentError("interval_session_share must lie in [0, 1]");
  }
  if (!(pause_share >= 0.0 && pause_share <= 1.0)) throw ArgumentError("pause_share must lie in [0, 1]");
}

double true_profile_value(const SessionTruth& session, double v) {
  double total = 0.0;
  for (const auto& seg : session.segments) {
    if (v < 0.0 || seg.speed > v) total += seg.duration;
  }
  return total;
}

TrainingDistributionProfile true_profile(const SessionTruth& session, const SpeedGrid& grid) {
  TrainingDistributionProfile p;
  p.runner_id = session.runner_id;
  p.start = session.start;
  p.grid = grid;
  p.total_duration = true_profile_value(session, -1.0);
  p.values.reserve(grid.size());
  for (double v : grid.speeds()) p.values.push_back(true_profile_value(session, v));
  return p;
}

double model_log_performance(const SynthConfig& c, int distance_m, const std::array<double, kLabCovariateCount>& lab,
                             double mean_session_length, double band_time) {
  double eta = std::log(c.tau) + c.alpha * std::log(static_cast<double>(distance_m));
  for (std::size_t i = 0; i < kLabCovariateCount; ++i) eta += c.gamma[i] * lab[i];
  eta += c.delta0 * mean_session_length + c.delta_magnitude * band_time;
  return eta;
}

SyntheticStudy generate(const SynthConfig& config) {
  config.validate();
  SyntheticStudy out;
  out.truth.config = config;
  const double dt = config.sample_interval;

  for (int r = 1; r <= config.runner_count; ++r) {
    Rng rng(split_seed(config.seed, static_cast<std::uint64_t>(r)));
    const std::string runner = runner_name(r);
    const std::array<double, kLabCovariateCount> base = {
        rng.uniform(50, 75),   rng.uniform(160, 190), rng.uniform(20, 40),    rng.uniform(55, 75),
        rng.uniform(17, 22),   rng.uniform(180, 220), rng.uniform(0.9, 1.1),  rng.uniform(4.0, 5.0)};
    double distance = 0.0;

    for (int p = 1; p <= config.periods_per_runner; ++p) {
      const double window_start = kEpoch + static_cast<double>((p - 1) * config.period_days) * kDay;
      out.periods.push_back({runner, p, window_start, window_start + config.period_days * kDay});

      LabResult lab;
      lab.runner_id = runner;
      lab.period_index = p;
      lab.values = base;
      lab.values[0] += rng.uniform(-1.5, 1.5);
      lab.values[2] += (p - 1) * config.period_days / 365.0;
      lab.values[3] *= 1.0 + rng.uniform(-0.03, 0.03);
      lab.values[4] *= 1.0 + rng.uniform(-0.03, 0.03);
      lab.values[5] *= 1.0 + rng.uniform(-0.03, 0.03);
      lab.values[6] *= 1.0 + rng.uniform(-0.03, 0.03);
      lab.values[7] += rng.uniform(-0.2, 0.2);
      out.lab_results.push_back(lab);

      const double band_focus = rng.uniform();
      const int count = static_cast<int>(rng.integer(config.sessions_min, config.sessions_max));
      std::vector<int> days(static_cast<std::size_t>(config.period_days));
      for (int d = 0; d < config.period_days; ++d) days[static_cast<std::size_t>(d)] = d;
      rng.shuffle(days);
      days.resize(static_cast<std::size_t>(count));
      std::sort(days.begin(), days.end());

      double length_sum = 0.0, band_sum = 0.0;
      for (int day : days) {
        SessionTruth s;
        s.runner_id = runner;
        s.period_index = p;
        s.start = window_start + day * kDay + static_cast<double>(rng.integer(6, 18)) * 3600.0 +
                  static_cast<double>(rng.integer(0, 59)) * 60.0;
        s.segments = plan_session(rng, config, band_focus);

        double t = s.start;
        out.records.push_back({runner, t, distance});
        for (const auto& seg : s.segments) {
          if (!seg.recorded) {
            t += seg.duration;
            out.records.push_back({runner, t, distance});
            continue;
          }
          const auto steps = static_cast<long>(std::lround(seg.duration / dt));
          for (long k = 0; k < steps; ++k) {
            t += dt;
            distance += seg.speed * dt;
            out.records.push_back({runner, t, distance});
          }
        }
        s.end = t;
        length_sum += true_profile_value(s, -1.0);
        band_sum += true_profile_value(s, config.delta_lower) - true_profile_value(s, config.delta_upper);
        out.truth.sessions.push_back(std::move(s));
      }

      PeriodTruth pt;
      pt.runner_id = runner;
      pt.period_index = p;
      pt.session_count = static_cast<std::size_t>(count);
      pt.mean_session_length = length_sum / count;
      pt.band_time = band_sum / count;
      out.truth.periods.push_back(pt);

      for (int d : kFieldTestDistances) {
        const double eta = model_log_performance(config, d, lab.values, pt.mean_session_length, pt.band_time);
        const double noise = config.noise_sd > 0.0 ? config.noise_sd * rng.normal() : 0.0;
        out.field_tests.push_back({runner, p, d, std::exp(eta + noise)});
      }
    }
  }
  return out;
}

}  // namespace mrenet
