#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mrenet/gps_ingest.hpp"
#include "mrenet/profile.hpp"
#include "mrenet/study.hpp"

namespace mrenet {

/// Parameters of a synthetic study drawn from the multiplicative model
///   Y = tau D^alpha exp(gamma'l + delta0 tbar + delta * band_time) exp(eps),
/// where band_time is the period-average time spent in (delta_lower, delta_upper].
struct SynthConfig {
  int runner_count = 10;
  int periods_per_runner = 4;
  int sessions_min = 6;
  int sessions_max = 10;
  int period_days = 28;
  double sample_interval = 1.0;  // seconds between GPS fixes

  double tau = 0.131;
  double alpha = 1.05;
  std::array<double, kLabCovariateCount> gamma = {0.002, 0.004, 0.001, -0.003, -0.004, 0.0006, 0.05, -0.03};
  double delta0 = -1e-5;  // per second of mean session length
  double delta_lower = 5.3;
  double delta_upper = 5.7;
  double delta_magnitude = -4e-4;  // per second in the band
  double noise_sd = 0.01;          // on the log scale

  double interval_session_share = 0.6;
  double pause_share = 0.4;  // share of recoveries with the device auto-paused

  std::uint64_t seed = 1;

  void validate() const;
};

/// Constant-speed stretch of a session. Unrecorded stretches are auto-pause
/// gaps: the device logs nothing until the runner moves on.
struct SpeedSegment {
  double speed = 0.0;
  double duration = 0.0;
  bool recorded = true;
};

struct SessionTruth {
  std::string runner_id;
  int period_index = 0;
  double start = 0.0;
  double end = 0.0;
  std::vector<SpeedSegment> segments;
};

struct PeriodTruth {
  std::string runner_id;
  int period_index = 0;
  double mean_session_length = 0.0;
  double band_time = 0.0;  // mean time in (delta_lower, delta_upper]
  std::size_t session_count = 0;
};

struct GroundTruth {
  SynthConfig config;
  std::vector<SessionTruth> sessions;
  std::vector<PeriodTruth> periods;
};

struct SyntheticStudy {
  std::vector<GpsRecord> records;
  std::vector<PeriodWindow> periods;
  std::vector<LabResult> lab_results;
  std::vector<FieldTest> field_tests;
  GroundTruth truth;
};

SyntheticStudy generate(const SynthConfig& config);

/// Time a planned session spends strictly above `v` (its duration for v < 0).
double true_profile_value(const SessionTruth& session, double v);
TrainingDistributionProfile true_profile(const SessionTruth& session, const SpeedGrid& grid);

/// Noiseless log performance of the model for one field test.
double model_log_performance(const SynthConfig& config, int distance_m,
                             const std::array<double, kLabCovariateCount>& lab, double mean_session_length,
                             double band_time);

}  // namespace mrenet
