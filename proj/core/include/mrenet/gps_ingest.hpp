#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace mrenet {

/// One timestamped cumulative-distance measurement.
struct GpsRecord {
  std::string runner_id;
  double timestamp = 0.0;            // seconds
  double cumulative_distance = 0.0;  // metres, >= 0
};

/// Non-fatal anomalies found while reading a record stream.
struct IngestWarnings {
  std::size_t duplicates_removed = 0;      // identical (runner, timestamp, distance)
  std::size_t conflicting_timestamps = 0;  // same timestamp, different distance; later row dropped
  std::size_t distance_resets = 0;         // cumulative distance went down; becomes a session boundary
};

struct ParsedRecords {
  std::vector<GpsRecord> records;
  IngestWarnings warnings;
};

/// Reads `runner_id,timestamp_s,cumulative_distance_m`.
///
/// Records come back grouped by runner (runners in order of first appearance,
/// rows in input order within a runner). Malformed rows, negative distances and
/// timestamps that go backwards within a runner raise ParseError with the line.
ParsedRecords parse_records(std::istream& in);

struct SegmentOptions {
  double gap_threshold = 1800.0;  // seconds; a larger gap starts a new session
  double min_duration = 300.0;    // seconds; shorter sessions are discarded
};

/// A training session. `offsets` are re-based to the first record (T_1 = 0).
/// `distances` is available straight after segmentation; `speeds` is filled by
/// compute_speed_profile (and is all that survives serialization).
struct Session {
  std::string runner_id;
  std::string session_id;
  double start = 0.0;
  std::vector<double> offsets;
  std::vector<double> distances;
  std::vector<double> speeds;

  std::size_t size() const noexcept { return offsets.size(); }
  double duration() const noexcept { return offsets.empty() ? 0.0 : offsets.back(); }
  bool has_speeds() const noexcept { return !offsets.empty() && speeds.size() == offsets.size(); }
};

/// Splits each runner's stream into sessions. A new session starts after a
/// time gap strictly greater than `gap_threshold` or when the cumulative
/// distance decreases (device reset). Sessions with fewer than two records or
/// shorter than `min_duration` are dropped. Session ids are
/// `<runner>-<nnnn>`, numbered from 1 over the kept sessions of each runner.
std::vector<Session> segment_sessions(std::span<const GpsRecord> records,
                                      const SegmentOptions& options = {});

/// Computes speeds from consecutive records, V_j = dD / dT, with V_1 = 0.
/// Where two records are more than `max_sampling_gap` apart, zero-speed records
/// are inserted every `max_sampling_gap` seconds so the stationary time is
/// counted at speed zero; the record closing the gap keeps the mean speed over
/// the whole gap.
Session compute_speed_profile(const Session& session, double max_sampling_gap = 10.0);

/// Re-flattens sessions to records (start + offset), e.g. to re-segment them.
std::vector<GpsRecord> to_records(std::span<const Session> sessions);

}  // namespace mrenet
