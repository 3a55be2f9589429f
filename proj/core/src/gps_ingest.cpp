#include "mrenet/gps_ingest.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string_view>

#include "mrenet/csv.hpp"
#include "mrenet/error.hpp"

namespace mrenet {

namespace {
constexpr std::array<std::string_view, 3> kHeader = {"runner_id", "timestamp_s", "cumulative_distance_m"};

std::string session_name(const std::string& runner, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return runner + "-" + buf;
}
}  // namespace

ParsedRecords parse_records(std::istream& in) {
  csv::Reader reader(in, kHeader);
  ParsedRecords out;

  std::vector<std::string> runner_order;
  std::map<std::string, std::vector<GpsRecord>> by_runner;

  while (auto row = reader.next()) {
    auto& fields = *row;
    if (fields[0].empty()) throw ParseError(reader.line(), "empty runner_id");
    GpsRecord rec{fields[0], reader.number(fields[1], kHeader[1]), reader.number(fields[2], kHeader[2])};
    if (rec.cumulative_distance < 0.0) {
      throw ParseError(reader.line(), "negative cumulative distance");
    }

    auto [it, inserted] = by_runner.try_emplace(rec.runner_id);
    if (inserted) runner_order.push_back(rec.runner_id);
    auto& stream = it->second;

    if (!stream.empty()) {
      const GpsRecord& last = stream.back();
      if (rec.timestamp < last.timestamp) {
        throw ParseError(reader.line(), "timestamp decreases for runner '" + rec.runner_id + "'");
      }
      if (rec.timestamp == last.timestamp) {
        if (rec.cumulative_distance == last.cumulative_distance) {
          ++out.warnings.duplicates_removed;
        } else {
          ++out.warnings.conflicting_timestamps;
        }
        continue;
      }
      if (rec.cumulative_distance < last.cumulative_distance) ++out.warnings.distance_resets;
    }
    stream.push_back(std::move(rec));
  }

  for (const auto& runner : runner_order) {
    auto& stream = by_runner[runner];
    std::move(stream.begin(), stream.end(), std::back_inserter(out.records));
  }
  return out;
}

std::vector<Session> segment_sessions(std::span<const GpsRecord> records, const SegmentOptions& options) {
  if (!(options.gap_threshold > 0.0)) throw ArgumentError("gap_threshold must be positive");
  if (options.min_duration < 0.0) throw ArgumentError("min_duration must be non-negative");

  std::vector<const GpsRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const GpsRecord* a, const GpsRecord* b) {
    if (a->runner_id != b->runner_id) return a->runner_id < b->runner_id;
    return a->timestamp < b->timestamp;
  });
  // keep the first of several records sharing (runner, timestamp)
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const GpsRecord* a, const GpsRecord* b) {
                             return a->runner_id == b->runner_id && a->timestamp == b->timestamp;
                           }),
               sorted.end());

  std::vector<Session> sessions;
  std::map<std::string, std::size_t> kept_per_runner;

  auto flush = [&](std::size_t first, std::size_t last) {
    if (last - first < 2) return;
    const double start = sorted[first]->timestamp;
    const double duration = sorted[last - 1]->timestamp - start;
    if (duration < options.min_duration) return;
    Session s;
    s.runner_id = sorted[first]->runner_id;
    s.session_id = session_name(s.runner_id, ++kept_per_runner[s.runner_id]);
    s.start = start;
    s.offsets.reserve(last - first);
    s.distances.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
      s.offsets.push_back(sorted[i]->timestamp - start);
      s.distances.push_back(sorted[i]->cumulative_distance);
    }
    sessions.push_back(std::move(s));
  };

  std::size_t first = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    bool boundary = i == sorted.size();
    if (!boundary) {
      const GpsRecord& prev = *sorted[i - 1];
      const GpsRecord& cur = *sorted[i];
      boundary = cur.runner_id != prev.runner_id ||
                 cur.timestamp - prev.timestamp > options.gap_threshold ||
                 cur.cumulative_distance < prev.cumulative_distance;
    }
    if (boundary) {
      flush(first, i);
      first = i;
    }
  }
  return sessions;
}

Session compute_speed_profile(const Session& session, double max_sampling_gap) {
  if (!(max_sampling_gap > 0.0)) throw ArgumentError("max_sampling_gap must be positive");
  const std::size_t n = session.offsets.size();
  if (n < 2) {
    throw DegenerateSessionError("session '" + session.session_id + "' has fewer than 2 records");
  }
  if (session.distances.size() != n) {
    throw ArgumentError("session '" + session.session_id + "' has no distances to differentiate");
  }

  Session out;
  out.runner_id = session.runner_id;
  out.session_id = session.session_id;
  out.start = session.start;
  out.offsets.reserve(n);
  out.distances.reserve(n);
  out.speeds.reserve(n);

  out.offsets.push_back(session.offsets[0]);
  out.distances.push_back(session.distances[0]);
  out.speeds.push_back(0.0);

  for (std::size_t j = 1; j < n; ++j) {
    const double t0 = session.offsets[j - 1];
    const double t1 = session.offsets[j];
    const double d0 = session.distances[j - 1];
    const double d1 = session.distances[j];
    const double dt = t1 - t0;
    if (!(dt > 0.0)) {
      throw ArgumentError("session '" + session.session_id + "': offsets must strictly increase");
    }
    if (d1 < d0) {
      throw ArgumentError("session '" + session.session_id + "': cumulative distance decreases");
    }
    if (dt > max_sampling_gap) {
      for (std::size_t k = 1;; ++k) {
        const double t = t0 + static_cast<double>(k) * max_sampling_gap;
        if (!(t < t1)) break;
        out.offsets.push_back(t);
        out.distances.push_back(d0);
        out.speeds.push_back(0.0);
      }
    }
    out.offsets.push_back(t1);
    out.distances.push_back(d1);
    out.speeds.push_back((d1 - d0) / dt);
  }
  return out;
}

std::vector<GpsRecord> to_records(std::span<const Session> sessions) {
  std::vector<GpsRecord> out;
  for (const auto& s : sessions) {
    for (std::size_t j = 0; j < s.offsets.size(); ++j) {
      out.push_back({s.runner_id, s.start + s.offsets[j], j < s.distances.size() ? s.distances[j] : 0.0});
    }
  }
  return out;
}

}  // namespace mrenet
