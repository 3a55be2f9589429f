#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrenet/multires.hpp"
#include "mrenet/synth.hpp"

namespace mrenet::cli {

namespace fs = std::filesystem;

struct RunConfig {
  // inputs
  fs::path records;          // raw GPS CSV (ingest)
  fs::path sessions;         // sessions JSONL (profile)
  fs::path period_windows;   // period windows CSV (profile)
  fs::path period_profiles;  // periods JSON (fit)
  fs::path field_tests;      // field-test CSV (fit)
  fs::path lab_results;      // lab CSV (fit)
  fs::path equation;         // equation JSON (predict)
  fs::path covariates;       // covariate JSON (predict)
  fs::path out = ".";

  double gap_threshold = 1800.0;
  double min_session = 300.0;
  double max_sampling_gap = 10.0;
  double clean_speed = 8.0;
  double clean_seconds = 125.0;
  std::size_t min_period_sessions = 2;

  std::vector<int> resolutions = MultiresOptions::default_resolutions();
  std::vector<double> lambda2_grid = TuningGrid::defaults().lambda2s;
  std::vector<double> fractions = TuningGrid::defaults().fractions;
  std::size_t folds = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 20160101;
  std::size_t test_runners = 4;
  std::size_t threads = 1;

  SynthConfig synth;

  /// Resolution set non-empty, unique, and every G's endpoints on the grid.
  void validate_resolutions() const;
};

/// Parses "5,10,20" or an inclusive range "5:125:5".
std::vector<int> parse_resolutions(const std::string& text);

std::string sha256_hex(const fs::path& file);
std::string sha256_hex_bytes(const std::string& bytes);

/// Writes `<out>/manifest_<command>.json` with the canonical config, its hash,
/// and SHA-256 digests of every input and output.
void write_manifest(const fs::path& out, const std::string& command, const nlohmann::json& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs);

struct IngestSummary {
  std::size_t records = 0;
  std::size_t sessions = 0;
  IngestWarnings warnings;
};
IngestSummary cmd_ingest(const RunConfig& config);

struct ProfileSummary {
  std::size_t sessions = 0;
  std::size_t dropped = 0;
  std::size_t periods = 0;
  std::size_t uninformative = 0;
};
ProfileSummary cmd_profile(const RunConfig& config);

ResolutionReport cmd_fit(const RunConfig& config);

/// Covariate JSON: {"distance_m": D, "scalars": {name: value}, "interval_minutes": [..]}.
double cmd_predict(const RunConfig& config);

SyntheticStudy cmd_simulate(const RunConfig& config);

}  // namespace mrenet::cli
