#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "mrenet/error.hpp"

using namespace mrenet;
using namespace mrenet::cli;

int main(int argc, char** argv) {
  CLI::App app{"Multi-resolution elastic net for training-distribution performance models"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags override it");

  RunConfig cfg;
  std::string resolutions;
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--gap-threshold", cfg.gap_threshold, "Gap (s) that starts a new session")->capture_default_str();
  app.add_option("--min-session", cfg.min_session, "Shortest kept session (s)")->capture_default_str();
  app.add_option("--max-sampling-gap", cfg.max_sampling_gap, "Zero-speed imputation spacing (s)")
      ->capture_default_str();
  app.add_option("--resolutions", resolutions, "Resolutions G: list '5,10' or range '5:125:5' (default 5:125:5)");
  app.add_option("--lambda2-grid", cfg.lambda2_grid, "Ridge weights to tune over")->delimiter(',');
  app.add_option("--fractions", cfg.fractions, "L1-norm fractions to tune over")->delimiter(',');
  app.add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
  app.add_option("--repeats", cfg.repeats, "Cross-validation repeats")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for splits, folds and simulation")->capture_default_str();
  app.add_option("--test-runners", cfg.test_runners, "Runners held out for resolution selection")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads for cross-validation")->capture_default_str();
  app.add_option("--min-period-sessions", cfg.min_period_sessions, "Sessions needed for an informative period")
      ->capture_default_str();
  app.add_option("--clean-speed", cfg.clean_speed, "Cleaning speed (m/s)")->capture_default_str();
  app.add_option("--clean-seconds", cfg.clean_seconds, "Drop sessions with more time above the cleaning speed")
      ->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "GPS records CSV -> sessions JSONL");
  ingest->add_option("records", cfg.records, "runner_id,timestamp_s,cumulative_distance_m CSV")->required();

  auto* profile = app.add_subcommand("profile", "sessions JSONL -> profiles CSV and periods JSON");
  profile->add_option("sessions", cfg.sessions, "Sessions JSONL from `ingest`")->required();
  profile->add_option("--periods", cfg.period_windows, "runner_id,period_index,start_s,end_s CSV")->required();

  auto* fit = app.add_subcommand("fit", "study CSVs + periods JSON -> resolution report");
  fit->add_option("--field-tests", cfg.field_tests, "Field-test CSV")->required();
  fit->add_option("--labs", cfg.lab_results, "Lab-result CSV")->required();
  fit->add_option("--period-profiles", cfg.period_profiles, "periods.json from `profile`")->required();

  auto* pred = app.add_subcommand("predict", "Evaluate a predictive equation (prints seconds)");
  pred->add_option("equation", cfg.equation, "equation.json from `fit`")->required();
  pred->add_option("covariates", cfg.covariates, "Covariate JSON")->required();

  auto* sim = app.add_subcommand("simulate", "Write a synthetic study with planted parameters");
  auto& s = cfg.synth;
  sim->add_option("--runners", s.runner_count)->capture_default_str();
  sim->add_option("--periods", s.periods_per_runner)->capture_default_str();
  sim->add_option("--sessions-min", s.sessions_min)->capture_default_str();
  sim->add_option("--sessions-max", s.sessions_max)->capture_default_str();
  sim->add_option("--sample-interval", s.sample_interval)->capture_default_str();
  sim->add_option("--tau", s.tau)->capture_default_str();
  sim->add_option("--alpha", s.alpha)->capture_default_str();
  sim->add_option("--delta0", s.delta0)->capture_default_str();
  sim->add_option("--band-lower", s.delta_lower)->capture_default_str();
  sim->add_option("--band-upper", s.delta_upper)->capture_default_str();
  sim->add_option("--band-magnitude", s.delta_magnitude, "Planted effect per second in the band")
      ->capture_default_str();
  sim->add_option("--noise-sd", s.noise_sd, "Noise sd on the log scale")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!resolutions.empty()) cfg.resolutions = parse_resolutions(resolutions);
    cfg.synth.seed = cfg.seed;
    if (*ingest) {
      const auto r = cmd_ingest(cfg);
      std::printf("%zu records -> %zu sessions (duplicates %zu, conflicts %zu, distance resets %zu)\n", r.records,
                  r.sessions, r.warnings.duplicates_removed, r.warnings.conflicting_timestamps,
                  r.warnings.distance_resets);
    } else if (*profile) {
      const auto r = cmd_profile(cfg);
      std::printf("%zu sessions kept, %zu dropped; %zu periods, %zu uninformative\n", r.sessions, r.dropped,
                  r.periods, r.uninformative);
    } else if (*fit) {
      const auto r = cmd_fit(cfg);
      std::printf("selected G = %d\n", r.selected_resolution);
      std::cout << render_equation(r.equation);
    } else if (*pred) {
      std::printf("%.17g\n", cmd_predict(cfg));
    } else if (*sim) {
      const auto r = cmd_simulate(cfg);
      std::printf("%zu records, %zu field tests\n", r.records.size(), r.field_tests.size());
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 3;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
