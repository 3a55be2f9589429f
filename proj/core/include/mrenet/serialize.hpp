#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrenet/elasticnet.hpp"
#include "mrenet/gps_ingest.hpp"
#include "mrenet/multires.hpp"
#include "mrenet/profile.hpp"
#include "mrenet/study.hpp"
#include "mrenet/synth.hpp"

namespace mrenet::io {

using nlohmann::json;

/// Shortest decimal that reads back to the same double.
std::string format_number(double x);

// Input CSVs, in the schemas the parsers accept.
void write_records_csv(std::ostream& out, std::span<const GpsRecord> records);
void write_field_tests_csv(std::ostream& out, std::span<const FieldTest> tests);
void write_lab_results_csv(std::ostream& out, std::span<const LabResult> labs);
void write_period_windows_csv(std::ostream& out, std::span<const PeriodWindow> windows);

/// One JSON object per line:
/// {"runner_id","session_id","start","duration","records":[[T,V],...]}.
void write_sessions(std::ostream& out, std::span<const Session> sessions);
/// Reads sessions written by write_sessions; ParseError names the line.
std::vector<Session> read_sessions(std::istream& in);

/// Long format `session_id,v,P`, starting with the v = -1 row (P = t_u).
void write_profiles_csv(std::ostream& out, std::span<const TrainingDistributionProfile> profiles);

json to_json(const PeriodSet& periods);
PeriodSet period_set_from_json(const json& j);

json to_json(const PredictiveEquation& equation);
PredictiveEquation equation_from_json(const json& j);

json to_json(const ResolutionReport& report);

/// resolution,name,naive,rescaled,standardized for every G.
void write_coefficients_csv(std::ostream& out, const ResolutionReport& report);
/// Test error per G with its normal-theory 95% band.
void write_test_errors_csv(std::ostream& out, const ResolutionReport& report);
/// resolution,lambda2,fraction,cv_error; empty cv_error where undefined.
void write_cv_surface_csv(std::ostream& out, const ResolutionReport& report);
/// `fraction,coefficient_name,value` with standardized naive coefficients.
void write_path_csv(std::ostream& out, const SolutionPath& path);

json to_json(const GroundTruth& truth);

}  // namespace mrenet::io
