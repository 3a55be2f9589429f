#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "mrenet/error.hpp"
#include "mrenet/serialize.hpp"

using namespace mrenet;

TEST(FormatNumber, RoundTrips) {
  for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 123456789.123, 3.335000000000001}) {
    EXPECT_EQ(std::stod(io::format_number(x)), x);
  }
  EXPECT_EQ(io::format_number(0.5), "0.5");
  EXPECT_EQ(io::format_number(-0.0), "0");
}

TEST(Sessions, JsonLinesRoundTrip) {
  Session s;
  s.runner_id = "r1";
  s.session_id = "r1-0001";
  s.start = 1.5e9;
  s.offsets = {0.0, 1.0, 2.5};
  s.speeds = {0.0, 3.1, 1.0 / 3.0};
  std::stringstream io_stream;
  io::write_sessions(io_stream, std::vector<Session>{s, s});
  const auto back = io::read_sessions(io_stream);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].session_id, "r1-0001");
  EXPECT_EQ(back[0].start, s.start);
  EXPECT_EQ(back[0].offsets, s.offsets);
  EXPECT_EQ(back[0].speeds, s.speeds);
}

TEST(Sessions, ErrorsCarryLine) {
  std::istringstream in(
      "{\"runner_id\":\"a\",\"session_id\":\"a-1\",\"start\":0,\"duration\":1,\"records\":[[0,0],[1,2]]}\n"
      "{\"runner_id\":\"a\",\"session_id\":\"a-2\",\"start\":0,\"duration\":1,\"records\":[[0,0],[1,-2]]}\n");
  try {
    io::read_sessions(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream junk("{not json\n");
  EXPECT_THROW(io::read_sessions(junk), ParseError);
  std::istringstream missing("{\"runner_id\":\"a\"}\n");
  EXPECT_THROW(io::read_sessions(missing), ParseError);
}

TEST(Profiles, LongFormatIncludesBelowZeroRow) {
  TrainingDistributionProfile p;
  p.session_id = "a-0001";
  p.grid = SpeedGrid({0.0, 2.5});
  p.values = {600.0, 0.0};
  p.total_duration = 650.0;
  std::ostringstream o;
  io::write_profiles_csv(o, std::vector<TrainingDistributionProfile>{p});
  EXPECT_EQ(o.str(), "session_id,v,P\na-0001,-1,650\na-0001,0,600\na-0001,2.5,0\n");
}

TEST(PeriodSetJson, RoundTrip) {
  PeriodSet set;
  PeriodProfile p;
  p.runner_id = "a";
  p.period_index = 2;
  p.grid = SpeedGrid::base();
  p.values.assign(p.grid.size(), 0.0);
  p.values[0] = 10.0;
  p.mean_session_length = 12.0;
  p.session_count = 3;
  set.periods.push_back(p);
  set.uninformative.push_back({"b", 1});
  const auto back = io::period_set_from_json(nlohmann::json::parse(io::to_json(set).dump()));
  ASSERT_EQ(back.periods.size(), 1u);
  EXPECT_EQ(back.periods[0].values, p.values);
  EXPECT_TRUE(back.periods[0].grid == p.grid);
  EXPECT_EQ(back.periods[0].session_count, 3u);
  EXPECT_TRUE(back.is_uninformative("b", 1));
}

TEST(EquationJson, RoundTripAndValidation) {
  PredictiveEquation eq;
  eq.resolution = 95;
  eq.tau = 0.131;
  eq.alpha = 1.0568;
  eq.scalars = {{"height_m", 0.1007}};
  eq.intervals = {{5.26, 5.39, -0.0078}};
  const auto back = io::equation_from_json(io::to_json(eq));
  EXPECT_EQ(back.tau, eq.tau);
  EXPECT_EQ(back.scalars[0].name, "height_m");
  EXPECT_EQ(back.intervals[0].coefficient_per_minute, -0.0078);
  EXPECT_THROW(io::equation_from_json(nlohmann::json::parse(R"({"tau": -1, "alpha": 1})")), ArgumentError);
  EXPECT_THROW(io::equation_from_json(nlohmann::json::parse(R"({"alpha": 1})")), ArgumentError);
  EXPECT_THROW(io::equation_from_json(nlohmann::json::parse(
                   R"({"tau": 1, "alpha": 1, "intervals": [{"lower": 2, "upper": 1, "coefficient_per_minute": 0}]})")),
               ArgumentError);
}

TEST(ReportJson, InfiniteSurfaceValuesBecomeNull) {
  ResolutionReport r;
  ResolutionEntry e;
  e.resolution = 5;
  e.tuning.lambda2s = {0.0, 1.0};
  e.tuning.fractions = {1.0};
  e.tuning.surface = {{std::numeric_limits<double>::infinity()}, {0.25}};
  e.fit.names = {"x"};
  e.fit.naive = e.fit.rescaled = e.fit.standardized = Eigen::VectorXd::Zero(1);
  r.entries.push_back(e);
  const auto j = io::to_json(r);
  EXPECT_TRUE(j["resolutions"][0]["tuning"]["surface"][0][0].is_null());
  EXPECT_EQ(j["resolutions"][0]["tuning"]["surface"][1][0].get<double>(), 0.25);
  std::ostringstream csv;
  io::write_cv_surface_csv(csv, r);
  EXPECT_EQ(csv.str(), "resolution,lambda2,fraction,cv_error\n5,0,1,\n5,1,1,0.25\n");
}

TEST(PathCsv, LongFormat) {
  SolutionPath path;
  path.fractions = {0.0, 1.0};
  for (double v : {0.0, 2.0}) {
    ElasticNetFit f;
    f.names = {"a", "b"};
    f.standardized = Eigen::VectorXd::Constant(2, v);
    path.fits.push_back(f);
  }
  std::ostringstream o;
  io::write_path_csv(o, path);
  EXPECT_EQ(o.str(), "fraction,coefficient_name,value\n0,a,0\n0,b,0\n1,a,2\n1,b,2\n");
}
