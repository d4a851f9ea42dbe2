#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "qrsim/commands.hpp"
#include "qrsim/config.hpp"
#include "qrsim/csv_table.hpp"

using namespace qrsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kHeader =
    "t,crank_angle,crank_angle_unwrapped,w1z,L1x,L1y,L1z,FO1x,FO1y,FO1z,Tc,FA2x,FA2y,FA2z,"
    "rC3x,rC3y,rC3z,p3x,p3y,p3z,FO3x,FO3y,FO3z,rC5x,rC5y,rC5z,p5x,p5y,p5z,FC5x,FC5y,FC5z,"
    "R1_00,R1_01,R1_02,R1_10,R1_11,R1_12,R1_20,R1_21,R1_22,"
    "R4_00,R4_01,R4_02,R4_10,R4_11,R4_12,R4_20,R4_21,R4_22";

class Workdir : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("qrsim_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  RunConfig short_run() const
  {
    return parse_config(R"({"sim":{"t_end":0.02,"record_stride":100}})");
  }

  fs::path dir_;
};

std::string first_line(const std::string& text)
{
  return text.substr(0, text.find('\n'));
}

std::string error_path(const std::string& doc)
{
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

} // namespace

TEST(Config, EmptyDocumentGivesDefaults)
{
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.model.links.crank.mass, 0.5);
  EXPECT_EQ(c.model.links.rocker.lx, 0.7);
  EXPECT_EQ(c.model.couplings.k01.stiffness, 1e5);
  EXPECT_EQ(c.model.couplings.k01.damping, 20.0);
  EXPECT_EQ(c.model.couplings.k23r.stiffness, 100.0);
  EXPECT_EQ(c.model.couplings.k23r.damping, 0.5);
  EXPECT_EQ(c.model.drive.rate, 5.0);
  EXPECT_EQ(c.model.drive.stiffness, 100.0);
  EXPECT_EQ(c.model.drive.damping, 100.0);
  EXPECT_EQ(c.model.geometry.pivot_distance, 0.4);
  EXPECT_EQ(c.model.gravity, Vec3::Zero());
  EXPECT_FALSE(c.model.sliding_friction);
  EXPECT_EQ(c.sim.dt, 5e-6);
  EXPECT_EQ(c.sim.t_end, 10.0);
}

TEST(Config, OverrideTouchesOnlyItsKey)
{
  const RunConfig c = parse_config(R"({"drive":{"rate":10}})");
  const RunConfig d = parse_config("{}");
  EXPECT_EQ(c.model.drive.rate, 10.0);
  EXPECT_EQ(c.model.drive.stiffness, d.model.drive.stiffness);
  EXPECT_EQ(to_json(c)["geometry"], to_json(d)["geometry"]);
  EXPECT_EQ(to_json(c)["couplings"], to_json(d)["couplings"]);
}

TEST(Config, ErrorsNameTheOffendingKey)
{
  EXPECT_EQ(error_path(R"({"geometry":{"pivot_distance":0.1}})"), "/geometry");
  EXPECT_EQ(error_path(R"({"sim":{"dtt":1}})"), "/sim/dtt");
  EXPECT_EQ(error_path(R"({"links":{"crank":{"mass":-1}}})"), "/links/crank/mass");
  EXPECT_EQ(error_path(R"({"couplings":{"01":{"K":"stiff"}}})"), "/couplings/01/K");
  EXPECT_EQ(error_path(R"({"sim":{"record_stride":1.5}})"), "/sim/record_stride");
  EXPECT_EQ(error_path(R"({"gravity":[0,1]})"), "/gravity");
  EXPECT_EQ(error_path(R"({"sliding_friction":1})"), "/sliding_friction");
  EXPECT_EQ(error_path("{not json"), "");
  EXPECT_EQ(error_path("[]"), "");
}

TEST(Config, ResolvedFormRoundTrips)
{
  const RunConfig c = parse_config(
      R"({"gravity":[0,-9.81,0],"sliding_friction":true,"couplings":{"5C":{"K":2e5,"R":3}},
          "output":{"csv":"x.csv"}})");
  const RunConfig again = parse_config(to_json(c).dump());
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_EQ(again.csv_path, "x.csv");
  EXPECT_EQ(again.model.couplings.k5c.stiffness, 2e5);
}

TEST(CsvFormat, NumbersRoundTripBitExactly)
{
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) {
      continue;
    }
    const CsvTable t = parse_csv("x\n" + format_number(v) + "\n");
    double back = t.column("x").front();
    EXPECT_EQ(std::memcmp(&back, &v, sizeof v), 0) << format_number(v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(500.0), "500");
}

TEST(CsvFormat, ParserReportsLineNumbers)
{
  try {
    parse_csv("a,b\n1,2\n3,x\n");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_csv("a,b\n1\n"), std::runtime_error);
  EXPECT_THROW(parse_csv("a\n1,2\n"), std::runtime_error);
  EXPECT_THROW(parse_csv(""), std::runtime_error);
  EXPECT_THROW(parse_csv("a\n1\n").column("b"), std::out_of_range);
}

TEST_F(Workdir, RunWritesHeaderInitialRowAndSidecar)
{
  const fs::path csv = path("run.csv");
  const RunSummary s = run_simulation(short_run(), csv);
  EXPECT_EQ(s.steps, 4000);
  EXPECT_EQ(s.rows, 41u);

  const std::string text = read_file(csv);
  EXPECT_EQ(first_line(text), kHeader);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const CsvTable t = parse_csv(text);
  EXPECT_EQ(t.names.size(), 50u);
  EXPECT_EQ(t.rows(), 41u);
  EXPECT_EQ(t.column("t")[0], 0.0);
  EXPECT_EQ(t.column("w1z")[0], 0.0);
  EXPECT_EQ(t.column("Tc")[0], 500.0);
  for (const char* f : {"FO1", "FA2", "FO3", "FC5"}) {
    for (const char* axis : {"x", "y", "z"}) {
      // Assembly is exact up to round-off in the link headings.
      EXPECT_LE(std::abs(t.column(std::string(f) + axis)[0]), 1e-9) << f << axis;
    }
  }
  for (std::size_t i = 1; i < t.rows(); ++i) {
    EXPECT_GT(t.column("t")[i], t.column("t")[i - 1]);
  }

  const json meta = json::parse(read_file(meta_path_for(csv)));
  EXPECT_EQ(meta["kind"], "run");
  EXPECT_EQ(meta["columns"].size(), 50u);
  EXPECT_EQ(meta["columns"][7]["name"], "FO1x");
  EXPECT_EQ(meta["columns"][7]["unit"], "N");
  EXPECT_TRUE(meta.contains("sign_convention"));
  EXPECT_EQ(meta["config"]["sim"]["t_end"], 0.02);
  EXPECT_EQ(meta["config"]["drive"]["R"], 100.0);
}

TEST_F(Workdir, RerunIsByteIdentical)
{
  run_simulation(short_run(), path("a.csv"));
  run_simulation(short_run(), path("b.csv"));
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
}

TEST_F(Workdir, AnalyzeRefusesCsvWithoutSidecar)
{
  write_file_atomic(path("bare.csv"), "t,rC5x\n0,0\n1,1\n");
  EXPECT_THROW(analyze_csv(path("bare.csv"), 0.0), std::runtime_error);
}

TEST_F(Workdir, AnalyzeOracleCsvAndLeaveItUntouched)
{
  const QrmGeometry g;
  write_oracle_csv(g, 5.0, 3600, 3, path("oracle.csv"));
  const std::string before = read_file(path("oracle.csv"));
  const json report = analyze_csv(path("oracle.csv"), 0.0);
  EXPECT_EQ(read_file(path("oracle.csv")), before);
  EXPECT_NEAR(report["time_ratio"].get<double>(), 2.0, 0.01);
  EXPECT_NEAR(report["theoretical_time_ratio"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(report["stroke_length_m"].get<double>(), 0.7, 1e-3);
  for (const char* key : {"forward_duration_s", "return_duration_s", "time_ratio",
                          "theoretical_time_ratio", "stroke_length_m", "reversal_times_s"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_NE(report_summary(report).find("time ratio"), std::string::npos);
}

TEST_F(Workdir, AnalyzeSineCsv)
{
  std::string text = "t,rC5x\n";
  for (int k = 0; k <= 10000; ++k) {
    const double t = k * 1e-3;
    text += format_number(t) + "," + format_number(0.35 * std::sin(5 * t)) + "\n";
  }
  write_file_atomic(path("sine.csv"), text);
  const json meta = {{"kind", "run"},
                     {"slider_channel", "rC5x"},
                     {"config", to_json(parse_config("{}"))}};
  write_file_atomic(path("sine.meta.json"), meta.dump());
  EXPECT_NEAR(analyze_csv(path("sine.csv"), 0.0)["time_ratio"].get<double>(), 1.0, 1e-6);
}

TEST_F(Workdir, OracleGrid)
{
  const QrmGeometry g = QrmGeometry{};
  write_oracle_csv(g, 5.0, 2, 1, path("o2.csv"));
  const CsvTable t2 = read_csv(path("o2.csv"));
  ASSERT_EQ(t2.rows(), 2u);
  EXPECT_EQ(t2.column("theta")[0], g.initial_crank_angle);
  EXPECT_NEAR(t2.column("theta")[1], g.initial_crank_angle + std::numbers::pi, 1e-15);

  QrmGeometry vertical;
  vertical.initial_crank_angle = std::numbers::pi / 2;
  write_oracle_csv(vertical, 5.0, 4, 1, path("o4.csv"));
  EXPECT_NEAR(read_csv(path("o4.csv")).column("slider_x")[0], 0.4, 1e-15);
  // Default start (1.5708 rad) is 3.7e-6 rad past vertical.
  write_oracle_csv(g, 5.0, 4, 1, path("o4d.csv"));
  EXPECT_NEAR(read_csv(path("o4d.csv")).column("slider_x")[0], 0.4, 1e-5);

  write_oracle_csv(g, 5.0, 100000, 1, path("full.csv"));
  const auto& x = read_csv(path("full.csv")).column("slider_x");
  EXPECT_NEAR(*std::min_element(x.begin(), x.end()), 0.03886, 1e-5);
  EXPECT_NEAR(*std::max_element(x.begin(), x.end()), 0.73886, 1e-5);

  EXPECT_THROW(write_oracle_csv(g, 5.0, 1, 1, path("bad.csv")), std::invalid_argument);
}

TEST_F(Workdir, PlotWritesSvgWithUnits)
{
  write_oracle_csv(QrmGeometry{}, 5.0, 360, 1, path("o.csv"));
  plot_csv(path("o.csv"), {"slider_x", "tip_x"}, "theta", path("o.svg"));
  const std::string svg = read_file(path("o.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("theta [rad]"), std::string::npos);
  EXPECT_NE(svg.find("slider_x, tip_x [m]"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);

  EXPECT_THROW(plot_csv(path("o.csv"), {}, "t", path("e.svg")), std::invalid_argument);
  EXPECT_THROW(plot_csv(path("o.csv"), {"nope"}, "t", path("e.svg")), std::out_of_range);
  EXPECT_FALSE(fs::exists(path("e.svg")));
}
