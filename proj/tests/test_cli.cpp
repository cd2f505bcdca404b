#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;
using stlstar::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "stlstar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("stlstar_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string config(const std::string& name, const std::string& text) {
    auto path = dir / name;
    std::ofstream(path) << text;
    return path.string();
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static std::string field(const std::string& text, const std::string& key) {
    auto at = text.find(key + ": ");
    if (at == std::string::npos) return {};
    auto end = text.find('\n', at);
    return text.substr(at + key.size() + 2, end - at - key.size() - 2);
  }

  fs::path dir;
};

const char* kSir = R"j({"model": "sir", "params": {"alpha": 0.03, "beta": 0.4}, "step": 0.01, "horizon": 10})j";

}  // namespace

TEST_F(Cli, MonitorSignMatchesBooleanSatisfaction) {
  auto cfg = config("sir.json", kSir);
  auto r = invoke({"monitor", "--config", cfg, "--formula", "F[1,5](I >= 50)"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double rho = std::stod(field(r.out, "robustness"));
  const std::string sat = field(r.out, "satisfied");
  EXPECT_NE(rho, 0.0);
  EXPECT_EQ(sat, rho > 0 ? "true" : "false");
  EXPECT_EQ(field(r.out, "optimized"), "F[1, 5](I >= 50)");

  auto seq = stlstar::integrate(stlstar::sir_model(), {95, 5, 0}, {0.03, 0.4}, 0.01, 10);
  EXPECT_EQ(field(r.out, "robustness"), stlstar::format_robustness(stlstar::monitor(stlstar::parse("F[1,5](I >= 50)"), seq)));
}

TEST_F(Cli, MonitorTrueFormula) {
  auto cfg = config("sir.json", kSir);
  auto r = invoke({"monitor", "--config", cfg, "--formula", "true"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "robustness"), "inf");
  EXPECT_EQ(field(r.out, "satisfied"), "true");
}

TEST_F(Cli, MonitorTooShortHorizon) {
  auto cfg = config("short.json", R"j({"model": "sir", "step": 0.01, "horizon": 1})j");
  auto r = invoke({"monitor", "--config", cfg, "--formula", "F[1,5](I >= 50)"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(field(r.out, "satisfied"), "false");
  EXPECT_NE(r.err.find("input length 5"), std::string::npos) << r.err;
}

TEST_F(Cli, MonitorDefaultsHorizonToFormulaLength) {
  auto cfg = config("nohorizon.json", R"j({"model": "sir", "step": 0.1})j");
  auto r = invoke({"monitor", "--config", cfg, "--formula", "F[1,5](I >= 50)"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, MonitorRecordedTrajectory) {
  auto path = dir / "trajectory.csv";
  {
    std::ofstream out(path);
    out << "time,x\n0,0\n1,5\n2,9\n";
  }
  auto r = invoke({"monitor", "--trajectory", path.string(), "--formula", "*F[0,2](x >= x* + 8)"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "satisfied"), "true");
  EXPECT_EQ(field(r.out, "robustness"), "0.5");
}

TEST_F(Cli, ParseAndConfigErrors) {
  auto cfg = config("sir.json", kSir);
  EXPECT_EQ(invoke({"monitor", "--config", cfg, "--formula", "I == 3"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", cfg, "--formula", "F[5,1](I >= 3)"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", cfg}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", (dir / "missing.json").string(), "--formula", "true"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", config("bad.json", "{not json"), "--formula", "true"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", config("k.json", R"j({"modle": "sir"})j"), "--formula", "true"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", config("m.json", R"j({"model": "foo"})j"), "--formula", "true"}).code, 2);
  EXPECT_EQ(invoke({"monitor", "--config", config("s.json", R"j({"model": "sir", "step": -1})j"), "--formula", "true"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST_F(Cli, SimulationFailureIsARuntimeError) {
  auto cfg = config("blow.json", R"j({"model": {"variables": ["x"], "rhs": {"x": "x*x"}, "init": {"x": 1}},
                                     "step": 0.01, "horizon": 3})j");
  auto r = invoke({"monitor", "--config", cfg, "--formula", "x >= 0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("diverged"), std::string::npos);
}

TEST_F(Cli, SweepWritesCsvAndSvg) {
  auto cfg = config("sweep.json", R"j({
    "model": "sir",
    "space": {"axes": [{"name": "alpha", "lo": 0.005, "hi": 0.06, "resolution": 4},
                       {"name": "beta", "lo": 0.05, "hi": 1.2, "resolution": 4}],
              "iterations": 1},
    "formula": "F[1,5](I >= 50)", "step": 0.05, "horizon": 10})j");
  auto out = dir / "run";
  auto r = invoke({"sweep", "--config", cfg, "--out", out.string(), "--workers", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "sweep.csv"));
  EXPECT_TRUE(fs::exists(out / "sweep.svg"));
  EXPECT_EQ(field(r.out, "formula size"), "2");
  EXPECT_EQ(field(r.out, "points per trajectory"), "201");
  const auto trajectories = std::stoul(field(r.out, "trajectories"));
  EXPECT_GE(trajectories, 16u);
  EXPECT_EQ(std::stoul(field(r.out, "positive")) + std::stoul(field(r.out, "negative")), trajectories);
  EXPECT_FALSE(field(r.out, "time").empty());
  EXPECT_NE(r.err.find("[sweep]"), std::string::npos);

  // Same configuration and seed: byte-identical CSV, whatever the worker count.
  auto again = dir / "again";
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--out", again.string(), "--workers", "1"}).code, 0);
  EXPECT_EQ(read(out / "sweep.csv"), read(again / "sweep.csv"));
}

TEST_F(Cli, SweepPlainGridRowCount) {
  auto cfg = config("grid.json", R"j({
    "model": "sir",
    "space": {"axes": [{"name": "alpha", "lo": 0.01, "hi": 0.05, "resolution": 2},
                       {"name": "beta", "lo": 0.1, "hi": 0.5, "resolution": 2}],
              "iterations": 0},
    "formula": "F[1,5](I >= 50)", "step": 0.1, "horizon": 10})j");
  ASSERT_EQ(invoke({"sweep", "--config", cfg, "--out", dir.string()}).code, 0);
  auto csv = read(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(Cli, SweepInvalidRange) {
  auto cfg = config("bad.json", R"j({
    "model": "sir",
    "space": {"axes": [{"name": "alpha", "lo": 0.05, "hi": 0.01, "resolution": 3}]},
    "formula": "F[1,5](I >= 50)", "horizon": 10})j");
  EXPECT_EQ(invoke({"sweep", "--config", cfg, "--out", dir.string()}).code, 2);
}

TEST_F(Cli, SweepTooShortHorizon) {
  auto cfg = config("short.json", R"j({
    "model": "sir",
    "space": {"axes": [{"name": "alpha", "lo": 0.01, "hi": 0.05, "resolution": 2}]},
    "formula": "F[1,5](I >= 50)", "horizon": 2})j");
  auto r = invoke({"sweep", "--config", cfg, "--out", dir.string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("input length 5"), std::string::npos);
}

TEST_F(Cli, OptimizeReportsIndexCounts) {
  auto r = invoke({"optimize", "--formula", "G[0,5](*1 !*2 F[0,1](x*1 + x*2 >= x))", "--explain"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(field(r.out, "indices"), "2 -> 1");
  EXPECT_NE(r.out.find("pass merge_consecutive_freezes"), std::string::npos);

  EXPECT_EQ(field(invoke({"optimize", "--formula", "F[1,5](I >= 50 && *G[0.25,5](I* >= I))"}).out, "indices"), "1 -> 1");
  EXPECT_EQ(field(invoke({"optimize", "--formula", "F[0,1](x >= 0)"}).out, "indices"), "0 -> 0");
  EXPECT_EQ(invoke({"optimize", "--formula", "F[0,1](x >= "}).code, 2);
}

TEST_F(Cli, SimulateWritesTrajectory) {
  auto cfg = config("lv.json", R"j({"model": "lotka_volterra", "step": 0.5, "horizon": 20})j");
  auto r = invoke({"simulate", "--config", cfg, "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto seq = stlstar::read_csv((dir / "trajectory.csv").string());
  EXPECT_EQ(seq.names(), (std::vector<std::string>{"X", "Y"}));
  EXPECT_EQ(seq.size(), 41u);
  EXPECT_EQ(seq.value(0, 0), 80.0);

  auto to_stdout = invoke({"simulate", "--config", cfg});
  EXPECT_EQ(to_stdout.out.substr(0, 9), "time,X,Y\n");
}

TEST_F(Cli, InlineModelAndArrayInit) {
  auto cfg = config("inline.json", R"j({
    "model": {"variables": ["x"], "parameters": {"k": 1}, "rhs": {"x": "k"}},
    "init": [2], "params": {"k": 3}, "step": 0.1, "horizon": 2})j");
  auto r = invoke({"monitor", "--config", cfg, "--formula", "F[1,1.5](x >= 4)"});
  ASSERT_EQ(r.code, 0) << r.err;
  // x(t) = 2 + 3t peaks inside the window at t = 1.5.
  EXPECT_NEAR(std::stod(field(r.out, "robustness")), 2.5, 1e-9);
}

TEST_F(Cli, HelpExitsCleanly) {
  auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("monitor"), std::string::npos);
}
