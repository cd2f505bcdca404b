#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "stlstar/stlstar.hpp"

using namespace stlstar;

namespace {

/// x' = p, x(0) = 0, so F[0,1](x >= c) has robustness p - c for p >= 0.
OdeModel ramp() { return expression_model("ramp", {"x"}, {"p"}, {{"x", "p"}}, {0.0}, {0.0}); }

PerturbationSpace grid(std::vector<Axis> axes, std::size_t iterations = 0,
                       std::optional<double> threshold = std::nullopt) {
  PerturbationSpace s;
  s.axes = std::move(axes);
  s.iterations = iterations;
  s.threshold = threshold;
  return s;
}

SimulationConfig sir_sim() {
  SimulationConfig sim;
  sim.step = 0.05;
  sim.horizon = 10.0;
  return sim;
}

PerturbationSpace sir_space(std::size_t res, std::size_t iterations) {
  return grid({{"alpha", 0.005, 0.06, res}, {"beta", 0.05, 1.2, res}}, iterations);
}

}  // namespace

TEST(Sweep, PlainGrid) {
  auto result = run_sweep(sir_model(), sir_space(2, 0), parse("F[1,5](I >= 50)"), sir_sim());
  EXPECT_EQ(result.points.size(), 4u);
  EXPECT_EQ(result.axis_names, (std::vector<std::string>{"alpha", "beta"}));
  EXPECT_EQ(result.samples_per_trajectory, 201u);
  for (const auto& p : result.points) {
    EXPECT_EQ(p.depth, 0u);
    EXPECT_EQ(p.satisfied, p.robustness > 0);
  }
  std::vector<std::vector<double>> corners;
  for (const auto& p : result.points) corners.push_back(p.params);
  std::sort(corners.begin(), corners.end());
  EXPECT_EQ(corners, (std::vector<std::vector<double>>{{0.005, 0.05}, {0.005, 1.2}, {0.06, 0.05}, {0.06, 1.2}}));
}

TEST(Sweep, TrueFormulaIsSatisfiedEverywhere) {
  auto result = run_sweep(sir_model(), sir_space(3, 2), make_true(), sir_sim());
  EXPECT_EQ(result.points.size(), 9u);
  for (const auto& p : result.points) {
    EXPECT_TRUE(p.satisfied);
    EXPECT_EQ(p.robustness, kInfinity);
  }
}

TEST(Sweep, RecordedRobustnessMatchesIndependentRecomputation) {
  auto phi = parse("F[1,5](I >= 50 && *G[0.25,5](I* >= I))");
  auto sim = sir_sim();
  auto result = run_sweep(sir_model(), sir_space(4, 2), phi, sim);
  for (const auto& p : result.points) {
    auto trajectory = integrate(sir_model(), sir_model().default_init, p.params, sim.step, sim.horizon);
    EXPECT_EQ(p.robustness, monitor(optimize(phi), trajectory));
  }
}

TEST(Sweep, RefinementLocalizesTheBoundary) {
  const double c = 0.37;
  const std::size_t cap = 6;
  SimulationConfig sim;
  sim.step = 0.01;
  sim.horizon = 1.0;
  auto phi = parse("F[0,1](x >= 0.37)");
  auto result = run_sweep(ramp(), grid({{"p", 0.0, 1.0, 3}}, cap), phi, sim);

  auto pts = result.points;
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.params[0] < b.params[0]; });
  std::size_t crossings = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (pts[k - 1].satisfied == pts[k].satisfied) continue;
    ++crossings;
    EXPECT_LE(pts[k - 1].params[0], c);
    EXPECT_GE(pts[k].params[0], c);
    EXPECT_LE(pts[k].params[0] - pts[k - 1].params[0], 1.0 / (1 << cap));
  }
  EXPECT_EQ(crossings, 1u);
  EXPECT_LT(pts.size(), 3u + 2 * cap * 2 + 8);
  std::size_t deepest = 0;
  for (const auto& p : pts) deepest = std::max(deepest, p.depth);
  EXPECT_EQ(deepest, cap);
}

TEST(Sweep, DefaultThresholdIsTenPercentOfMedian) {
  SimulationConfig sim;
  sim.step = 0.01;
  sim.horizon = 1.0;
  auto result = run_sweep(ramp(), grid({{"p", 0.0, 1.0, 5}}, 0), parse("F[0,1](x >= 0.1)"), sim);
  // |p - 0.1| over p = 0, .25, .5, .75, 1 -> median 0.4 (p = 0 gives -0.1).
  EXPECT_NEAR(result.threshold, 0.04, 1e-12);
}

TEST(Sweep, RefinementStaysInsideTheBoxAndKeepsEarlierPoints) {
  auto phi = parse("F[1,5](I >= 50)");
  std::vector<std::vector<double>> previous;
  for (std::size_t cap = 0; cap <= 3; ++cap) {
    auto result = run_sweep(sir_model(), sir_space(4, cap), phi, sir_sim());
    std::vector<std::vector<double>> now;
    for (const auto& p : result.points) {
      EXPECT_GE(p.params[0], 0.005);
      EXPECT_LE(p.params[0], 0.06);
      EXPECT_GE(p.params[1], 0.05);
      EXPECT_LE(p.params[1], 1.2);
      now.push_back(p.params);
    }
    std::sort(now.begin(), now.end());
    EXPECT_TRUE(std::includes(now.begin(), now.end(), previous.begin(), previous.end()));
    previous = now;
  }
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  auto phi = parse("F[1,5](I >= 50 && *G[0.25,5](I* >= I))");
  SweepOptions one, many;
  many.workers = 6;
  auto a = run_sweep(sir_model(), sir_space(5, 3), phi, sir_sim(), one);
  auto b = run_sweep(sir_model(), sir_space(5, 3), phi, sir_sim(), many);
  std::ostringstream ca, cb;
  write_sweep_csv(ca, a);
  write_sweep_csv(cb, b);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Sweep, HorizonShorterThanFormulaIsRejected) {
  auto sim = sir_sim();
  sim.horizon = 3.0;
  EXPECT_THROW(run_sweep(sir_model(), sir_space(2, 0), parse("F[1,5](I >= 50)"), sim), LengthError);
}

TEST(Sweep, InvalidSpaces) {
  auto phi = parse("F[1,5](I >= 50)");
  EXPECT_THROW(run_sweep(sir_model(), grid({{"alpha", 0.1, 0.1, 2}}), phi, sir_sim()), ConfigError);
  EXPECT_THROW(run_sweep(sir_model(), grid({{"alpha", 0.1, 0.2, 1}}), phi, sir_sim()), ConfigError);
  EXPECT_THROW(run_sweep(sir_model(), grid({{"gamma", 0.1, 0.2, 2}}), phi, sir_sim()), ConfigError);
  EXPECT_THROW(run_sweep(sir_model(), grid({}), phi, sir_sim()), ConfigError);
}

TEST(Sweep, SimulationFailuresAreRecordedPerPoint) {
  auto model = expression_model("blowup", {"x"}, {"p"}, {{"x", "p*x*x"}}, {1.0}, {0.0});
  SimulationConfig sim;
  sim.step = 0.01;
  sim.horizon = 2.0;
  auto result = run_sweep(model, grid({{"p", 0.0, 4.0, 5}}), parse("F[0,2](x >= 1.5)"), sim);
  EXPECT_EQ(result.points.size(), 5u);
  EXPECT_GT(result.failures, 0u);
  EXPECT_LT(result.failures, 5u);
  for (const auto& p : result.points)
    if (!p.ok()) {
      EXPECT_FALSE(p.satisfied);
      EXPECT_NE(p.error.find("diverged"), std::string::npos);
    }
}

TEST(Export, CsvRows) {
  auto result = run_sweep(sir_model(), grid({{"alpha", 0.01, 0.05, 2}}), parse("F[1,5](I >= 50)"), sir_sim());
  std::ostringstream out;
  write_sweep_csv(out, result);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "alpha,robustness,satisfied,depth");
  std::size_t rows = 0;
  std::regex row(R"(^[-0-9.e]+,(-?inf|[-0-9.e]+),(true|false),[0-9]+$)");
  while (std::getline(in, line)) {
    EXPECT_TRUE(std::regex_match(line, row)) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 2u);
}

TEST(Export, SvgColours) {
  SweepResult all_positive;
  all_positive.axis_names = {"a", "b"};
  all_positive.points = {{{0, 0}, {0, 0}, 2.0, true, 0, ""}, {{1, 0}, {1, 0}, 1.0, true, 0, ""}};
  std::ostringstream svg;
  write_sweep_svg(svg, all_positive);
  EXPECT_NE(svg.str().find(kPositiveColor), std::string::npos);
  EXPECT_EQ(svg.str().find(kNegativeColor), std::string::npos);
  EXPECT_NE(svg.str().find("fill-opacity=\"0.5\""), std::string::npos);

  SweepResult mixed = all_positive;
  mixed.points.push_back({{0, 1}, {0, 1}, -4.0, false, 0, ""});
  std::ostringstream svg2;
  write_sweep_svg(svg2, mixed);
  const auto text = svg2.str();
  EXPECT_NE(text.find(kPositiveColor), std::string::npos);
  EXPECT_NE(text.find(kNegativeColor), std::string::npos);
  EXPECT_NE(text.find("fill-opacity=\"0.25\""), std::string::npos);
  EXPECT_NE(text.find("fill-opacity=\"1\""), std::string::npos);

  SweepResult one_axis;
  one_axis.axis_names = {"a"};
  std::ostringstream svg3;
  EXPECT_THROW(write_sweep_svg(svg3, one_axis), ConfigError);
}

TEST(Export, WritesFiles) {
  auto dir = std::filesystem::temp_directory_path() / "stlstar_export_test";
  std::filesystem::create_directories(dir);
  auto result = run_sweep(sir_model(), sir_space(2, 0), parse("F[1,5](I >= 50)"), sir_sim());
  export_sweep(result, (dir / "map").string());
  EXPECT_TRUE(std::filesystem::exists(dir / "map.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "map.svg"));
  std::ifstream svg(dir / "map.svg");
  std::string text((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("F[1, 5](I &gt;= 50)"), std::string::npos);
  std::filesystem::remove_all(dir);
}
