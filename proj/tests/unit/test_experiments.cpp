#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bddc/config.hpp"
#include "bddc/errors.hpp"
#include "bddc/experiments.hpp"

namespace bddc {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bddc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json end_to_end_doc() {
  return Json::parse(R"({
    "experiment": "end-to-end", "seed": 3, "system": "academic",
    "noise": {"family": "gaussian", "sigma": 0.1}, "delta": 0.05,
    "samples": 10000, "input_box": {"half_width": 2.0}, "region": {"c": 0.1},
    "bound_kind": "ellipsoidal", "retries": 0,
    "closed_loop": {"initial_states": 5, "steps": 100}})");
}

TEST(ConfigTest, RejectsBadValuesAndUnknownKeys) {
  Json doc = end_to_end_doc();
  doc["delta"] = 1.5;
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = end_to_end_doc();
  doc["smaples"] = 10;
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = end_to_end_doc();
  doc["experiment"] = "magic";
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = end_to_end_doc();
  doc["noise"]["sigma"] = -1.0;
  EXPECT_THROW(parse_config(doc), ConfigError);
  doc = end_to_end_doc();
  doc["region"]["c"] = "big";
  EXPECT_THROW(parse_config(doc), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(ConfigTest, BadConfigFileIsRejected) {
  EXPECT_THROW(load_config(std::string(BDDC_TEST_DATA_DIR) + "/bad_config.json"), ConfigError);
}

TEST(ConfigTest, EffectiveConfigRoundTrips) {
  const ExperimentConfig cfg = parse_config(end_to_end_doc());
  EXPECT_EQ(cfg.kind, ExperimentKind::kEndToEnd);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.sample_list(1), (std::vector<int>{10000, 10000}));
  const Json once = config_to_json(cfg);
  const Json twice = config_to_json(parse_config(once));
  EXPECT_EQ(once, twice);
}

TEST(ConfigTest, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(fs::path(BDDC_SOURCE_DIR) / "configs")) {
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(load_config(entry.path().string()));
  }
}

TEST(PipelineTest, NoiseScalesResidualBound) {
  const ExperimentConfig cfg = parse_config(end_to_end_doc());
  const BilinearSystemd sys = cfg.system_for_trial(0);
  CollectionPlan plan{cfg.sample_list(1), cfg.sampler, cfg.noise, 7, std::nullopt};
  const auto data = collect(sys, plan);
  const InputBox box = cfg.box(1);
  const BoundStage low = compute_bounds(data, cfg.sampler, {NoiseFamily::kGaussian, 0.01}, 0.05,
                                        BoundKind::kDataDependent, box, false);
  const BoundStage high = compute_bounds(data, cfg.sampler, {NoiseFamily::kGaussian, 1.0}, 0.05,
                                         BoundKind::kDataDependent, box, false);
  EXPECT_GT(high.q.Q.norm(), low.q.Q.norm());
  EXPECT_NEAR(high.q.Q.norm() / low.q.Q.norm(), 1e4, 1e-6 * 1e4);
  EXPECT_THROW(compute_bounds(data, cfg.sampler, {NoiseFamily::kUniformBox, 0.1}, 0.05, BoundKind::kEllipsoidal,
                              box, false),
               ConfigError);
}

TEST(EndToEndTest, GenerousDataSucceeds) {
  const ExperimentConfig cfg = parse_config(end_to_end_doc());
  const EndToEndResult r = run_end_to_end(cfg, sdp::BarrierSdpSolver(cfg.solver));
  ASSERT_TRUE(r.success()) << r.report.dump();
  EXPECT_TRUE(r.certificates_passed);
  ASSERT_TRUE(r.roa.has_value());
  EXPECT_TRUE(r.roa->contained());
  EXPECT_EQ(static_cast<int>(r.closed_loop.size()), 5);
  EXPECT_EQ(r.report.at("status"), "feasible");
}

TEST(EndToEndTest, TinyDataIsReportedInfeasible) {
  Json doc = end_to_end_doc();
  doc["samples"] = 1;
  const ExperimentConfig cfg = parse_config(doc);
  const EndToEndResult r = run_end_to_end(cfg, sdp::BarrierSdpSolver(cfg.solver));
  EXPECT_FALSE(r.success());
  EXPECT_EQ(r.status, SynthesisStatus::kInfeasible);
  ASSERT_EQ(r.attempts.size(), 1u);
  EXPECT_FALSE(r.attempts[0].failure.empty());
  EXPECT_TRUE(r.report.contains("failure"));
}

TEST(EndToEndTest, RetriesDoubleTheDataLength) {
  Json doc = end_to_end_doc();
  doc["samples"] = 2;
  doc["retries"] = 2;
  const ExperimentConfig cfg = parse_config(doc);
  const EndToEndResult r = run_end_to_end(cfg, sdp::BarrierSdpSolver(cfg.solver));
  ASSERT_EQ(r.attempts.size(), 3u);
  EXPECT_EQ(r.attempts[2].samples[0], 8);
  EXPECT_NE(r.attempt_seeds[0], r.attempt_seeds[1]);
}

TEST(FeasibilitySearchTest, CapIsReportedWhenNothingIsFeasible) {
  const ExperimentConfig cfg = parse_config(Json::parse(R"({
    "experiment": "feasibility-search", "seed": 0, "system": "academic",
    "noise": {"family": "gaussian", "sigma": 0.1}, "delta": 0.05,
    "input_box": {"half_width": 2.0},
    "sweep": {"region_parameter": "c", "values": [0.9], "bound_kinds": ["ellipsoidal"],
              "seeds": [0], "cap": 10}})"));
  const FeasibilitySearchResult r = run_feasibility_search(cfg);
  ASSERT_EQ(r.entries.size(), 1u);
  EXPECT_FALSE(r.entries[0].minimal_T.has_value());
  EXPECT_EQ(r.entries[0].minimal_T_string(r.cap), ">10");
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_FALSE(r.summary[0].median_T.has_value());
  EXPECT_EQ(r.summary[0].feasible_seeds, 0);
}

TEST(FeasibilitySearchTest, MinimalTIsFeasibleAndItsPredecessorIsNot) {
  const ExperimentConfig cfg = parse_config(Json::parse(R"({
    "experiment": "feasibility-search", "seed": 0, "system": "academic",
    "noise": {"family": "gaussian", "sigma": 0.1}, "delta": 0.05,
    "input_box": {"half_width": 2.0},
    "sweep": {"region_parameter": "c", "values": [0.1], "bound_kinds": ["ellipsoidal"],
              "seeds": [0], "cap": 5000}})"));
  const FeasibilitySearchResult r = run_feasibility_search(cfg);
  ASSERT_EQ(r.entries.size(), 1u);
  const SearchEntry& e = r.entries[0];
  ASSERT_TRUE(e.minimal_T.has_value());
  bool saw_min = false, saw_pred = false;
  for (const SearchEvaluation& ev : e.trace) {
    if (ev.samples == *e.minimal_T) {
      saw_min = true;
      EXPECT_EQ(ev.status, SynthesisStatus::kFeasible);
    }
    if (ev.samples == *e.minimal_T - 1) {
      saw_pred = true;
      EXPECT_NE(ev.status, SynthesisStatus::kFeasible);
    }
  }
  EXPECT_TRUE(saw_min);
  EXPECT_TRUE(saw_pred || *e.minimal_T == 4);
  ASSERT_TRUE(e.solution.has_value());
  EXPECT_TRUE(e.solution->feasible());
}

// Minimal T must not decrease as the region grows, for a fixed seed.
void expect_monotone_in_region(const ExperimentConfig& cfg) {
  const FeasibilitySearchResult r = run_feasibility_search(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    int prev = 0;
    for (double v : cfg.region_grid.values)
      for (const SearchEntry& e : r.entries)
        if (e.seed == seed && e.value == v) {
          const int T = e.minimal_T.value_or(r.cap + 1);
          EXPECT_GE(T, prev) << cfg.region_grid.parameter << "=" << v << " seed " << seed;
          prev = T;
        }
  }
}

TEST(FeasibilitySearchTest, MinimalTGrowsWithTheNormBall) {
  expect_monotone_in_region(parse_config(Json::parse(R"({
    "experiment": "feasibility-search", "seed": 0, "system": "academic",
    "noise": {"family": "gaussian", "sigma": 0.1}, "delta": 0.05,
    "input_box": {"half_width": 2.0},
    "sweep": {"region_parameter": "c", "values": [0.05, 0.1, 0.3, 0.6], "bound_kinds": ["ellipsoidal"],
              "seeds": [0, 1], "cap": 20000}})")));
}

TEST(FeasibilitySearchTest, MinimalTGrowsWithRx) {
  expect_monotone_in_region(parse_config(Json::parse(R"({
    "experiment": "feasibility-search", "seed": 0, "system": "cstr",
    "noise": {"family": "gaussian", "sigma": 0.1}, "delta": 0.05,
    "input_box": {"half_width": 2.0},
    "sweep": {"region_parameter": "Rx", "values": [1e-4, 1e-3, 1e-2], "Qx": [[-1, 0], [0, -1]], "Sx": [0, 0],
              "bound_kinds": ["ellipsoidal"], "seeds": [0, 1], "cap": 20000}})")));
}

TEST(ErrorSweepTest, OutputIsByteIdenticalAcrossRuns) {
  const ExperimentConfig cfg = parse_config(Json::parse(R"({
    "experiment": "error-vs-T", "seed": 4, "trials": 4,
    "system": {"name": "random", "n_x": 3, "n_u": 1},
    "noise": {"family": "gaussian", "sigma": 0.5}, "delta": 0.05,
    "sweep": {"T_grid": [200, 2000, 20000]}})"));
  const fs::path a = scratch_dir("sweep_a"), b = scratch_dir("sweep_b");
  const SweepResult r1 = run_error_sweep(cfg);
  write_sweep(r1, cfg, a);
  write_sweep(run_error_sweep(cfg), cfg, b);
  const std::string ca = slurp(a / "error_vs_T.csv");
  ASSERT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b / "error_vs_T.csv"));
  EXPECT_EQ(ca.rfind("# experiment: error-vs-T", 0), 0u);

  ASSERT_EQ(r1.points.size(), 3u);
  for (const SweepPoint& p : r1.points) {
    EXPECT_EQ(static_cast<int>(p.error.size()), 4);
    for (std::size_t k = 0; k < p.error.size(); ++k) EXPECT_LE(p.error[k], p.apriori_bound[k]);
  }
  // The error shrinks with T.
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  EXPECT_LT(mean(r1.points[2].error), mean(r1.points[0].error));
}

TEST(OutputTest, NumberFormatting) {
  EXPECT_EQ(format_number(kInfinity), "inf");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
}

}  // namespace
}  // namespace bddc
