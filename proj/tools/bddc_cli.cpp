// Command-line front end. Exit codes: 0 success, 1 failed closed-loop
// certificate, 2 infeasible, 3 config error, 4 solver error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bddc/config.hpp"
#include "bddc/data_collection.hpp"
#include "bddc/errors.hpp"
#include "bddc/experiments.hpp"
#include "bddc/identification.hpp"
#include "bddc/serialization.hpp"
#include "bddc/synthesis.hpp"

namespace {

using namespace bddc;

constexpr int kExitOk = 0;
constexpr int kExitCertificate = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitConfig = 3;
constexpr int kExitSolver = 4;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string bound_kind;
  std::optional<int> trials;
  std::string export_sdp;
  std::string data;
  std::string controller;
};

int status_exit_code(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFeasible:
      return kExitOk;
    case SynthesisStatus::kInfeasible:
      return kExitInfeasible;
    case SynthesisStatus::kSolverError:
      return kExitSolver;
  }
  return kExitSolver;
}

ExperimentConfig resolve_config(const GlobalOptions& g, ExperimentKind fallback) {
  ExperimentConfig cfg;
  if (g.config.empty()) {
    cfg = default_config(fallback);
  } else {
    Json doc = read_config_document(g.config);
    if (doc.is_object() && !doc.contains("experiment")) doc["experiment"] = to_string(fallback);
    cfg = parse_config(doc);
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.trials) {
    if (*g.trials < 1) throw ConfigError("--trials must be at least 1");
    cfg.trials = *g.trials;
  }
  if (!g.bound_kind.empty()) {
    try {
      cfg.bound_kind = bound_kind_from_string(g.bound_kind);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    cfg.bound_kinds = {cfg.bound_kind};
  }
  if (!g.out.empty()) {
    cfg.output_dir = g.out;
  } else if (const char* env = std::getenv("BDDC_OUT_DIR"); env && *env && !cfg.raw.contains("output_dir")) {
    cfg.output_dir = env;
  }
  return cfg;
}

void write_json(const Json& j, const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
  std::cout << "wrote " << file.string() << '\n';
}

std::vector<ExperimentDataset> load_or_collect(const GlobalOptions& g, const ExperimentConfig& cfg) {
  if (!g.data.empty()) return import_datasets(g.data);
  const BilinearSystemd sys = cfg.system_for_trial(0);
  CollectionPlan plan;
  plan.samples = cfg.sample_list(sys.input_dim());
  plan.sampler = cfg.sampler;
  plan.noise = cfg.noise;
  plan.seed = cfg.seed;
  return collect(sys, plan);
}

int cmd_collect(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kEndToEnd);
  const BilinearSystemd sys = cfg.system_for_trial(0);
  CollectionPlan plan;
  plan.samples = cfg.sample_list(sys.input_dim());
  plan.sampler = cfg.sampler;
  plan.noise = cfg.noise;
  plan.seed = cfg.seed;
  const auto data = collect(sys, plan);
  const auto dir = cfg.output_dir / "data";
  export_datasets(data, plan, dir);
  std::cout << "wrote " << data.size() << " experiments to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_identify(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kEndToEnd);
  const auto data = load_or_collect(g, cfg);
  Json j;
  j["estimate"] = to_json(identify(data));
  j["samples"] = Json::array();
  for (const auto& d : data) j["samples"].push_back(d.samples());
  write_json(j, cfg.output_dir / "estimate.json");
  return kExitOk;
}

int cmd_bounds(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kEndToEnd);
  const auto data = load_or_collect(g, cfg);
  const int n_u = static_cast<int>(data.size()) - 1;
  const BoundStage b =
      compute_bounds(data, cfg.sampler, cfg.noise, cfg.delta, cfg.bound_kind, cfg.box(n_u), cfg.overestimate);
  Json j = to_json(b);
  j["config"] = config_to_json(cfg);
  write_json(j, cfg.output_dir / "bounds.json");
  return b.q.infeasible ? kExitInfeasible : kExitOk;
}

int cmd_synthesize(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kEndToEnd);
  if (!cfg.region) throw ConfigError("synthesize needs a region");
  const sdp::BarrierSdpSolver solver(cfg.solver);
  if (!g.data.empty()) {
    const auto data = import_datasets(g.data);
    const PipelineResult r = run_pipeline(data, cfg, cfg.bound_kind, *cfg.region, solver);
    Json j = to_json(r);
    j["config"] = config_to_json(cfg);
    write_json(j, cfg.output_dir / "synthesis.json");
    if (!g.export_sdp.empty() && r.estimate && r.bounds && !r.bounds->q.infeasible) {
      std::ofstream out(g.export_sdp);
      build_synthesis_problem(*r.estimate, *cfg.region, r.bounds->q, cfg.synthesis).problem.write_triplets(out);
    }
    std::cout << "status: " << to_string(r.status()) << '\n';
    return status_exit_code(r.status());
  }
  const EndToEndResult r = run_end_to_end(cfg, solver);
  write_end_to_end(r, cfg.output_dir);
  const PipelineResult& last = r.attempts.back();
  if (!g.export_sdp.empty() && last.estimate && last.bounds && !last.bounds->q.infeasible) {
    std::ofstream out(g.export_sdp);
    build_synthesis_problem(*last.estimate, *cfg.region, last.bounds->q, cfg.synthesis).problem.write_triplets(out);
  }
  std::cout << "status: " << to_string(r.status) << " after " << r.attempts.size() << " attempt(s)\n";
  if (r.success() && !r.certificates_passed) return kExitCertificate;
  return status_exit_code(r.status);
}

int cmd_simulate(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kEndToEnd);
  if (g.controller.empty()) throw ConfigError("simulate needs --controller");
  if (!cfg.region) throw ConfigError("simulate needs a region");
  Json doc;
  {
    std::ifstream in(g.controller);
    if (!in) throw ConfigError("cannot open controller file '" + g.controller + "'");
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("invalid controller JSON: ") + e.what());
    }
  }
  // Accept a bare controller or any report that embeds one.
  if (doc.contains("controller")) doc = doc.at("controller");
  if (doc.contains("attempts")) doc = doc.at("attempts").back().at("controller");
  const ControllerSolution sol = controller_from_json(doc);
  const BilinearSystemd sys = cfg.system_for_trial(0);
  const auto loops = closed_loop_certificates(sys, sol, *cfg.region, cfg.closed_loop_initial_states,
                                              cfg.closed_loop_steps, derive_seed(cfg.seed, {stream::kInitialState}));
  const RoaReport roa = roa_report(sol, *cfg.region, 2000, cfg.seed);
  bool passed = roa.contained();
  Json j;
  j["roa"] = to_json(roa);
  j["closed_loop"] = Json::array();
  for (const auto& c : loops) {
    passed = passed && c.passed;
    j["closed_loop"].push_back(to_json(c, true));
  }
  j["passed"] = passed;
  j["config"] = config_to_json(cfg);
  write_json(j, cfg.output_dir / "simulation.json");
  std::cout << (passed ? "all certificates passed" : "certificate failure") << '\n';
  return passed ? kExitOk : kExitCertificate;
}

int cmd_sweep(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("sweep needs --config");
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kErrorVsT);
  switch (cfg.kind) {
    case ExperimentKind::kErrorVsT:
    case ExperimentKind::kErrorVsNx: {
      const SweepResult r = run_error_sweep(cfg);
      write_sweep(r, cfg, cfg.output_dir);
      std::cout << "wrote " << r.rows.size() << " rows to " << cfg.output_dir.string() << '\n';
      return kExitOk;
    }
    case ExperimentKind::kFeasibilitySearch: {
      const FeasibilitySearchResult r = run_feasibility_search(cfg);
      write_feasibility(r, cfg, cfg.output_dir);
      for (const auto& s : r.summary)
        std::cout << cfg.region_grid.parameter << "=" << s.value << " " << to_string(s.kind) << ": median T "
                  << (s.median_T ? format_number(*s.median_T) : ">" + std::to_string(r.cap)) << " ("
                  << s.feasible_seeds << "/" << s.seeds << " seeds feasible)\n";
      return kExitOk;
    }
    case ExperimentKind::kEndToEnd: {
      const EndToEndResult r = run_end_to_end(cfg, sdp::BarrierSdpSolver(cfg.solver));
      write_end_to_end(r, cfg.output_dir);
      return r.success() && !r.certificates_passed ? kExitCertificate : status_exit_code(r.status);
    }
    case ExperimentKind::kPendulum: {
      const PendulumResult r = run_pendulum(cfg, sdp::BarrierSdpSolver(cfg.solver));
      write_pendulum(r, cfg, cfg.output_dir);
      return status_exit_code(r.pipeline.status());
    }
  }
  return kExitConfig;
}

int cmd_pendulum(const GlobalOptions& g) {
  const ExperimentConfig cfg = resolve_config(g, ExperimentKind::kPendulum);
  if (cfg.kind != ExperimentKind::kPendulum) throw ConfigError("pendulum needs a pendulum config");
  const PendulumResult r = run_pendulum(cfg, sdp::BarrierSdpSolver(cfg.solver));
  write_pendulum(r, cfg, cfg.output_dir);
  std::cout << "status: " << to_string(r.pipeline.status()) << '\n';
  if (r.pipeline.bounds)
    std::cout << "||Q_Delta||_2 = " << r.report["bound_magnitudes"]["q_delta_norm"].dump() << '\n';
  if (r.feasible()) std::cout << "all initial conditions converged: " << (r.all_converged ? "yes" : "no") << '\n';
  if (r.feasible() && !r.all_converged) return kExitCertificate;
  return status_exit_code(r.pipeline.status());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven controller design for bilinear systems"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  int trials = 0;
  app.add_option("--config", g.config, "JSON config file, '-' for standard input");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials");
  app.add_option("--out", g.out, "Output directory (default: $BDDC_OUT_DIR or the config's output_dir)");
  app.add_option("--bound-kind", g.bound_kind, "apriori, data or ellipsoidal");
  app.add_option("--export-sdp", g.export_sdp, "Write the synthesis SDP in triplet format");
  app.set_help_all_flag("--help-all");

  auto* collect = app.add_subcommand("collect", "Collect data and export CSV datasets");
  auto* identify = app.add_subcommand("identify", "OLS estimates from collected or imported data");
  auto* bounds = app.add_subcommand("bounds", "Error bounds and the residual bound Q_Delta");
  auto* synth = app.add_subcommand("synthesize", "Controller synthesis, with retries when collecting");
  auto* simulate = app.add_subcommand("simulate", "Closed-loop certificates for a stored controller");
  auto* sweep = app.add_subcommand("sweep", "Error sweeps and minimal-data searches");
  auto* pendulum = app.add_subcommand("pendulum", "Lifted pendulum study");
  for (auto* sub : {identify, bounds, synth}) sub->add_option("--data", g.data, "Directory written by 'collect'");
  simulate->add_option("--controller", g.controller, "Controller or synthesis report JSON")->required();
  for (auto* sub : {collect, identify, bounds, synth, simulate, sweep, pendulum}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    std::cerr << "config error: invalid command line\n";
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed;
  if (*trials_opt) g.trials = trials;

  try {
    if (*collect) return cmd_collect(g);
    if (*identify) return cmd_identify(g);
    if (*bounds) return cmd_bounds(g);
    if (*synth) return cmd_synthesize(g);
    if (*simulate) return cmd_simulate(g);
    if (*sweep) return cmd_sweep(g);
    if (*pendulum) return cmd_pendulum(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
