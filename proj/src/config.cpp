#include "bddc/config.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "bddc/errors.hpp"
#include "bddc/random.hpp"
#include "bddc/systems.hpp"

namespace bddc {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

double get_number(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number_from_json(j.at(key)) : fallback;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::vector<int> log_grid(int lo, int hi, int points) {
  std::vector<int> out;
  for (int k = 0; k < points; ++k) {
    const double e = std::log10(lo) + (std::log10(hi) - std::log10(lo)) * k / (points - 1);
    out.push_back(static_cast<int>(std::lround(std::pow(10.0, e))));
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEndToEnd:
      return "end-to-end";
    case ExperimentKind::kErrorVsT:
      return "error-vs-T";
    case ExperimentKind::kErrorVsNx:
      return "error-vs-nx";
    case ExperimentKind::kFeasibilitySearch:
      return "feasibility-search";
    case ExperimentKind::kPendulum:
      return "pendulum";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::kEndToEnd, ExperimentKind::kErrorVsT, ExperimentKind::kErrorVsNx,
                 ExperimentKind::kFeasibilitySearch, ExperimentKind::kPendulum})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

StateRegion RegionGrid::region(double value, int n_x) const {
  if (parameter == "c") return StateRegion::NormBall(value, n_x);
  const Eigen::MatrixXd Q = Qx.size() ? Qx : Eigen::MatrixXd(-Eigen::MatrixXd::Identity(n_x, n_x));
  const Eigen::VectorXd S = Sx.size() ? Sx : Eigen::VectorXd(Eigen::VectorXd::Zero(n_x));
  return StateRegion(Q, S, value);
}

int ExperimentConfig::state_dim() const {
  if (system) return system->state_dim();
  return random_n_x;
}

int ExperimentConfig::input_dim() const {
  if (system) return system->input_dim();
  return random_n_u;
}

std::vector<int> ExperimentConfig::sample_list(int n_u) const {
  if (samples.size() == 1) return std::vector<int>(n_u + 1, samples[0]);
  if (static_cast<int>(samples.size()) != n_u + 1) throw ConfigError("samples must list n_u + 1 entries");
  return samples;
}

InputBox ExperimentConfig::box(int n_u) const {
  if (input_box) {
    if (input_box->dim() != n_u) throw ConfigError("input box dimension differs from n_u");
    return *input_box;
  }
  return InputBox::Symmetric(n_u, input_half_width);
}

BilinearSystemd ExperimentConfig::system_for_trial(int trial) const {
  if (system) return *system;
  return random_system(random_n_x, random_n_u,
                       derive_seed(seed, {stream::kSystem, static_cast<std::uint64_t>(trial)}), random_scale);
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kEndToEnd:
      c.system = academic_system();
      c.region = StateRegion::NormBall(0.1, 2);
      c.max_retries = 3;
      break;
    case ExperimentKind::kErrorVsT:
    case ExperimentKind::kErrorVsNx:
      c.system_name = "random";
      c.random_n_x = 25;
      c.random_n_u = 1;
      c.sampler = StateSamplerSpec::Gaussian(25, 1.0);
      c.noise = {NoiseFamily::kGaussian, 0.5};
      c.trials = 100;
      c.T_grid = log_grid(1000, 100000, 9);
      for (int n = 1; n <= 30; ++n) c.n_x_grid.push_back(n);
      break;
    case ExperimentKind::kFeasibilitySearch:
      c.system = academic_system();
      c.region_grid.values = {0.1, 0.6, 0.9};
      c.seeds = {0, 1, 2, 3, 4};
      break;
    case ExperimentKind::kPendulum:
      c.system_name = "pendulum";
      c.system = pendulum_system();
      c.sampler = StateSamplerSpec::Lifted(pendulum_lifting(), SamplerFamily::kGaussian, 1.0);
      c.noise = {NoiseFamily::kGaussian, 1e-3};
      c.samples = {50000};
      c.region = StateRegion::NormBall(11.0, 3);
      c.overestimate = true;
      c.initial_conditions = {Eigen::Vector2d(2.0, 1.5),  Eigen::Vector2d(-1.0, -2.2),
                              Eigen::Vector2d(-2.0, 1.0), Eigen::Vector2d(1.0, -1.0),
                              Eigen::Vector2d(2.5, 0.0),  Eigen::Vector2d(0.0, 2.5)};
      break;
  }
  return c;
}

static ExperimentConfig parse_document(const Json& doc) {
  check_keys(doc,
             {"experiment", "seed", "trials", "system", "sampler", "noise", "delta", "samples", "input_box",
              "region", "bound_kind", "overestimate", "synthesis", "solver", "retries", "closed_loop", "sweep",
              "pendulum", "output_dir", "description"},
             "config");
  ExperimentConfig c = default_config(experiment_kind_from_string(get<std::string>(doc, "experiment", "end-to-end")));
  c.raw = doc;
  c.seed = get<std::uint64_t>(doc, "seed", c.seed);
  c.trials = get<int>(doc, "trials", c.trials);
  require(c.trials >= 1, "trials must be at least 1");

  if (doc.contains("system")) {
    const Json& s = doc.at("system");
    if (s.is_string()) {
      c.system_name = s.get<std::string>();
      c.system = named_system(c.system_name);
    } else {
      const std::string name = get<std::string>(s, "name", s.contains("A") ? "custom" : "random");
      c.system_name = name;
      if (name == "random") {
        check_keys(s, {"name", "n_x", "n_u", "scale"}, "system");
        c.system.reset();
        c.random_n_x = get<int>(s, "n_x", c.random_n_x);
        c.random_n_u = get<int>(s, "n_u", c.random_n_u);
        c.random_scale = get_number(s, "scale", c.random_scale);
        require(c.random_n_x >= 1 && c.random_n_u >= 1, "random system dimensions must be positive");
      } else if (name == "custom") {
        c.system = system_from_json(s);
      } else {
        c.system = named_system(name);
      }
    }
    if (c.system_name == "pendulum" && doc.contains("pendulum")) {
      const Json& p = doc.at("pendulum");
      c.pendulum.mass = get_number(p, "mass", c.pendulum.mass);
      c.pendulum.length = get_number(p, "length", c.pendulum.length);
      c.pendulum.damping = get_number(p, "damping", c.pendulum.damping);
      c.pendulum.gravity = get_number(p, "gravity", c.pendulum.gravity);
      c.pendulum.sample_time = get_number(p, "sample_time", c.pendulum.sample_time);
      c.system = pendulum_lifted_system(c.pendulum);
    }
  }
  const int n_x = c.state_dim();
  const int n_u = c.input_dim();

  if (doc.contains("sampler")) {
    Json s = doc.at("sampler");
    if (s.is_object() && !s.contains("dim") && s.value("family", std::string("gaussian")) != "lifted") s["dim"] = n_x;
    c.sampler = sampler_from_json(s);
  } else if (c.sampler.family != SamplerFamily::kLifted) {
    c.sampler = c.sampler.family == SamplerFamily::kUniformBox ? StateSamplerSpec::Uniform(n_x, c.sampler.scale)
                                                               : StateSamplerSpec::Gaussian(n_x, c.sampler.scale);
  }
  require(c.sampler.state_dim() == n_x || c.kind == ExperimentKind::kErrorVsNx,
          "sampler dimension differs from the system state dimension");
  if (doc.contains("noise")) c.noise = noise_from_json(doc.at("noise"));
  c.delta = get_number(doc, "delta", c.delta);
  try {
    validate_delta(c.delta);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("samples")) {
    const Json& s = doc.at("samples");
    if (s.is_number_integer())
      c.samples = {s.get<int>()};
    else
      c.samples = get<std::vector<int>>(doc, "samples", c.samples);
    require(!c.samples.empty(), "samples must not be empty");
    for (int T : c.samples) require(T >= 1, "every sample count must be positive");
    if (c.samples.size() > 1) require(static_cast<int>(c.samples.size()) == n_u + 1, "samples must list n_u + 1 entries");
  }
  if (doc.contains("input_box")) {
    Json b = doc.at("input_box");
    if (b.contains("half_width") && !b.contains("dim")) b["dim"] = n_u;
    c.input_box = input_box_from_json(b);
    require(c.input_box->dim() == n_u, "input box dimension differs from n_u");
  }
  if (doc.contains("region")) {
    Json r = doc.at("region");
    if (r.contains("c") && !r.contains("dim")) r["dim"] = n_x;
    c.region = region_from_json(r);
    require(c.region->dim() == n_x, "region dimension differs from n_x");
  } else if (c.region && c.region->dim() != n_x) {
    c.region = StateRegion::NormBall(c.region->Rx(), n_x);
  }
  if (doc.contains("bound_kind")) c.bound_kind = bound_kind_from_string(get<std::string>(doc, "bound_kind", ""));
  c.overestimate = get<bool>(doc, "overestimate", c.overestimate);

  if (doc.contains("synthesis")) {
    const Json& s = doc.at("synthesis");
    check_keys(s, {"margin", "objective", "invariance_tolerance"}, "synthesis");
    c.synthesis.lmi_margin = get_number(s, "margin", c.synthesis.lmi_margin);
    c.synthesis.invariance_tolerance = get_number(s, "invariance_tolerance", c.synthesis.invariance_tolerance);
    if (s.contains("objective")) c.synthesis.objective = objective_from_string(s.at("objective").get<std::string>());
    require(c.synthesis.lmi_margin >= 0.0, "synthesis margin must be nonnegative");
  }
  if (doc.contains("solver")) {
    const Json& s = doc.at("solver");
    check_keys(s, {"variable_bound", "gap_tolerance", "max_newton_steps", "scale_constraints"}, "solver");
    c.solver.variable_bound = get_number(s, "variable_bound", c.solver.variable_bound);
    c.solver.gap_tolerance = get_number(s, "gap_tolerance", c.solver.gap_tolerance);
    c.solver.max_newton_steps = get<int>(s, "max_newton_steps", c.solver.max_newton_steps);
    c.solver.scale_constraints = get<bool>(s, "scale_constraints", c.solver.scale_constraints);
    require(c.solver.variable_bound > 0.0 && c.solver.gap_tolerance > 0.0 && c.solver.max_newton_steps > 0,
            "solver options must be positive");
  }
  c.max_retries = get<int>(doc, "retries", c.max_retries);
  require(c.max_retries >= 0, "retries must be nonnegative");
  if (doc.contains("closed_loop")) {
    const Json& s = doc.at("closed_loop");
    check_keys(s, {"initial_states", "steps"}, "closed_loop");
    c.closed_loop_initial_states = get<int>(s, "initial_states", c.closed_loop_initial_states);
    c.closed_loop_steps = get<int>(s, "steps", c.closed_loop_steps);
    require(c.closed_loop_initial_states >= 0 && c.closed_loop_steps >= 1, "closed_loop values out of range");
  }

  if (doc.contains("sweep")) {
    const Json& s = doc.at("sweep");
    check_keys(s, {"T_grid", "n_x_grid", "samples", "region_parameter", "values", "Qx", "Sx", "cap", "seeds",
                   "bound_kinds"},
               "sweep");
    c.T_grid = get<std::vector<int>>(s, "T_grid", c.T_grid);
    c.n_x_grid = get<std::vector<int>>(s, "n_x_grid", c.n_x_grid);
    c.sweep_samples = get<int>(s, "samples", c.sweep_samples);
    c.region_grid.parameter = get<std::string>(s, "region_parameter", c.region_grid.parameter);
    require(c.region_grid.parameter == "c" || c.region_grid.parameter == "Rx", "region_parameter must be c or Rx");
    if (s.contains("values")) c.region_grid.values = get<std::vector<double>>(s, "values", {});
    if (s.contains("Qx")) c.region_grid.Qx = matrix_from_json(s.at("Qx"));
    if (s.contains("Sx")) c.region_grid.Sx = vector_from_json(s.at("Sx"));
    c.cap = get<int>(s, "cap", c.cap);
    c.seeds = get<std::vector<std::uint64_t>>(s, "seeds", c.seeds);
    if (s.contains("bound_kinds")) {
      c.bound_kinds.clear();
      for (const auto& k : s.at("bound_kinds")) c.bound_kinds.push_back(bound_kind_from_string(k.get<std::string>()));
    }
  }
  for (int T : c.T_grid) require(T >= 1, "T_grid entries must be positive");
  for (int n : c.n_x_grid) require(n >= 1, "n_x_grid entries must be positive");
  require(c.cap >= 4, "cap must be at least 4");
  require(c.sweep_samples >= 1, "sweep samples must be positive");
  if (c.kind == ExperimentKind::kErrorVsT) require(!c.T_grid.empty(), "T_grid must not be empty");
  if (c.kind == ExperimentKind::kErrorVsNx) require(!c.n_x_grid.empty(), "n_x_grid must not be empty");
  if (c.kind == ExperimentKind::kFeasibilitySearch) {
    require(!c.region_grid.values.empty(), "sweep values must not be empty");
    require(!c.bound_kinds.empty(), "bound_kinds must not be empty");
    if (c.seeds.empty()) c.seeds = {c.seed};
    for (double v : c.region_grid.values) {
      try {
        (void)c.region_grid.region(v, n_x);
      } catch (const Error& e) {
        throw ConfigError(std::string("sweep region: ") + e.what());
      }
    }
  }
  if (c.kind == ExperimentKind::kEndToEnd || c.kind == ExperimentKind::kPendulum)
    require(c.region.has_value(), "region is required");

  if (doc.contains("pendulum")) {
    const Json& p = doc.at("pendulum");
    check_keys(p, {"mass", "length", "damping", "gravity", "sample_time", "initial_conditions", "boundary_points",
                   "steps"},
               "pendulum");
    if (p.contains("initial_conditions")) {
      c.initial_conditions.clear();
      for (const auto& ic : p.at("initial_conditions")) {
        const Eigen::VectorXd z = vector_from_json(ic);
        require(z.size() == 2, "pendulum initial conditions must have two entries");
        c.initial_conditions.emplace_back(z(0), z(1));
      }
    }
    c.boundary_points = get<int>(p, "boundary_points", c.boundary_points);
    c.pendulum_steps = get<int>(p, "steps", c.pendulum_steps);
    require(c.boundary_points >= 8 && c.pendulum_steps >= 1, "pendulum output sizes out of range");
  }
  c.output_dir = get<std::string>(doc, "output_dir", c.output_dir.string());
  return c;
}

Json read_config_document(const std::string& path) {
  try {
    if (path == "-") return Json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

ExperimentConfig parse_config(const Json& doc) {
  try {
    return parse_document(doc);
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_config_document(path)); }

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = to_string(c.kind);
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  if (c.system) {
    j["system"] = to_json(*c.system);
    j["system"]["name"] = c.system_name;
  } else {
    j["system"] = {{"name", "random"}, {"n_x", c.random_n_x}, {"n_u", c.random_n_u}, {"scale", c.random_scale}};
  }
  j["sampler"] = to_json(c.sampler);
  j["noise"] = to_json(c.noise);
  j["delta"] = c.delta;
  j["samples"] = c.samples;
  if (c.input_box)
    j["input_box"] = to_json(*c.input_box);
  else
    j["input_box"] = {{"half_width", c.input_half_width}};
  if (c.region) j["region"] = to_json(*c.region);
  j["bound_kind"] = to_string(c.bound_kind);
  j["overestimate"] = c.overestimate;
  j["synthesis"] = {{"margin", c.synthesis.lmi_margin},
                    {"objective", to_string(c.synthesis.objective)},
                    {"invariance_tolerance", c.synthesis.invariance_tolerance}};
  j["solver"] = {{"variable_bound", c.solver.variable_bound},
                 {"gap_tolerance", c.solver.gap_tolerance},
                 {"max_newton_steps", c.solver.max_newton_steps},
                 {"scale_constraints", c.solver.scale_constraints}};
  j["retries"] = c.max_retries;
  j["closed_loop"] = {{"initial_states", c.closed_loop_initial_states}, {"steps", c.closed_loop_steps}};
  Json kinds = Json::array();
  for (auto k : c.bound_kinds) kinds.push_back(to_string(k));
  j["sweep"] = {{"T_grid", c.T_grid},
                {"n_x_grid", c.n_x_grid},
                {"samples", c.sweep_samples},
                {"region_parameter", c.region_grid.parameter},
                {"values", c.region_grid.values},
                {"cap", c.cap},
                {"seeds", c.seeds},
                {"bound_kinds", kinds}};
  if (c.region_grid.Qx.size()) j["sweep"]["Qx"] = to_json(c.region_grid.Qx);
  if (c.region_grid.Sx.size()) j["sweep"]["Sx"] = to_json(c.region_grid.Sx);
  Json ics = Json::array();
  for (const auto& z : c.initial_conditions) ics.push_back({z(0), z(1)});
  j["pendulum"] = {{"mass", c.pendulum.mass},
                   {"length", c.pendulum.length},
                   {"damping", c.pendulum.damping},
                   {"gravity", c.pendulum.gravity},
                   {"sample_time", c.pendulum.sample_time},
                   {"initial_conditions", ics},
                   {"boundary_points", c.boundary_points},
                   {"steps", c.pendulum_steps}};
  j["output_dir"] = c.output_dir.string();
  return j;
}

}  // namespace bddc
