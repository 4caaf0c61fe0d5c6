#include "bddc/serialization.hpp"

#include <cmath>
#include <limits>

#include "bddc/errors.hpp"

namespace bddc {

namespace {

const Json& at(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

Json doubles(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

Json bools(const std::vector<bool>& v) {
  Json out = Json::array();
  for (bool b : v) out.push_back(b);
  return out;
}

}  // namespace

Json number_to_json(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a number, got " + j.dump());
}

Json to_json(const Eigen::MatrixXd& M) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(number_to_json(M(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw ConfigError("expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  // A flat array is a column vector.
  if (!j[0].is_array()) {
    Eigen::MatrixXd M(rows, 1);
    for (Eigen::Index r = 0; r < rows; ++r) M(r, 0) = number_from_json(j[r]);
    return M;
  }
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ConfigError("matrix rows have unequal length");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = number_from_json(j[r][c]);
  }
  return M;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError("expected a vector");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from_json(j[i]);
  return v;
}

Json to_json(const NoiseSpec& spec) { return {{"family", to_string(spec.family)}, {"sigma", spec.sigma}}; }

NoiseSpec noise_from_json(const Json& j) {
  NoiseSpec s;
  s.family = noise_family_from_string(j.value("family", std::string("gaussian")));
  s.sigma = number_from_json(at(j, "sigma"));
  validate(s);
  return s;
}

Json to_json(const LiftingSpec& spec) {
  Json coords = Json::array();
  for (const auto& c : spec.coordinates)
    coords.push_back({{"fn", c.fn == CoordinateFn::kSine ? "sine" : "identity"}, {"index", c.index}});
  return {{"base_dim", spec.base_dim}, {"coordinates", coords}};
}

LiftingSpec lifting_from_json(const Json& j) {
  const int n = at(j, "base_dim").get<int>();
  LiftingSpec spec;
  const std::string kind = j.value("kind", std::string(j.contains("coordinates") ? "table" : "identity"));
  if (kind == "identity") {
    spec = LiftingSpec::Identity(n);
  } else if (kind == "sine-augmented") {
    spec = LiftingSpec::SineAugmented(n, at(j, "sine_indices").get<std::vector<int>>());
  } else if (kind == "table") {
    spec.base_dim = n;
    for (const auto& c : at(j, "coordinates")) {
      const std::string fn = at(c, "fn").get<std::string>();
      if (fn != "identity" && fn != "sine") throw ConfigError("unknown lifting function '" + fn + "'");
      spec.coordinates.push_back({fn == "sine" ? CoordinateFn::kSine : CoordinateFn::kIdentity,
                                  at(c, "index").get<int>()});
    }
  } else {
    throw ConfigError("unknown lifting kind '" + kind + "'");
  }
  try {
    validate(spec);
  } catch (const Error& e) {
    throw ConfigError(std::string("lifting: ") + e.what());
  }
  return spec;
}

Json to_json(const StateSamplerSpec& spec) {
  Json j = {{"family", to_string(spec.family)}, {"scale", spec.scale}};
  if (spec.family == SamplerFamily::kLifted) {
    j["base"] = to_string(spec.base);
    j["lifting"] = to_json(spec.lifting);
  } else {
    j["dim"] = spec.dim;
  }
  return j;
}

StateSamplerSpec sampler_from_json(const Json& j) {
  const SamplerFamily family = sampler_family_from_string(j.value("family", std::string("gaussian")));
  const double scale = number_from_json(j.value("scale", Json(1.0)));
  StateSamplerSpec s;
  switch (family) {
    case SamplerFamily::kGaussian:
      s = StateSamplerSpec::Gaussian(at(j, "dim").get<int>(), scale);
      break;
    case SamplerFamily::kUniformBox:
      s = StateSamplerSpec::Uniform(at(j, "dim").get<int>(), scale);
      break;
    case SamplerFamily::kLifted:
      s = StateSamplerSpec::Lifted(lifting_from_json(at(j, "lifting")),
                                   sampler_family_from_string(j.value("base", std::string("gaussian"))), scale);
      break;
  }
  try {
    validate(s);
  } catch (const Error& e) {
    throw ConfigError(std::string("sampler: ") + e.what());
  }
  return s;
}

Json to_json(const BilinearSystemd& sys) {
  Json B = Json::array();
  for (const auto& b : sys.B) B.push_back(to_json(b));
  return {{"A", to_json(sys.A)}, {"B0", to_json(sys.B0)}, {"B", B}};
}

BilinearSystemd system_from_json(const Json& j) {
  const Eigen::MatrixXd A = matrix_from_json(at(j, "A"));
  const Eigen::MatrixXd B0 = matrix_from_json(at(j, "B0"));
  BilinearSystemd sys;
  if (j.contains("B")) {
    sys.A = A;
    sys.B0 = B0;
    for (const auto& b : j.at("B")) sys.B.push_back(matrix_from_json(b));
  } else {
    std::vector<Eigen::MatrixXd> Ai;
    for (const auto& a : at(j, "A_i")) Ai.push_back(matrix_from_json(a));
    sys = BilinearSystemd::FromCouplings(A, B0, Ai);
  }
  try {
    validate(sys);
  } catch (const Error& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  return sys;
}

Json to_json(const GramInfo& g) {
  return {{"input_index", g.input_index},
          {"samples", g.samples},
          {"sigma_x", g.sigma_x},
          {"lambda_min", number_to_json(g.lambda_min)},
          {"M", to_json(g.M)}};
}

Json to_json(const SpectralBoundSet& b) {
  return {{"kind", to_string(b.kind)},      {"delta", b.delta},
          {"eps_A", number_to_json(b.eps_A)}, {"eps_B", doubles(b.eps_B)},
          {"eps_b0", doubles(b.eps_b0)},      {"burn_in_ok", bools(b.burn_in_ok)}};
}

Json to_json(const EllipsoidBoundSet& b) {
  Json EB = Json::array();
  for (const auto& E : b.E_B) EB.push_back(to_json(E));
  return {{"kind", "ellipsoidal"},   {"delta", b.delta}, {"C_A", number_to_json(b.C_A)},
          {"C1", number_to_json(b.C1)}, {"E_A", to_json(b.E_A)}, {"E_B", EB},
          {"samples_ok", bools(b.samples_ok)}, {"finite", bools(b.finite)}};
}

Json to_json(const ResidualQuadBound& q) {
  Json j = {{"provenance", to_string(q.provenance)},
            {"delta", q.delta},
            {"infeasible", q.infeasible},
            {"n_x", q.n_x},
            {"n_u", q.n_u},
            {"Q", to_json(q.Q)}};
  if (!q.infeasible && q.Q.size() > 0 && q.Q.allFinite())
    j["norm"] = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q.Q, Eigen::EigenvaluesOnly)
                    .eigenvalues()
                    .cwiseAbs()
                    .maxCoeff();
  return j;
}

Json to_json(const InputBox& box) { return {{"lower", to_json(box.lower)}, {"upper", to_json(box.upper)}}; }

InputBox input_box_from_json(const Json& j) {
  InputBox box;
  if (j.contains("half_width")) {
    box = InputBox::Symmetric(at(j, "dim").get<int>(), number_from_json(j.at("half_width")));
  } else {
    box.lower = vector_from_json(at(j, "lower"));
    box.upper = vector_from_json(at(j, "upper"));
  }
  try {
    validate(box);
  } catch (const Error& e) {
    throw ConfigError(std::string("input box: ") + e.what());
  }
  return box;
}

Json to_json(const StateRegion& region) {
  return {{"Qx", to_json(region.Qx())},
          {"Sx", to_json(region.Sx())},
          {"Rx", region.Rx()},
          {"Qt", to_json(region.Qt())},
          {"St", to_json(region.St())},
          {"Rt", region.Rt()},
          {"condition", region.condition()}};
}

StateRegion region_from_json(const Json& j) {
  try {
    if (j.contains("c")) return StateRegion::NormBall(number_from_json(j.at("c")), at(j, "dim").get<int>());
    const Eigen::MatrixXd Qx = matrix_from_json(at(j, "Qx"));
    const Eigen::VectorXd Sx =
        j.contains("Sx") ? vector_from_json(j.at("Sx")) : Eigen::VectorXd::Zero(Qx.rows());
    return StateRegion(Qx, Sx, number_from_json(at(j, "Rx")));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
}

Json to_json(const ControllerSolution& sol) {
  Json j = {{"status", to_string(sol.status)}, {"diagnostics", sol.diagnostics}};
  if (sol.status == SynthesisStatus::kFeasible) {
    j["P"] = to_json(sol.P);
    j["L"] = to_json(sol.L);
    j["L_w"] = to_json(sol.Lw);
    j["Lambda"] = to_json(sol.Lambda);
    j["nu"] = sol.nu;
    j["tau"] = sol.tau;
    j["objective"] = sol.objective;
    j["main_lmi_min_eig"] = sol.main_lmi_min_eig;
    j["invariance_lmi_max_eig"] = sol.invariance_lmi_max_eig;
  }
  return j;
}

ControllerSolution controller_from_json(const Json& j) {
  ControllerSolution sol;
  const std::string status = at(j, "status").get<std::string>();
  if (status == "feasible")
    sol.status = SynthesisStatus::kFeasible;
  else if (status == "infeasible")
    sol.status = SynthesisStatus::kInfeasible;
  else if (status == "solver-error")
    sol.status = SynthesisStatus::kSolverError;
  else
    throw ConfigError("unknown controller status '" + status + "'");
  sol.diagnostics = j.value("diagnostics", std::string());
  if (sol.status != SynthesisStatus::kFeasible) return sol;
  sol.P = matrix_from_json(at(j, "P"));
  sol.L = matrix_from_json(at(j, "L"));
  sol.Lw = matrix_from_json(at(j, "L_w"));
  sol.Lambda = matrix_from_json(at(j, "Lambda"));
  sol.nu = number_from_json(at(j, "nu"));
  sol.tau = number_from_json(at(j, "tau"));
  sol.objective = j.contains("objective") ? number_from_json(j.at("objective")) : sol.P.trace();
  sol.main_lmi_min_eig = number_from_json(j.value("main_lmi_min_eig", Json(0.0)));
  sol.invariance_lmi_max_eig = number_from_json(j.value("invariance_lmi_max_eig", Json(0.0)));
  const int n_x = static_cast<int>(sol.P.rows());
  const int n_u = static_cast<int>(sol.L.rows());
  if (sol.P.cols() != n_x || sol.L.cols() != n_x || sol.Lw.rows() != n_u || sol.Lw.cols() != n_u * n_x ||
      sol.Lambda.rows() != n_u || sol.Lambda.cols() != n_u)
    throw ConfigError("controller matrices have inconsistent dimensions");
  return sol;
}

Json to_json(const RoaReport& r) {
  return {{"trace", r.trace},
          {"semi_axes", to_json(r.semi_axes)},
          {"axes", to_json(r.axes)},
          {"invariance_max_eig", r.invariance_max_eig},
          {"invariance_holds", r.invariance_holds},
          {"is_norm_ball", r.is_norm_ball},
          {"norm_ball_check", r.norm_ball_check},
          {"sampled_points", r.sampled_points},
          {"sampled_violations", r.sampled_violations},
          {"contained", r.contained()}};
}

Json to_json(const ClosedLoopCertificate& c, bool include_trajectory) {
  Json j = {{"passed", c.passed},
            {"monotone", c.monotone},
            {"stayed_in_region", c.stayed_in_region},
            {"rho", c.rho},
            {"rho_envelope", c.rho_envelope},
            {"max_input_norm", c.max_input_norm},
            {"steps", static_cast<int>(c.states.size()) - 1},
            {"failure", c.failure}};
  if (include_trajectory) {
    Json states = Json::array();
    for (const auto& x : c.states) states.push_back(to_json(x));
    j["states"] = states;
    j["lyapunov"] = doubles(c.lyapunov);
  }
  return j;
}

}  // namespace bddc
