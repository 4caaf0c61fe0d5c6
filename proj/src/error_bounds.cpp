#include "bddc/error_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "bddc/errors.hpp"

namespace bddc {

namespace {

const double kLog9 = std::log(9.0);
const double kForcedNumerator = 4.0 * std::sqrt(10.0) / 3.0;

// log(c * 9^{k n_x} / delta) without forming 9^{n_x}.
double log_term(double c, int n_x, double delta, int k = 1) {
  return std::log(c) + k * n_x * kLog9 - std::log(delta);
}

void check_dims(int n_x, int n_u) {
  if (n_x < 1 || n_u < 1) throw DimensionError("n_x and n_u must be at least one");
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

bool psd_dominates(const Eigen::MatrixXd& E, const Eigen::MatrixXd& S, double tol) {
  if (!E.allFinite()) return true;
  const Eigen::MatrixXd D = 0.5 * ((E - S) + (E - S).transpose());
  const double scale = std::max(1.0, spectral_norm(E));
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D, Eigen::EigenvaluesOnly).eigenvalues()(0) >=
         -tol * scale;
}

}  // namespace

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kAPriori:
      return "apriori";
    case BoundKind::kDataDependent:
      return "data";
    case BoundKind::kEllipsoidal:
      return "ellipsoidal";
  }
  return "unknown";
}

BoundKind bound_kind_from_string(const std::string& name) {
  if (name == "apriori" || name == "a-priori") return BoundKind::kAPriori;
  if (name == "data" || name == "data-dependent") return BoundKind::kDataDependent;
  if (name == "ellipsoidal") return BoundKind::kEllipsoidal;
  throw ConfigError("unknown bound kind '" + name + "'");
}

bool SpectralBoundSet::all_finite() const {
  if (!std::isfinite(eps_A)) return false;
  for (double e : eps_B)
    if (!std::isfinite(e)) return false;
  for (double e : eps_b0)
    if (!std::isfinite(e)) return false;
  return true;
}

bool EllipsoidBoundSet::all_finite() const {
  return std::all_of(finite.begin(), finite.end(), [](bool b) { return b; }) &&
         std::all_of(samples_ok.begin(), samples_ok.end(), [](bool b) { return b; });
}

bool CoverageReport::all() const {
  auto ok = [](const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
  };
  return A && ok(B) && ok(b0);
}

void validate_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
}

BurnIn burn_in_a_priori(int n_x, int n_u, double delta) {
  check_dims(n_x, n_u);
  validate_delta(delta);
  return {128.0 * log_term(8.0, n_x, delta),
          64.0 * (3.0 + 2.0 * std::sqrt(2.0)) * log_term(8.0 * n_u, n_x, delta)};
}

BurnIn burn_in_data_dependent(int n_x, int n_u, double delta) {
  check_dims(n_x, n_u);
  validate_delta(delta);
  return {0.5 * log_term(2.0, n_x, delta), 0.5 * log_term(2.0 * n_u, n_x, delta, 2)};
}

double a_priori_forced_factor(int n_x, int n_u, double delta, int T) {
  const double r = std::sqrt(2.0 * T * log_term(4.0 * n_u, n_x, delta));
  const double den = T / 2.0 - 4.0 / 3.0 * r;
  if (!(den > 0.0)) return kInfinity;
  return kForcedNumerator * r / den;
}

SpectralBoundSet a_priori_bounds(int n_x, int n_u, double delta, double sigma_w, double sigma_x,
                                 const std::vector<int>& samples) {
  check_dims(n_x, n_u);
  validate_delta(delta);
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) throw ParameterError("sigma_x must be positive");
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) throw ParameterError("sigma_w must be non-negative");
  if (static_cast<int>(samples.size()) != n_u + 1)
    throw DimensionError("sample list needs n_u + 1 entries");
  const BurnIn burn = burn_in_a_priori(n_x, n_u, delta);
  SpectralBoundSet b;
  b.kind = BoundKind::kAPriori;
  b.delta = delta;
  const double T0 = samples[0];
  b.burn_in_ok.push_back(T0 >= burn.unforced);
  b.eps_A = b.burn_in_ok[0]
                ? sigma_w / sigma_x * 16.0 * std::sqrt(T0 * log_term(4.0, n_x, delta)) / T0
                : kInfinity;
  for (int i = 1; i <= n_u; ++i) {
    const int T = samples[i];
    const double f = a_priori_forced_factor(n_x, n_u, delta, T);
    const bool ok = T >= burn.forced && std::isfinite(f);
    b.burn_in_ok.push_back(ok);
    b.eps_B.push_back(ok ? sigma_w / sigma_x * f : kInfinity);
    b.eps_b0.push_back(ok ? sigma_w * f : kInfinity);
  }
  return b;
}

double data_dependent_forced_factor(int n_x, int n_u, double delta, const GramInfo& gram) {
  validate_delta(delta);
  if (!(gram.lambda_min > 0.0)) return kInfinity;
  return kForcedNumerator * std::sqrt(2.0 * gram.samples * log_term(2.0 * n_u, n_x, delta)) / gram.lambda_min;
}

SpectralBoundSet data_dependent_bounds(const std::vector<GramInfo>& grams, double delta,
                                       double sigma_w, double sigma_x) {
  validate_delta(delta);
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) throw ParameterError("sigma_x must be positive");
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) throw ParameterError("sigma_w must be non-negative");
  const int n_u = static_cast<int>(grams.size()) - 1;
  if (n_u < 1) throw DimensionError("need Gram matrices for all n_u + 1 experiments");
  for (int i = 0; i <= n_u; ++i)
    if (grams[i].input_index != i) throw DimensionError("Gram matrices must be ordered 0..n_u");
  const int n_x = static_cast<int>(grams[0].M.rows());
  const BurnIn burn = burn_in_data_dependent(n_x, n_u, delta);
  auto inv = [](double lambda) { return lambda > 0.0 ? 1.0 / lambda : kInfinity; };

  SpectralBoundSet b;
  b.kind = BoundKind::kDataDependent;
  b.delta = delta;
  const double T0 = grams[0].samples;
  b.burn_in_ok.push_back(T0 >= burn.unforced);
  b.eps_A = b.burn_in_ok[0] ? sigma_w / sigma_x * 4.0 * std::sqrt(T0 * log_term(4.0, n_x, delta)) *
                                  inv(grams[0].lambda_min)
                            : kInfinity;
  for (int i = 1; i <= n_u; ++i) {
    if (grams[i].M.rows() != n_x + 1) throw DimensionError("forced Gram matrix must be (n_x+1) square");
    const double T = grams[i].samples;
    const bool ok = T >= burn.forced;
    b.burn_in_ok.push_back(ok);
    const double f = data_dependent_forced_factor(n_x, n_u, delta, grams[i]);
    b.eps_B.push_back(ok ? sigma_w / sigma_x * f : kInfinity);
    b.eps_b0.push_back(ok ? sigma_w * f : kInfinity);
  }
  return b;
}

EllipsoidBoundSet ellipsoidal_bounds(const std::vector<GramInfo>& grams, double delta,
                                     double sigma_w, int n_x, int n_u) {
  check_dims(n_x, n_u);
  validate_delta(delta);
  if (!(sigma_w >= 0.0) || !std::isfinite(sigma_w)) throw ParameterError("sigma_w must be non-negative");
  if (static_cast<int>(grams.size()) != n_u + 1) throw DimensionError("need n_u + 1 Gram matrices");
  EllipsoidBoundSet e;
  e.delta = delta;
  const double s2 = sigma_w * sigma_w;
  e.C_A = s2 * std::pow(2.0 * std::sqrt(n_x) + std::sqrt(2.0 * std::log(2.0 / delta)), 2);
  e.C1 = s2 * std::pow(std::sqrt(n_x + 1.0) + std::sqrt(n_x) +
                           std::sqrt(2.0 * std::log(2.0 * n_u / delta)),
                       2);

  auto scaled_inverse = [](const Eigen::MatrixXd& G, double c, bool& finite) {
    const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const auto& ev = es.eigenvalues();
    finite = ev(0) > ev(ev.size() - 1) * 1e-14 * ev.size() && ev(0) > 0.0;
    if (!finite) return Eigen::MatrixXd(Eigen::MatrixXd::Constant(G.rows(), G.cols(), kInfinity));
    const Eigen::MatrixXd inv =
        es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return Eigen::MatrixXd(c * 0.5 * (inv + inv.transpose()));
  };

  for (int i = 0; i <= n_u; ++i) {
    const auto& g = grams[i];
    if (g.input_index != i) throw DimensionError("Gram matrices must be ordered 0..n_u");
    const int dim = i == 0 ? n_x : n_x + 1;
    if (g.M.rows() != dim) throw DimensionError("Gram matrix size does not match n_x");
    e.samples_ok.push_back(g.samples >= dim);
    bool finite = false;
    Eigen::MatrixXd E = scaled_inverse(g.unscaled(), i == 0 ? e.C_A : e.C1, finite);
    if (!e.samples_ok.back()) {
      finite = false;
      E.setConstant(kInfinity);
    }
    e.finite.push_back(finite);
    if (i == 0)
      e.E_A = E;
    else
      e.E_B.push_back(E);
  }
  return e;
}

std::vector<GramInfo> grams(const std::vector<ExperimentDataset>& data, double sigma_x) {
  std::vector<GramInfo> out;
  for (const auto& d : data) out.push_back(gram(d, sigma_x));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.input_index < b.input_index; });
  return out;
}

CoverageReport check_spectral_coverage(const BilinearSystemd& truth, const EstimateSet& est,
                                       const SpectralBoundSet& bounds) {
  if (truth.state_dim() != est.state_dim() || truth.input_dim() != est.input_dim() ||
      bounds.input_dim() != truth.input_dim())
    throw DimensionError("coverage check: dimension mismatch");
  CoverageReport r;
  r.A = spectral_norm(est.A - truth.A) <= bounds.eps_A;
  for (int i = 0; i < truth.input_dim(); ++i) {
    r.B.push_back(spectral_norm(est.B[i] - truth.B[i]) <= bounds.eps_B[i]);
    r.b0.push_back((est.B0.col(i) - truth.B0.col(i)).norm() <= bounds.eps_b0[i]);
  }
  return r;
}

CoverageReport check_ellipsoid_coverage(const BilinearSystemd& truth, const EstimateSet& est,
                                        const EllipsoidBoundSet& bounds, double tol) {
  const int n = truth.state_dim();
  if (est.state_dim() != n || bounds.input_dim() != truth.input_dim())
    throw DimensionError("coverage check: dimension mismatch");
  CoverageReport r;
  const Eigen::MatrixXd dA = est.A - truth.A;
  r.A = psd_dominates(bounds.E_A, dA.transpose() * dA, tol);
  for (int i = 0; i < truth.input_dim(); ++i) {
    Eigen::MatrixXd err(n + 1, n);  // [B_hat_i - B_i, b0_hat_i - b0_i]^T
    err.topRows(n) = (est.B[i] - truth.B[i]).transpose();
    err.row(n) = (est.B0.col(i) - truth.B0.col(i)).transpose();
    r.B.push_back(psd_dominates(bounds.E_B[i], err * err.transpose(), tol));
    r.b0.push_back(true);
  }
  return r;
}

}  // namespace bddc
