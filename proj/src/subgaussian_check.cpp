#include "bddc/subgaussian_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bddc/errors.hpp"
#include "bddc/parallel.hpp"
#include "bddc/random.hpp"

namespace bddc {

std::string SubGaussianReport::summary() const {
  std::ostringstream s;
  s << (pass ? "PASS" : "FAIL") << ": max excess " << max_excess << ", band-adjusted " << max_excess_lower
    << " (band quantile " << band_quantile << ", " << directions << " directions x " << grid_points << " lambdas)";
  return s.str();
}

namespace {

Eigen::MatrixXd direction_grid(int n, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> dirs;
  if (n == 1) {
    dirs.push_back(Eigen::VectorXd::Ones(1));
  } else if (n == 2) {
    // v and -v are covered by the symmetric lambda grid.
    for (int k = 0; k < count; ++k) {
      const double a = std::numbers::pi * k / count;
      dirs.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  } else {
    for (int i = 0; i < n; ++i) dirs.push_back(Eigen::VectorXd::Unit(n, i));
    Engine rng = make_engine(seed);
    while (static_cast<int>(dirs.size()) < std::max(count, n)) dirs.push_back(unit_sphere(n, rng));
  }
  Eigen::MatrixXd V(n, dirs.size());
  for (std::size_t j = 0; j < dirs.size(); ++j) V.col(j) = dirs[j];
  return V;
}

}  // namespace

SubGaussianReport empirical_subgaussian_check(const Eigen::MatrixXd& samples, double sigma2,
                                              const SubGaussianCheckOptions& opt) {
  const int N = static_cast<int>(samples.rows());
  const int n = static_cast<int>(samples.cols());
  if (N < opt.min_samples) throw ParameterError("sub-Gaussian check needs at least " +
                                                std::to_string(opt.min_samples) + " samples");
  if (n < 1) throw DimensionError("samples must have at least one column");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ParameterError("claimed variance proxy must be positive");
  if (opt.lambda_points < 2 || opt.batches < 2 || opt.bootstrap < 10 || N < opt.batches)
    throw ParameterError("invalid sub-Gaussian check options");

  const double sigma = std::sqrt(sigma2);
  const int half = opt.lambda_points / 2;  // lambda = 0 is trivially on the envelope
  std::vector<double> lambdas;
  for (int k = 1; k <= half; ++k) {
    const double l = opt.max_lambda_sigma / sigma * k / half;
    lambdas.push_back(-l);
    lambdas.push_back(l);
  }
  std::sort(lambdas.begin(), lambdas.end());
  const int L = static_cast<int>(lambdas.size());
  const Eigen::MatrixXd V = direction_grid(n, opt.directions, opt.seed);
  const int D = static_cast<int>(V.cols());
  const int G = D * L;
  const int K = opt.batches;

  // Batch means of exp(lambda <v, xi>), one column per grid point. The
  // exponent is shifted by its maximum per grid point to avoid overflow.
  const Eigen::MatrixXd proj = samples * V;  // N x D
  Eigen::MatrixXd batch(K, G);
  Eigen::VectorXd shift(G);
  for (int d = 0; d < D; ++d) {
    const double pmax = proj.col(d).maxCoeff();
    const double pmin = proj.col(d).minCoeff();
    for (int l = 0; l < L; ++l) {
      const int g = d * L + l;
      const double lam = lambdas[l];
      shift(g) = lam > 0 ? lam * pmax : lam * pmin;
      for (int k = 0; k < K; ++k) {
        const int lo = static_cast<int>(static_cast<long long>(N) * k / K);
        const int hi = static_cast<int>(static_cast<long long>(N) * (k + 1) / K);
        double s = 0.0;
        for (int t = lo; t < hi; ++t) s += std::exp(lam * proj(t, d) - shift(g));
        batch(k, g) = s / (hi - lo);
      }
    }
  }
  auto log_mgf = [&](const Eigen::VectorXd& means) {
    Eigen::VectorXd out(G);
    for (int g = 0; g < G; ++g) out(g) = std::log(means(g)) + shift(g);
    return out;
  };
  const Eigen::VectorXd est = log_mgf(batch.colwise().mean().transpose());

  // Bootstrap over batches.
  const int B = opt.bootstrap;
  std::vector<Eigen::VectorXd> reps = parallel_map<Eigen::VectorXd>(B, [&](int b) {
    Engine rng = make_engine(derive_seed(opt.seed, {stream::kBootstrap, static_cast<std::uint64_t>(b)}));
    std::uniform_int_distribution<int> pick(0, K - 1);
    Eigen::VectorXd m = Eigen::VectorXd::Zero(G);
    for (int k = 0; k < K; ++k) m += batch.row(pick(rng)).transpose();
    return log_mgf(m / K);
  });
  Eigen::VectorXd se = Eigen::VectorXd::Zero(G);
  for (const auto& r : reps) se += (r - est).cwiseAbs2();
  se = (se / (B - 1)).cwiseSqrt().cwiseMax(1e-300);
  std::vector<double> tmax(B);
  for (int b = 0; b < B; ++b) tmax[b] = ((reps[b] - est).cwiseAbs().array() / se.array()).maxCoeff();
  std::sort(tmax.begin(), tmax.end());
  const int qi = std::min(B - 1, static_cast<int>(std::ceil(opt.confidence * B)) - 1);

  SubGaussianReport r;
  r.band_quantile = tmax[std::max(qi, 0)];
  r.directions = D;
  r.grid_points = L;
  r.max_excess = -std::numeric_limits<double>::infinity();
  r.max_excess_lower = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < G; ++g) {
    const double lam = lambdas[g % L];
    const double envelope = 0.5 * lam * lam * sigma2;
    const double excess = est(g) - envelope;
    const double lower = excess - r.band_quantile * se(g);
    if (excess > r.max_excess) {
      r.max_excess = excess;
      r.worst_direction = V.col(g / L);
      r.worst_lambda = lam;
    }
    r.max_excess_lower = std::max(r.max_excess_lower, lower);
  }
  r.pass = r.max_excess_lower <= 0.0;
  return r;
}

Eigen::MatrixXd uniform_sine_samples(double a, int n, std::uint64_t seed) {
  if (!(a > 0.0)) throw ParameterError("half-width must be positive");
  Engine rng = make_engine(seed);
  std::uniform_real_distribution<double> unif(-a, a);
  Eigen::MatrixXd S(n, 2);
  for (int t = 0; t < n; ++t) {
    const double x = unif(rng);
    S(t, 0) = x;
    S(t, 1) = std::sin(x);
  }
  return S;
}

}  // namespace bddc
