#include "bddc/random.hpp"

#include <cmath>

#include "bddc/errors.hpp"

namespace bddc {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Engine(seq);
}

void validate(const NoiseSpec& spec) {
  if (!std::isfinite(spec.sigma) || spec.sigma < 0.0)
    throw ParameterError("noise sigma must be finite and non-negative");
}

Eigen::VectorXd standard_normal(int n, Engine& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

Eigen::VectorXd uniform_box(int n, double half_width, Engine& rng) {
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

Eigen::VectorXd unit_sphere(int n, Engine& rng) {
  Eigen::VectorXd v;
  do {
    v = standard_normal(n, rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, Engine& rng) {
  if (n < 0) throw DimensionError("noise dimension must be non-negative");
  validate(spec);
  switch (spec.family) {
    case NoiseFamily::kGaussian:
      return spec.sigma * standard_normal(n, rng);
    case NoiseFamily::kUniformBox:
      return uniform_box(n, 1.0, rng) * spec.sigma;
    case NoiseFamily::kRademacher: {
      std::bernoulli_distribution coin(0.5);
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = coin(rng) ? spec.sigma : -spec.sigma;
      return v;
    }
  }
  throw ParameterError("unknown noise family");
}

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n,
                             std::uint64_t seed) {
  Engine rng = make_engine(seed);
  return sample_noise(spec, n, rng);
}

Eigen::MatrixXd sample_noise_rows(const NoiseSpec& spec, int rows, int n,
                                  Engine& rng) {
  Eigen::MatrixXd out(rows, n);
  for (int t = 0; t < rows; ++t) out.row(t) = sample_noise(spec, n, rng).transpose();
  return out;
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGaussian:
      return "gaussian";
    case NoiseFamily::kUniformBox:
      return "uniform";
    case NoiseFamily::kRademacher:
      return "rademacher";
  }
  return "unknown";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "uniform") return NoiseFamily::kUniformBox;
  if (name == "rademacher") return NoiseFamily::kRademacher;
  throw ConfigError("unknown noise family '" + name + "'");
}

}  // namespace bddc
