#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace bddc {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t z);

/// Counter-based child seed: the result depends only on (master, path), so
/// streams for different experiments or trials never overlap and can be
/// generated in any order.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

Engine make_engine(std::uint64_t seed);

/// Stream tags used with derive_seed.
namespace stream {
inline constexpr std::uint64_t kCollection = 0x636f6c6cULL;
inline constexpr std::uint64_t kTrial = 0x7472696cULL;
inline constexpr std::uint64_t kSystem = 0x73797374ULL;
inline constexpr std::uint64_t kInitialState = 0x78307830ULL;
inline constexpr std::uint64_t kAttempt = 0x61747470ULL;
inline constexpr std::uint64_t kBootstrap = 0x626f6f74ULL;
}  // namespace stream

enum class NoiseFamily { kGaussian, kUniformBox, kRademacher };

/// Zero-mean i.i.d. noise. `sigma` is the sub-Gaussian parameter:
///   kGaussian    w ~ N(0, sigma^2 I)
///   kUniformBox  w ~ U([-sigma, sigma]^n)   (Hoeffding proxy sigma^2)
///   kRademacher  w in {-sigma, +sigma}^n    (proxy sigma^2)
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  double sigma = 0.0;
};

void validate(const NoiseSpec& spec);

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, Engine& rng);
Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n,
                             std::uint64_t seed);

/// Fills a T x n matrix row by row from `rng`.
Eigen::MatrixXd sample_noise_rows(const NoiseSpec& spec, int rows, int n,
                                  Engine& rng);

std::string to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

Eigen::VectorXd standard_normal(int n, Engine& rng);
Eigen::VectorXd uniform_box(int n, double half_width, Engine& rng);

/// Uniform direction on the unit sphere.
Eigen::VectorXd unit_sphere(int n, Engine& rng);

}  // namespace bddc
