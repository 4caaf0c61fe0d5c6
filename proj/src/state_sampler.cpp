#include "bddc/state_sampler.hpp"

#include <cmath>

#include "bddc/errors.hpp"

namespace bddc {

StateSamplerSpec StateSamplerSpec::Gaussian(int n, double s) {
  StateSamplerSpec spec;
  spec.family = SamplerFamily::kGaussian;
  spec.dim = n;
  spec.scale = s;
  return spec;
}

StateSamplerSpec StateSamplerSpec::Uniform(int n, double a) {
  StateSamplerSpec spec = Gaussian(n, a);
  spec.family = SamplerFamily::kUniformBox;
  return spec;
}

StateSamplerSpec StateSamplerSpec::Lifted(const LiftingSpec& lifting,
                                          SamplerFamily base, double scale) {
  StateSamplerSpec spec;
  spec.family = SamplerFamily::kLifted;
  spec.base = base;
  spec.dim = lifting.base_dim;
  spec.scale = scale;
  spec.lifting = lifting;
  return spec;
}

void validate(const StateSamplerSpec& spec) {
  if (!std::isfinite(spec.scale) || spec.scale <= 0.0)
    throw ParameterError("sampler scale must be positive and finite");
  if (spec.family == SamplerFamily::kLifted) {
    validate(spec.lifting);
    if (spec.base == SamplerFamily::kLifted)
      throw ParameterError("lifted sampler needs a Gaussian or uniform base");
  } else if (spec.dim <= 0) {
    throw DimensionError("sampler dimension must be positive");
  }
}

double variance_proxy(const StateSamplerSpec& spec) {
  validate(spec);
  switch (spec.family) {
    case SamplerFamily::kGaussian:
    case SamplerFamily::kUniformBox:
      return spec.scale * spec.scale;
    case SamplerFamily::kLifted:
      return spec.base == SamplerFamily::kGaussian
                 ? gaussian_lifted_variance_proxy(spec.lifting, spec.scale)
                 : uniform_lifted_variance_proxy(spec.lifting, spec.scale);
  }
  return 0.0;
}

double sigma_x(const StateSamplerSpec& spec) { return std::sqrt(variance_proxy(spec)); }

Eigen::VectorXd sample_state(const StateSamplerSpec& spec, Engine& rng) {
  switch (spec.family) {
    case SamplerFamily::kGaussian:
      return spec.scale * standard_normal(spec.dim, rng);
    case SamplerFamily::kUniformBox:
      return uniform_box(spec.dim, 1.0, rng) * spec.scale;
    case SamplerFamily::kLifted: {
      const Eigen::VectorXd z = spec.base == SamplerFamily::kGaussian
                                    ? Eigen::VectorXd(spec.scale * standard_normal(spec.dim, rng))
                                    : Eigen::VectorXd(uniform_box(spec.dim, 1.0, rng) * spec.scale);
      return lift(spec.lifting, z);
    }
  }
  throw ParameterError("unknown sampler family");
}

std::string to_string(SamplerFamily family) {
  switch (family) {
    case SamplerFamily::kGaussian:
      return "gaussian";
    case SamplerFamily::kUniformBox:
      return "uniform";
    case SamplerFamily::kLifted:
      return "lifted";
  }
  return "unknown";
}

SamplerFamily sampler_family_from_string(const std::string& name) {
  if (name == "gaussian") return SamplerFamily::kGaussian;
  if (name == "uniform") return SamplerFamily::kUniformBox;
  if (name == "lifted") return SamplerFamily::kLifted;
  throw ConfigError("unknown sampler family '" + name + "'");
}

}  // namespace bddc
