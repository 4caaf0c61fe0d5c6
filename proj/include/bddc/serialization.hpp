#pragma once

#include <json.hpp>

#include <Eigen/Dense>

#include "bddc/error_bounds.hpp"
#include "bddc/identification.hpp"
#include "bddc/random.hpp"
#include "bddc/state_sampler.hpp"
#include "bddc/synthesis.hpp"
#include "bddc/uncertainty.hpp"

namespace bddc {

using Json = nlohmann::json;

/// Non-finite doubles are written as the strings "Infinity", "-Infinity"
/// and "NaN" so that the output stays valid JSON.
Json number_to_json(double v);
double number_from_json(const Json& j);

/// Matrices are arrays of rows; vectors are flat arrays.
Json to_json(const Eigen::MatrixXd& M);
Json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const Json& j);
Eigen::VectorXd vector_from_json(const Json& j);

Json to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const Json& j);

Json to_json(const LiftingSpec& spec);
LiftingSpec lifting_from_json(const Json& j);

Json to_json(const StateSamplerSpec& spec);
StateSamplerSpec sampler_from_json(const Json& j);

/// {"A", "B0", "B": [...]}; "A_i" may be given instead of "B".
Json to_json(const BilinearSystemd& sys);
BilinearSystemd system_from_json(const Json& j);

Json to_json(const GramInfo& g);
Json to_json(const SpectralBoundSet& b);
Json to_json(const EllipsoidBoundSet& b);
Json to_json(const ResidualQuadBound& q);
Json to_json(const InputBox& box);
InputBox input_box_from_json(const Json& j);

Json to_json(const StateRegion& region);
StateRegion region_from_json(const Json& j);

Json to_json(const ControllerSolution& sol);
ControllerSolution controller_from_json(const Json& j);

Json to_json(const RoaReport& r);
Json to_json(const ClosedLoopCertificate& c, bool include_trajectory = false);

}  // namespace bddc
