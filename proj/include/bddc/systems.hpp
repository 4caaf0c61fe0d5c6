#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bddc/bilinear_system.hpp"

namespace bddc {

/// x+ = [1 1; 0 1] x + [1; 1] u + u x.
BilinearSystemd academic_system();

/// Cooled stirred-tank reactor, linearized deviation model:
///   x+ = [1.425 0.1; -0.625 0.8] x + [-0.025; 0] u + u [-0.1 0; 0 0] x.
BilinearSystemd cstr_system();

/// Lifted inverted pendulum with default parameters, see lifting.hpp.
BilinearSystemd pendulum_system();

/// "academic", "cstr" or "pendulum".
BilinearSystemd named_system(const std::string& name);
std::vector<std::string> named_systems();

/// Random system with entries N(0, scale^2 / n_x) in A, B0 and every A_i.
BilinearSystemd random_system(int n_x, int n_u, std::uint64_t seed, double scale = 1.0);

}  // namespace bddc
