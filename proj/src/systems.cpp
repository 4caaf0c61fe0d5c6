#include "bddc/systems.hpp"

#include <cmath>

#include "bddc/errors.hpp"
#include "bddc/lifting.hpp"
#include "bddc/random.hpp"

namespace bddc {

BilinearSystemd academic_system() {
  Eigen::MatrixXd A(2, 2), B0(2, 1);
  A << 1, 1, 0, 1;
  B0 << 1, 1;
  return BilinearSystemd::FromCouplings(A, B0, {Eigen::MatrixXd::Identity(2, 2)});
}

BilinearSystemd cstr_system() {
  Eigen::MatrixXd A(2, 2), B0(2, 1), A1(2, 2);
  A << 1.425, 0.1, -0.625, 0.8;
  B0 << -0.025, 0;
  A1 << -0.1, 0, 0, 0;
  return BilinearSystemd::FromCouplings(A, B0, {A1});
}

BilinearSystemd pendulum_system() { return pendulum_lifted_system(); }

BilinearSystemd named_system(const std::string& name) {
  if (name == "academic") return academic_system();
  if (name == "cstr") return cstr_system();
  if (name == "pendulum") return pendulum_system();
  throw ConfigError("unknown named system '" + name + "'");
}

std::vector<std::string> named_systems() { return {"academic", "cstr", "pendulum"}; }

BilinearSystemd random_system(int n_x, int n_u, std::uint64_t seed, double scale) {
  if (n_x < 1 || n_u < 1) throw DimensionError("random_system needs positive dimensions");
  Engine rng = make_engine(seed);
  const double s = scale / std::sqrt(static_cast<double>(n_x));
  auto draw = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int j = 0; j < c; ++j) M.col(j) = s * standard_normal(r, rng);
    return M;
  };
  const Eigen::MatrixXd A = draw(n_x, n_x);
  const Eigen::MatrixXd B0 = draw(n_x, n_u);
  std::vector<Eigen::MatrixXd> Ai;
  for (int i = 0; i < n_u; ++i) Ai.push_back(draw(n_x, n_x));
  return BilinearSystemd::FromCouplings(A, B0, Ai);
}

}  // namespace bddc
