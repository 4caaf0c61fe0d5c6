#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bddc/error_bounds.hpp"
#include "bddc/lifting.hpp"

namespace bddc::testing {

// Rows of tests/data/golden_bounds.csv keyed by column name.
inline std::vector<std::map<std::string, double>> read_golden(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::map<std::string, double> row;
    std::size_t k = 0;
    for (std::string cell; std::getline(ss, cell, ',') && k < header.size(); ++k)
      row[header[k]] = cell == "inf" ? kInfinity : std::stod(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct GoldenComparison {
  int points = 0;
  int values = 0;
  double max_relative_error = 0.0;
  std::string worst;
};

// Relative difference; both infinite counts as a match, one infinite as 1.
inline double relative_error(double got, double want) {
  if (std::isinf(want) || std::isinf(got)) return std::isinf(want) && std::isinf(got) ? 0.0 : 1.0;
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Recomputes every golden column with the library.
inline GoldenComparison compare_golden(const std::string& path) {
  GoldenComparison cmp;
  for (const auto& row : read_golden(path)) {
    const int n_x = static_cast<int>(row.at("n_x"));
    const int n_u = static_cast<int>(row.at("n_u"));
    const double delta = row.at("delta");
    const double sw = row.at("sigma_w");
    const double sx = row.at("sigma_x");
    const int T0 = static_cast<int>(row.at("T0"));
    const int Ti = static_cast<int>(row.at("Ti"));

    std::vector<int> samples(n_u + 1, Ti);
    samples[0] = T0;
    const SpectralBoundSet ap = a_priori_bounds(n_x, n_u, delta, sw, sx, samples);
    const BurnIn ap_burn = burn_in_a_priori(n_x, n_u, delta);

    // Gram matrices lambda I reproduce any requested lambda_min.
    std::vector<GramInfo> grams;
    for (int i = 0; i <= n_u; ++i) {
      GramInfo g;
      g.input_index = i;
      g.samples = i == 0 ? T0 : Ti;
      g.lambda_min = i == 0 ? row.at("lambda0") : row.at("lambdai");
      g.sigma_x = 1.0;
      g.M = g.lambda_min * Eigen::MatrixXd::Identity(i == 0 ? n_x : n_x + 1, i == 0 ? n_x : n_x + 1);
      grams.push_back(g);
    }
    const SpectralBoundSet dd = data_dependent_bounds(grams, delta, sw, sx);
    const BurnIn dd_burn = burn_in_data_dependent(n_x, n_u, delta);
    const EllipsoidBoundSet el = ellipsoidal_bounds(grams, delta, sw, n_x, n_u);

    const std::map<std::string, double> got = {
        {"ap_epsA", ap.eps_A},        {"ap_epsB", ap.eps_B[0]},     {"ap_epsb0", ap.eps_b0[0]},
        {"ap_Tbar0", ap_burn.unforced}, {"ap_Tbari", ap_burn.forced}, {"dd_epsA", dd.eps_A},
        {"dd_epsB", dd.eps_B[0]},     {"dd_epsb0", dd.eps_b0[0]},   {"dd_Tbar0", dd_burn.unforced},
        {"dd_Tbari", dd_burn.forced}, {"C_A", el.C_A},              {"C1", el.C1},
        {"proxy", variance_proxy_bound(row.at("a"))},
    };
    for (const auto& [name, value] : got) {
      const double err = relative_error(value, row.at(name));
      ++cmp.values;
      if (err > cmp.max_relative_error) {
        cmp.max_relative_error = err;
        cmp.worst = name + " at point " + std::to_string(cmp.points);
      }
    }
    // Ellipsoid matrices: E = C M^{-1} with the unscaled Gram matrix.
    for (const auto& [value, name] : {std::pair{el.E_A(0, 0), "E_A"}, std::pair{el.E_B[0](0, 0), "E_B"}}) {
      const double err = relative_error(value, row.at(name));
      ++cmp.values;
      if (err > cmp.max_relative_error) {
        cmp.max_relative_error = err;
        cmp.worst = std::string(name) + " at point " + std::to_string(cmp.points);
      }
    }
    ++cmp.points;
  }
  return cmp;
}

}  // namespace bddc::testing
