#include "bddc/data_collection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bddc/errors.hpp"
#include "bddc/parallel.hpp"
#include "bddc/serialization.hpp"

namespace bddc {

ExperimentDataset ExperimentDataset::prefix(int T) const {
  if (T < 1 || T > samples())
    throw ParameterError("prefix length " + std::to_string(T) + " outside [1, " +
                         std::to_string(samples()) + "]");
  ExperimentDataset out;
  out.input_index = input_index;
  out.X = X.topRows(T);
  out.Xplus = Xplus.topRows(T);
  if (W.rows() >= T) out.W = W.topRows(T);
  return out;
}

void validate(const CollectionPlan& plan, const BilinearSystemd& sys) {
  validate(sys);
  const int nu = sys.input_dim();
  if (static_cast<int>(plan.samples.size()) != nu + 1)
    throw DimensionError("sample list needs n_u + 1 = " + std::to_string(nu + 1) +
                         " entries, got " + std::to_string(plan.samples.size()));
  for (int T : plan.samples)
    if (T < 1) throw ParameterError("every experiment needs at least one sample");
  validate(plan.sampler);
  validate(plan.noise);
  if (plan.sampler.state_dim() != sys.state_dim())
    throw DimensionError("sampler produces " + std::to_string(plan.sampler.state_dim()) +
                         "-vectors but the system has n_x = " +
                         std::to_string(sys.state_dim()));
  if (plan.input_basis) {
    const auto& T = *plan.input_basis;
    if (T.rows() != nu || T.cols() != nu)
      throw DimensionError("input basis must be n_u x n_u");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
    if (!lu.isInvertible()) throw ParameterError("input basis is singular");
  }
}

std::uint64_t experiment_seed(std::uint64_t master, int input_index) {
  return derive_seed(master, {stream::kCollection, static_cast<std::uint64_t>(input_index)});
}

Eigen::VectorXd experiment_input(int n_u, int input_index,
                                 const std::optional<Eigen::MatrixXd>& basis) {
  if (input_index < 0 || input_index > n_u) throw ParameterError("input index out of range");
  if (input_index == 0) return Eigen::VectorXd::Zero(n_u);
  if (basis) return basis->col(input_index - 1);
  return Eigen::VectorXd::Unit(n_u, input_index - 1);
}

ExperimentDataset collect_experiment(const BilinearSystemd& sys,
                                     const CollectionPlan& plan, int input_index) {
  const int n = sys.state_dim();
  const int T = plan.samples.at(input_index);
  const Eigen::VectorXd u = experiment_input(sys.input_dim(), input_index, plan.input_basis);
  Engine rng = make_engine(experiment_seed(plan.seed, input_index));
  ExperimentDataset d;
  d.input_index = input_index;
  d.X.resize(T, n);
  d.Xplus.resize(T, n);
  d.W.resize(T, n);
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd x = sample_state(plan.sampler, rng);
    const Eigen::VectorXd w = sample_noise(plan.noise, n, rng);
    d.X.row(t) = x.transpose();
    d.W.row(t) = w.transpose();
    d.Xplus.row(t) = step(sys, x, u, w).transpose();
  }
  return d;
}

std::vector<ExperimentDataset> collect(const BilinearSystemd& sys,
                                       const CollectionPlan& plan) {
  validate(plan, sys);
  return parallel_map<ExperimentDataset>(
      sys.input_dim() + 1, [&](int i) { return collect_experiment(sys, plan, i); });
}

std::vector<ExperimentDataset> prefix(const std::vector<ExperimentDataset>& data,
                                      const std::vector<int>& samples) {
  if (samples.size() != data.size()) throw DimensionError("prefix: length list mismatch");
  std::vector<ExperimentDataset> out;
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(data[i].prefix(samples[i]));
  return out;
}

AssumptionReport validate_assumption(const ExperimentDataset& data, double sigma_x) {
  const int T = data.samples();
  if (T < 2) throw ParameterError("validate_assumption needs at least two samples");
  AssumptionReport r;
  r.samples = T;
  r.mean = data.X.colwise().mean().transpose();
  r.mean_norm = r.mean.norm();
  const Eigen::MatrixXd centered = data.X.rowwise() - r.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (T - 1);
  r.covariance_eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues();
  r.tolerance = 4.0 * sigma_x / std::sqrt(static_cast<double>(T));
  for (Eigen::Index j = 0; j < r.mean.size(); ++j)
    if (std::abs(r.mean(j)) > r.tolerance) r.flagged_coordinates.push_back(static_cast<int>(j));
  return r;
}

void write_dataset_csv(const ExperimentDataset& data, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file.string());
  const int n = data.state_dim();
  for (int j = 0; j < n; ++j) out << (j ? "," : "") << "x_" << j + 1;
  for (int j = 0; j < n; ++j) out << ",xplus_" << j + 1;
  out << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int t = 0; t < data.samples(); ++t) {
    for (int j = 0; j < n; ++j) out << (j ? "," : "") << data.X(t, j);
    for (int j = 0; j < n; ++j) out << ',' << data.Xplus(t, j);
    out << '\n';
  }
}

ExperimentDataset read_dataset_csv(const std::filesystem::path& file, int input_index) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  int columns = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (columns < 0) {
      columns = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
      continue;  // header
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != columns)
      throw ConfigError(file.string() + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (columns <= 0 || columns % 2 != 0) throw ConfigError(file.string() + ": bad header");
  const int n = columns / 2;
  ExperimentDataset d;
  d.input_index = input_index;
  d.X.resize(rows.size(), n);
  d.Xplus.resize(rows.size(), n);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int j = 0; j < n; ++j) {
      d.X(t, j) = rows[t][j];
      d.Xplus(t, j) = rows[t][n + j];
    }
  return d;
}

void export_datasets(const std::vector<ExperimentDataset>& data,
                     const CollectionPlan& plan, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["seed"] = plan.seed;
  manifest["T_list"] = plan.samples;
  manifest["sampler"] = to_json(plan.sampler);
  manifest["noise"] = to_json(plan.noise);
  if (plan.input_basis) manifest["input_basis"] = to_json(*plan.input_basis);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& d : data) {
    const std::string name = "experiment_" + std::to_string(d.input_index) + ".csv";
    write_dataset_csv(d, dir / name);
    files.push_back({{"input_index", d.input_index}, {"file", name}, {"T", d.samples()}});
  }
  manifest["experiments"] = files;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

std::vector<ExperimentDataset> import_datasets(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest.json: ") + e.what());
  }
  std::vector<ExperimentDataset> out;
  for (const auto& e : manifest.at("experiments")) {
    auto d = read_dataset_csv(dir / e.at("file").get<std::string>(), e.at("input_index").get<int>());
    if (d.samples() != e.at("T").get<int>()) throw ConfigError("manifest row count mismatch");
    out.push_back(std::move(d));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.input_index < b.input_index; });
  return out;
}

}  // namespace bddc
