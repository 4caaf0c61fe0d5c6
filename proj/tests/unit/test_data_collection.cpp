#include <gtest/gtest.h>

#include <filesystem>

#include "bddc/data_collection.hpp"
#include "bddc/errors.hpp"
#include "bddc/systems.hpp"

namespace bddc {
namespace {

CollectionPlan make_plan(int n_x, int n_u, int T, std::uint64_t seed) {
  CollectionPlan plan;
  plan.samples = std::vector<int>(n_u + 1, T);
  plan.sampler = StateSamplerSpec::Gaussian(n_x, 1.0);
  plan.noise = {NoiseFamily::kGaussian, 0.1};
  plan.seed = seed;
  return plan;
}

TEST(CollectTest, ShapesAndSuccessorsMatchTheSystem) {
  const BilinearSystemd sys = random_system(3, 2, 1);
  CollectionPlan plan = make_plan(3, 2, 50, 9);
  plan.samples = {40, 50, 60};
  const auto data = collect(sys, plan);
  ASSERT_EQ(data.size(), 3u);
  for (int i = 0; i <= 2; ++i) {
    EXPECT_EQ(data[i].input_index, i);
    EXPECT_EQ(data[i].samples(), plan.samples[i]);
    const Eigen::VectorXd u = experiment_input(2, i);
    for (int t = 0; t < data[i].samples(); ++t) {
      const Eigen::VectorXd x = data[i].X.row(t).transpose();
      const Eigen::VectorXd w = data[i].W.row(t).transpose();
      EXPECT_LT((step(sys, x, u, w) - data[i].Xplus.row(t).transpose()).norm(), 1e-12);
    }
  }
}

TEST(CollectTest, SeedDeterminesData) {
  const BilinearSystemd sys = academic_system();
  const auto a = collect(sys, make_plan(2, 1, 100, 3));
  const auto b = collect(sys, make_plan(2, 1, 100, 3));
  const auto c = collect(sys, make_plan(2, 1, 100, 4));
  EXPECT_EQ(a[1].X, b[1].X);
  EXPECT_EQ(a[0].Xplus, b[0].Xplus);
  EXPECT_NE(a[1].X, c[1].X);
  // Experiments draw from distinct streams.
  EXPECT_NE(a[0].X.row(0), a[1].X.row(0));
}

TEST(CollectTest, PrefixEqualsShorterCollection) {
  const BilinearSystemd sys = academic_system();
  const auto full = collect(sys, make_plan(2, 1, 500, 8));
  const auto short_data = collect(sys, make_plan(2, 1, 120, 8));
  const auto pre = prefix(full, {120, 120});
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(pre[i].X, short_data[i].X);
    EXPECT_EQ(pre[i].Xplus, short_data[i].Xplus);
  }
  EXPECT_THROW(full[0].prefix(501), ParameterError);
}

TEST(CollectTest, InputBasisColumnsAreApplied) {
  const BilinearSystemd sys = random_system(2, 2, 4);
  CollectionPlan plan = make_plan(2, 2, 10, 1);
  Eigen::Matrix2d basis;
  basis << 1, 1, 0, 2;
  plan.input_basis = Eigen::MatrixXd(basis);
  const auto d = collect_experiment(sys, plan, 2);
  const Eigen::VectorXd u = basis.col(1);
  const Eigen::VectorXd x = d.X.row(0).transpose();
  EXPECT_LT((step(sys, x, u, Eigen::VectorXd(d.W.row(0).transpose())) - d.Xplus.row(0).transpose()).norm(),
            1e-12);
  plan.input_basis = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(validate(plan, sys), ParameterError);
}

TEST(CollectTest, ValidationRejectsBadPlans) {
  const BilinearSystemd sys = academic_system();
  CollectionPlan plan = make_plan(2, 1, 10, 0);
  plan.samples = {10};
  EXPECT_THROW(validate(plan, sys), DimensionError);
  plan = make_plan(3, 1, 10, 0);
  EXPECT_THROW(validate(plan, sys), DimensionError);
  plan = make_plan(2, 1, 0, 0);
  EXPECT_THROW(validate(plan, sys), ParameterError);
}

TEST(CollectTest, ExportImportRoundTripIsExact) {
  const BilinearSystemd sys = random_system(3, 2, 6);
  const CollectionPlan plan = make_plan(3, 2, 25, 2);
  const auto data = collect(sys, plan);
  const auto dir = std::filesystem::temp_directory_path() / "bddc_roundtrip";
  std::filesystem::remove_all(dir);
  export_datasets(data, plan, dir);
  const auto back = import_datasets(dir);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].input_index, data[i].input_index);
    EXPECT_EQ(back[i].X, data[i].X);
    EXPECT_EQ(back[i].Xplus, data[i].Xplus);
  }
  std::filesystem::remove_all(dir);
}

TEST(CollectTest, AssumptionCheckFlagsBiasedSamples) {
  const BilinearSystemd sys = academic_system();
  auto d = collect(sys, make_plan(2, 1, 5000, 1))[0];
  EXPECT_FALSE(validate_assumption(d, 1.0).flagged());
  d.X.col(1).array() += 0.5;
  const auto report = validate_assumption(d, 1.0);
  ASSERT_TRUE(report.flagged());
  EXPECT_EQ(report.flagged_coordinates.front(), 1);
}

}  // namespace
}  // namespace bddc
