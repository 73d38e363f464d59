#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "shapkit/bench.hpp"
#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/masked_game.hpp"

using namespace shapkit;

TEST(Percentile, LinearInterpolation) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(percentile(v, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(percentile(v, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 5.0);
  EXPECT_THROW(percentile(std::vector<double>{}, 0.5), Error);
}

TEST(PairedTTest, KnownValues) {
  // Differences 1, 2, 3, 4: mean 2.5, sd sqrt(5/3), t = 2.5 / (sd / 2).
  const std::vector<double> a = {2, 4, 6, 8}, b = {1, 2, 3, 4};
  const auto t = paired_t_test(a, b);
  EXPECT_EQ(t.n, 4);
  EXPECT_NEAR(t.mean_difference, 2.5, 1e-15);
  EXPECT_NEAR(t.t_statistic, 2.5 / (std::sqrt(5.0 / 3.0) / 2.0), 1e-12);
  // Upper tail of Student t with 3 dof at 3.8729833 (scipy.stats.t.sf).
  EXPECT_NEAR(t.p_value, 0.015233145831085489, 1e-12);
}

TEST(Fixtures, TreeScenariosHaveTheRequestedShape) {
  const auto dense = make_tree_scenario(Scenario::dense_tree, 1);
  EXPECT_EQ(dense.tree.num_features, 10);
  EXPECT_EQ(used_features(dense.tree).size(), 10u);
  EXPECT_EQ(dense.tree.feature[0], 0);
  EXPECT_EQ(dense.background.num_rows(), 100);
  const auto sparse = make_tree_scenario(Scenario::sparse_tree, 1);
  EXPECT_EQ(sparse.tree.num_features, 30);
  EXPECT_EQ(used_features(sparse.tree), sparse.active_features);
  EXPECT_EQ(sparse.active_features.size(), 3u);
}

TEST(Convergence, DeterministicAndThreadInvariant) {
  ConvergenceOptions o;
  o.budgets = {16, 40};
  o.replicates = 6;
  o.seed = 3;
  o.exec = Exec::serial;
  const auto a = run_convergence(o);
  o.exec = Exec::parallel;
  const auto b = run_convergence(o);
  EXPECT_EQ(convergence_raw_csv(a), convergence_raw_csv(b));
  EXPECT_EQ(convergence_summary_csv(a), convergence_summary_csv(b));
  EXPECT_EQ(a.rows.size(), 3u * 2u * 6u);
}

TEST(Convergence, ExactReferenceMatchesOracle) {
  ConvergenceOptions o;
  o.budgets = {20};
  o.replicates = 2;
  o.seed = 5;
  const auto r = run_convergence(o);
  const auto& fx = r.fixture;
  std::vector<std::vector<double>> bg;
  for (int i = 0; i < fx.background.num_rows(); ++i) {
    bg.emplace_back(fx.background.row(i).begin(), fx.background.row(i).end());
  }
  const auto want = oracle::shapley_subsets(oracle::masked_table(fx.tree, fx.instance, bg), 10);
  EXPECT_LT(oracle::max_abs_diff(r.exact.attributions, want), 1e-12);
}

TEST(Convergence, SamplingGetsAtLeastKernelEvaluations) {
  for (std::uint64_t b : {32u, 128u, 512u}) {
    const int p = sampling_permutations_for_budget(b, 10);
    EXPECT_GE(static_cast<std::uint64_t>(p) * 9 + 2, b + 2);
  }
}

TEST(Masking, RowsAndDeterminism) {
  const auto fx = make_masking_fixture(2);
  MaskingOptions o;
  o.seed = 2;
  const std::vector<std::vector<double>> few(fx.instances.begin(), fx.instances.begin() + 5);
  const auto a = run_masking(fx.model, few, fx.background, o);
  const auto b = run_masking(fx.model, few, fx.background, o);
  EXPECT_EQ(masking_csv(a), masking_csv(b));
  EXPECT_EQ(a.rows.size(), 2u * 3u * 5u);
  const double all_masked = class_probability(fx.model, fx.background.means());
  for (const auto& r : a.rows) {
    if (r.fraction == 0.0) EXPECT_EQ(r.delta_log_odds, 0.0);
    if (r.fraction == 1.0) EXPECT_EQ(r.output_after, all_masked);
    EXPECT_NEAR(r.delta_log_odds, log_odds(r.output_after) - log_odds(r.output_before), 1e-12);
  }
}
