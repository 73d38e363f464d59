#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "shapkit/axioms.hpp"
#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/fixtures.hpp"

using namespace shapkit;

TEST(Exact, MatchesSubsetAndOrderingOracles) {
  std::mt19937_64 rng(21);
  for (int m = 1; m <= 7; ++m) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto v = oracle::random_table(m, rng);
      const TabularGame g(m, v);
      const auto e = shapley_exact(g);
      EXPECT_LT(oracle::max_abs_diff(e.attributions, oracle::shapley_subsets(v, m)), 1e-12);
      EXPECT_LT(oracle::max_abs_diff(e.attributions, oracle::shapley_orderings(v, m)), 1e-12);
      EXPECT_EQ(e.base_value, v.front());
      EXPECT_EQ(e.fx_full, v.back());
      EXPECT_TRUE(check_local_accuracy(e, 1e-12));
    }
  }
}

TEST(Exact, SerialAndParallelAgreeBitwise) {
  std::mt19937_64 rng(22);
  const TabularGame g(12, oracle::random_table(12, rng));
  EXPECT_EQ(shapley_exact(g, Exec::serial).attributions,
            shapley_exact(g, Exec::parallel).attributions);
}

TEST(Exact, EvaluationCounts) {
  std::mt19937_64 rng(23);
  const TabularGame g(5, oracle::random_table(5, rng));
  EXPECT_EQ(shapley_exact(g).evaluations_used, 32u);
  EXPECT_EQ(shapley_permutation_exact(g).evaluations_used, 32u);
}

TEST(Exact, CapacityLimits) {
  const FunctionGame big(21, [](Mask) { return 0.0; });
  EXPECT_THROW(shapley_exact(big), Error);
  const FunctionGame nine(9, [](Mask) { return 0.0; });
  EXPECT_THROW(shapley_permutation_exact(nine), Error);
}

TEST(Exact, SicknessGame) {
  const auto e = shapley_exact(sickness_game());
  EXPECT_EQ(e.attributions, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(e.base_value, 0.0);
}

TEST(Sampling, AllOrderingsGiveExactValues) {
  std::mt19937_64 rng(24);
  const auto v = oracle::random_table(4, rng);
  const TabularGame g(4, v);
  const auto orders = all_orderings(4);
  EXPECT_EQ(orders.size(), 24u);
  const auto e = sampling_shap_orderings(g, orders);
  EXPECT_LT(oracle::max_abs_diff(e.attributions, oracle::shapley_orderings(v, 4)), 1e-12);
}

TEST(Sampling, DeterministicAndThreadInvariant) {
  std::mt19937_64 rng(25);
  const TabularGame g(9, oracle::random_table(9, rng));
  SamplingConfig cfg;
  cfg.n_permutations = 300;
  cfg.seed = 77;
  const auto a = sampling_shap(g, cfg, Exec::serial);
  const auto b = sampling_shap(g, cfg, Exec::parallel);
  const auto c = sampling_shap(g, cfg, Exec::parallel);
  EXPECT_EQ(a.attributions, b.attributions);
  EXPECT_EQ(b.attributions, c.attributions);
  cfg.seed = 78;
  EXPECT_NE(sampling_shap(g, cfg).attributions, a.attributions);
}

TEST(Sampling, LocalAccuracyAndCost) {
  std::mt19937_64 rng(26);
  const TabularGame g(6, oracle::random_table(6, rng));
  SamplingConfig cfg;
  cfg.n_permutations = 40;
  const auto e = sampling_shap(g, cfg);
  EXPECT_TRUE(check_local_accuracy(e, 1e-9));
  EXPECT_EQ(e.evaluations_used, 40u * 5u + 2u);
}

TEST(Sampling, ConvergesToExact) {
  std::mt19937_64 rng(27);
  const auto v = oracle::random_table(5, rng);
  const TabularGame g(5, v);
  SamplingConfig cfg;
  cfg.n_permutations = 20000;
  const auto e = sampling_shap(g, cfg);
  EXPECT_LT(oracle::max_abs_diff(e.attributions, oracle::shapley_subsets(v, 5)), 0.02);
}

TEST(Sampling, RejectsBadCount) {
  const TabularGame g(2, {0, 1, 1, 2});
  SamplingConfig cfg;
  cfg.n_permutations = 0;
  EXPECT_THROW(sampling_shap(g, cfg), Error);
}

TEST(Axioms, DummyAndSymmetryHold) {
  std::mt19937_64 rng(28);
  // v(S) = u(S without feature 3) + 2 [3 in S], features 0 and 1 swapped-symmetric.
  auto base = oracle::random_table(3, rng);
  std::vector<double> v(16);
  for (Mask s = 0; s < 16; ++s) {
    Mask low = s & 0b111;
    const Mask swapped = (low & 0b100) | ((low & 1) << 1) | ((low >> 1) & 1);
    v[s] = base[low] + base[swapped] + ((s >> 3) & 1 ? 2.0 : 0.0);
  }
  const TabularGame g(4, v);
  EXPECT_TRUE(are_interchangeable(g, 0, 1));
  EXPECT_FALSE(is_dummy(g, 3));
  const auto e = shapley_exact(g);
  EXPECT_NEAR(e.attributions[0], e.attributions[1], 1e-12);
  EXPECT_NEAR(e.attributions[3], 2.0, 1e-12);

  const TabularGame z(2, {1, 1, 4, 4});
  EXPECT_TRUE(is_dummy(z, 0));
  EXPECT_NEAR(shapley_exact(z).attributions[0], 0.0, 1e-15);
}

TEST(Axioms, ConsistencyPairs) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ExactSolver solver = [](const GameOracle& g) { return shapley_exact(g); };
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 2 + rep % 5;
    const auto a = oracle::random_table(m, rng);
    auto b = a;
    const int f = rep % m;
    for (Mask s = 0; s < b.size(); ++s) {
      if ((s >> f) & 1) b[s] += u(rng);
    }
    const TabularGame ga(m, a), gb(m, b);
    EXPECT_TRUE(dominates_marginals(ga, gb, f));
    EXPECT_TRUE(check_consistency_pair(ga, gb, f, solver));
  }
}

TEST(Axioms, InvalidPairsAreRejected) {
  const ExactSolver solver = [](const GameOracle& g) { return shapley_exact(g); };
  const TabularGame a(2, {0, 1, 1, 3}), b(2, {0, 0, 1, 1}), c(1, {0, 1});
  EXPECT_THROW(check_consistency_pair(a, c, 0, solver), Error);
  EXPECT_THROW(check_consistency_pair(a, b, 0, solver), Error);
  EXPECT_THROW(check_consistency_pair(a, a, 2, solver), Error);
}
