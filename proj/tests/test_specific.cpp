#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/fixtures.hpp"
#include "shapkit/masked_game.hpp"
#include "shapkit/specific.hpp"

using namespace shapkit;

namespace {

std::vector<double> max_table(const std::vector<double>& x, double ref) {
  const int m = static_cast<int>(x.size());
  std::vector<double> v(std::size_t{1} << m);
  for (Mask s = 0; s < v.size(); ++s) {
    double best = ref;
    for (int i = 0; i < m; ++i) {
      if ((s >> i) & 1) best = std::max(best, x[i]);
    }
    v[s] = best;
  }
  return v;
}

MlpModel single_relu(double downstream) {
  MlpModel m;
  m.layers.push_back({1, 1, {1.0}, {0.0}, Activation::relu, 1});
  if (downstream != 0.0) m.layers.push_back({1, 1, {downstream}, {0.0}, Activation::identity, 1});
  return m;
}

}  // namespace

TEST(LinearShap, ClosedFormAgainstMaskedGame) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int m = 1; m <= 6; ++m) {
    LinearModel lin;
    for (int i = 0; i < m; ++i) lin.weights.push_back(n(rng));
    lin.bias = n(rng);
    const auto bg = oracle::normal_rows(9, m, rng);
    const auto x = oracle::normal_rows(1, m, rng)[0];
    const auto e = linear_shap(lin, x, BackgroundData::from_rows(bg));
    const auto want = oracle::shapley_subsets(oracle::masked_table(lin, x, bg), m);
    EXPECT_LT(oracle::max_abs_diff(e.attributions, want), 1e-12);
    EXPECT_EQ(e.evaluations_used, 0u);
    EXPECT_TRUE(check_local_accuracy(e, 1e-12));
  }
}

TEST(MaxShap, MatchesBruteForceWithTiesAndLowValues) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> pick(-3, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + rep % 8;
    std::vector<double> x(m);
    for (double& v : x) v = pick(rng);  // small integers force ties
    const double ref = pick(rng) * 0.5;
    const auto e = max_shap(x, ref);
    const auto want = oracle::shapley_subsets(max_table(x, ref), m);
    EXPECT_LT(oracle::max_abs_diff(e.attributions, want), 1e-12) << "rep " << rep;
    EXPECT_EQ(e.base_value, ref);
  }
}

TEST(MaxShap, PlayersFixture) {
  const auto e = max_shap(std::vector<double>{5, 4, 0}, 0.0);
  EXPECT_NEAR(e.attributions[0], 3.0, 1e-12);
  EXPECT_NEAR(e.attributions[1], 2.0, 1e-12);
  EXPECT_NEAR(e.attributions[2], 0.0, 1e-12);
  EXPECT_THROW(max_shap(std::vector<double>{}, 0.0), Error);
}

TEST(DeepShap, SingleReluUnit) {
  // x = 2, reference -1: multiplier (relu(2) - relu(-1)) / 3 times delta 3.
  const auto e = deep_shap_reference(single_relu(0.0), std::vector<double>{2.0},
                                     std::vector<double>{-1.0});
  EXPECT_NEAR(e.attributions[0], 2.0, 1e-12);
  // A downstream weight scales the contribution through the chain rule.
  const auto w = deep_shap_reference(single_relu(3.0), std::vector<double>{2.0},
                                     std::vector<double>{-1.0});
  EXPECT_NEAR(w.attributions[0], 6.0, 1e-12);
}

TEST(DeepShap, SummationToDelta) {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const auto mlp = oracle::random_mlp({5, 7, 4, 1}, rng);
    const auto bg = oracle::normal_rows(20, 5, rng);
    const auto x = oracle::normal_rows(1, 5, rng)[0];
    const auto bgd = BackgroundData::from_rows(bg);
    const auto e = deep_shap(mlp, x, bgd);
    const double fx = predict(ModelSpec(mlp), x);
    const double fr = predict(ModelSpec(mlp), bgd.means());
    EXPECT_NEAR(e.sum(), fx - fr, 1e-9);
    EXPECT_NEAR(e.base_value, fr, 1e-12);
  }
}

TEST(DeepShap, SigmoidAndMaxpoolKeepSummation) {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> n(0.0, 1.0);
  MlpModel m;
  DenseLayer a{6, 3, {}, {}, Activation::maxpool, 2};
  DenseLayer b{2, 3, {}, {}, Activation::sigmoid, 1};
  DenseLayer c{1, 2, {}, {}, Activation::identity, 1};
  for (DenseLayer* l : {&a, &b, &c}) {
    l->weights.resize(static_cast<std::size_t>(l->rows) * l->cols);
    for (double& w : l->weights) w = n(rng);
    l->bias.assign(l->rows, 0.1);
    m.layers.push_back(*l);
  }
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = oracle::normal_rows(2, 3, rng);
    const auto e = deep_shap_reference(m, x[0], x[1]);
    EXPECT_NEAR(e.sum(), predict(ModelSpec(m), x[0]) - predict(ModelSpec(m), x[1]), 1e-9);
  }
}

TEST(DeepShap, IdentityNetworkEqualsLinearShap) {
  std::mt19937_64 rng(45);
  const auto mlp = oracle::random_mlp({4, 3, 1}, rng, Activation::identity);
  // Collapse the network into one linear map.
  LinearModel lin{{0, 0, 0, 0}, 0.0};
  const std::vector<double> zero(4, 0.0);
  lin.bias = predict(ModelSpec(mlp), zero);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> e(4, 0.0);
    e[i] = 1.0;
    lin.weights[i] = predict(ModelSpec(mlp), e) - lin.bias;
  }
  const auto bg = BackgroundData::from_rows(oracle::normal_rows(10, 4, rng));
  const auto x = oracle::normal_rows(1, 4, rng)[0];
  const auto d = deep_shap(mlp, x, bg);
  const auto l = linear_shap(lin, x, bg);
  EXPECT_LT(oracle::max_abs_diff(d.attributions, l.attributions), 1e-9);
}

TEST(LowOrder, DispatchesUnderThreshold) {
  std::mt19937_64 rng(46);
  const auto v = oracle::random_table(5, rng);
  const TabularGame g(5, v);
  const auto e = low_order_dispatch(g);
  EXPECT_EQ(e.method, Method::low_order);
  EXPECT_LT(oracle::max_abs_diff(e.attributions, oracle::shapley_subsets(v, 5)), 1e-9);
  const FunctionGame big(14, [](Mask) { return 0.0; });
  try {
    low_order_dispatch(big);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::budget_required);
  }
}
