#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "shapkit/background.hpp"
#include "shapkit/error.hpp"
#include "shapkit/masked_game.hpp"
#include "shapkit/parallel.hpp"

using namespace shapkit;

TEST(Background, MeansAndShape) {
  const auto bg = BackgroundData::from_rows({{1, 2}, {3, 6}});
  EXPECT_EQ(bg.num_rows(), 2);
  EXPECT_EQ(bg.means(), (std::vector<double>{2, 4}));
  EXPECT_THROW(BackgroundData({1, 2, 3}, 2, 2), Error);
  EXPECT_THROW(BackgroundData::from_rows({}), Error);
}

TEST(Background, CapIsSeededSubsetInOrder) {
  std::mt19937_64 rng(5);
  const auto rows = oracle::normal_rows(50, 2, rng);
  const auto bg = BackgroundData::from_rows(rows);
  const auto a = bg.capped(10, 7);
  const auto b = bg.capped(10, 7);
  EXPECT_EQ(a.num_rows(), 10);
  EXPECT_EQ(a.values(), b.values());
  // Every kept row is an original row, in original order.
  int next = 0;
  for (int r = 0; r < a.num_rows(); ++r) {
    while (next < 50 && rows[next][0] != a.row(r)[0]) ++next;
    ASSERT_LT(next, 50);
    ++next;
  }
  EXPECT_EQ(bg.capped(100, 7).num_rows(), 50);
}

TEST(MaskedGame, IndependenceMatchesBruteForce) {
  std::mt19937_64 rng(11);
  const auto mlp = oracle::random_mlp({4, 5, 1}, rng);
  const auto bg = oracle::normal_rows(7, 4, rng);
  const std::vector<double> x = {0.3, -1.2, 2.0, 0.1};
  const MaskedGame game(mlp, x, BackgroundData::from_rows(bg));
  const auto want = oracle::masked_table(mlp, x, bg);
  for (Mask s = 0; s < 16; ++s) {
    EXPECT_NEAR(game.value(Coalition(s, 4)), want[s], 1e-12) << "mask " << s;
  }
}

TEST(MaskedGame, MeanImputationUsesColumnMeans) {
  const ModelSpec lin = LinearModel{{1.0, 10.0}, 0.0};
  MaskedGameOptions opts;
  opts.mode = MaskingMode::mean_imputation;
  const MaskedGame game(lin, {5.0, 7.0}, BackgroundData::from_rows({{0, 0}, {2, 4}}), opts);
  EXPECT_DOUBLE_EQ(game.value(Coalition(0b01, 2)), 5.0 + 10.0 * 2.0);
  EXPECT_DOUBLE_EQ(game.value(Coalition(0b00, 2)), 1.0 + 20.0);
}

TEST(MaskedGame, CountersTrackEvaluationsAndModelCalls) {
  const ModelSpec lin = LinearModel{{1.0, 1.0}, 0.0};
  const MaskedGame game(lin, {1.0, 1.0}, BackgroundData::from_rows({{0, 0}, {1, 0}, {0, 2}}));
  const auto calls0 = game.model_calls();
  game.value(Coalition(0b01, 2));
  EXPECT_EQ(game.model_calls() - calls0, 3u);  // one per background row
  game.value(Coalition(0b11, 2));
  EXPECT_EQ(game.model_calls() - calls0, 4u);  // f(x) alone
  EXPECT_EQ(game.evaluations(), 2u);
}

TEST(MaskedGame, FullCoalitionIsPrediction) {
  std::mt19937_64 rng(2);
  const auto mlp = oracle::random_mlp({3, 4, 1}, rng);
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const MaskedGame game(mlp, x, BackgroundData::from_rows(oracle::normal_rows(5, 3, rng)));
  EXPECT_EQ(game.value(Coalition::full(3)), predict(ModelSpec(mlp), x));
}

TEST(MaskedGame, ShapeErrors) {
  const ModelSpec lin = LinearModel{{1.0, 1.0}, 0.0};
  EXPECT_THROW(MaskedGame(lin, {1.0}, BackgroundData::single({0.0, 0.0})), Error);
  EXPECT_THROW(MaskedGame(lin, {1.0, 1.0}, BackgroundData::single({0.0})), Error);
}

TEST(Parallel, MaskedAverageIsBitIdentical) {
  std::mt19937_64 rng(3);
  const auto mlp = oracle::random_mlp({6, 8, 1}, rng);
  const auto bg = BackgroundData::from_rows(oracle::normal_rows(300, 6, rng));
  const std::vector<double> x = {0.1, 0.2, 0.3, -0.4, 0.5, 0.6};
  for (Mask s : {Mask{0}, Mask{5}, Mask{42}}) {
    EXPECT_EQ(masked_average(mlp, x, bg, s, Exec::serial),
              masked_average(mlp, x, bg, s, Exec::parallel));
  }
}

TEST(Parallel, EvaluateCoalitionsMatchesSerial) {
  std::mt19937_64 rng(4);
  const TabularGame g(8, oracle::random_table(8, rng));
  std::vector<Mask> masks(256);
  for (Mask s = 0; s < 256; ++s) masks[s] = 255 - s;
  const auto a = evaluate_coalitions(g, masks, Exec::serial);
  const auto b = evaluate_coalitions(g, masks, Exec::parallel);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], g.values()[255]);
}

TEST(Parallel, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}
