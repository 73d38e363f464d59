#include "shapkit/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "shapkit/parallel.hpp"

namespace shapkit {
namespace {

std::vector<double> uniform_row(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> row(m);
  for (double& v : row) v = u(rng);
  return row;
}

BackgroundData uniform_background(int rows, int m, std::mt19937_64& rng) {
  std::vector<std::vector<double>> data;
  for (int r = 0; r < rows; ++r) data.push_back(uniform_row(m, rng));
  return BackgroundData::from_rows(data);
}

// Complete binary tree of the given depth in breadth-first layout: node i
// has children 2i+1 and 2i+2. `feature_of(node, level)` picks the split.
template <class PickFeature>
DecisionTree complete_tree(int num_features, int depth, std::mt19937_64& rng,
                           PickFeature feature_of) {
  const int internal = (1 << depth) - 1;
  const int nodes = 2 * internal + 1;
  DecisionTree t;
  t.num_features = num_features;
  t.feature.assign(nodes, 0);
  t.threshold.assign(nodes, 0.0);
  t.left.assign(nodes, -1);
  t.right.assign(nodes, -1);
  t.value.assign(nodes, 0.0);
  std::uniform_real_distribution<double> cut(0.2, 0.8);
  std::normal_distribution<double> leaf(0.0, 1.0);
  for (int i = 0; i < nodes; ++i) {
    if (i < internal) {
      int level = 0;
      while ((2 << level) - 1 <= i) ++level;
      t.feature[i] = feature_of(i, level);
      t.threshold[i] = cut(rng);
      t.left[i] = 2 * i + 1;
      t.right[i] = 2 * i + 2;
    } else {
      t.value[i] = leaf(rng);
    }
  }
  return t;
}

}  // namespace

TabularGame sickness_game() { return TabularGame(2, {0.0, 5.0, 5.0, 2.0}); }

MaxFixture max_game_fixture() {
  MaxModel model;
  model.num_features = 3;
  return {model, {5.0, 4.0, 0.0}, BackgroundData::single({0.0, 0.0, 0.0})};
}

TreeScenario make_dense_tree_scenario(std::uint64_t seed) {
  constexpr int kFeatures = 10;
  std::mt19937_64 rng(derive_seed(seed, 1));
  // 15 internal nodes: every feature once plus five repeats, root on 0.
  std::vector<int> features(kFeatures);
  std::iota(features.begin(), features.end(), 0);
  std::uniform_int_distribution<int> any(0, kFeatures - 1);
  for (int k = 0; k < 5; ++k) features.push_back(any(rng));
  std::shuffle(features.begin() + 1, features.end(), rng);
  TreeScenario s{Scenario::dense_tree,
                 complete_tree(kFeatures, 4, rng,
                               [&](int node, int) { return features[node]; }),
                 uniform_row(kFeatures, rng),
                 uniform_background(100, kFeatures, rng),
                 {},
                 0};
  s.active_features = used_features(s.tree);
  return s;
}

TreeScenario make_sparse_tree_scenario(std::uint64_t seed) {
  constexpr int kFeatures = 30;
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::vector<int> all(kFeatures);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  const std::vector<int> per_level(all.begin(), all.begin() + 3);
  TreeScenario s{Scenario::sparse_tree,
                 complete_tree(kFeatures, 3, rng,
                               [&](int, int level) { return per_level[level]; }),
                 uniform_row(kFeatures, rng),
                 uniform_background(100, kFeatures, rng),
                 {},
                 0};
  s.active_features = used_features(s.tree);
  s.reported_feature = per_level.front();
  return s;
}

TreeScenario make_tree_scenario(Scenario scenario, std::uint64_t seed) {
  return scenario == Scenario::dense_tree ? make_dense_tree_scenario(seed)
                                          : make_sparse_tree_scenario(seed);
}

MaskingFixture make_masking_fixture(std::uint64_t seed) {
  constexpr int kInputs = 10;
  constexpr int kHidden = 16;
  std::mt19937_64 rng(derive_seed(seed, 3));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_layer = [&](int rows, int cols, double scale, Activation act) {
    DenseLayer l;
    l.rows = rows;
    l.cols = cols;
    l.activation = act;
    l.weights.resize(static_cast<std::size_t>(rows) * cols);
    for (double& w : l.weights) w = scale * normal(rng);
    l.bias.resize(rows);
    for (double& b : l.bias) b = 0.1 * normal(rng);
    return l;
  };
  MaskingFixture f{
      MlpModel{{random_layer(kHidden, kInputs, 1.0 / std::sqrt(kInputs), Activation::relu),
                random_layer(1, kHidden, 2.0 / std::sqrt(kHidden), Activation::identity)},
               0},
      {},
      BackgroundData::single(std::vector<double>(kInputs, 0.0))};
  auto normal_row = [&] {
    std::vector<double> row(kInputs);
    for (double& v : row) v = normal(rng);
    return row;
  };
  for (int i = 0; i < 50; ++i) f.instances.push_back(normal_row());
  std::vector<std::vector<double>> bg;
  for (int i = 0; i < 100; ++i) bg.push_back(normal_row());
  f.background = BackgroundData::from_rows(bg);
  return f;
}

}  // namespace shapkit
