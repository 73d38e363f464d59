#pragma once

#include <cstdint>
#include <vector>

#include "shapkit/background.hpp"
#include "shapkit/game.hpp"
#include "shapkit/model.hpp"

namespace shapkit {

inline constexpr std::uint64_t kDefaultFixtureSeed = 2017;

// Sickness score over {fever, cough}: 5 with one symptom, 2 with both,
// 0 with none. Mask bit 0 is fever, bit 1 is cough.
TabularGame sickness_game();

// Three players scoring 5, 4 and 0; the payout is the best score.
struct MaxFixture {
  MaxModel model;
  std::vector<double> instance;
  BackgroundData background;
};
MaxFixture max_game_fixture();

enum class Scenario { dense_tree, sparse_tree };

struct TreeScenario {
  Scenario scenario;
  DecisionTree tree;
  std::vector<double> instance;
  BackgroundData background;
  // Features the tree splits on (all of them for the dense scenario).
  std::vector<int> active_features;
  int reported_feature = 0;
};

// Depth-4 tree over M=10 features that uses every feature, root on
// feature 0; instance and 100 background rows uniform on [0, 1].
TreeScenario make_dense_tree_scenario(std::uint64_t seed);
// Depth-3 tree over M=30 features splitting on 3 of them.
TreeScenario make_sparse_tree_scenario(std::uint64_t seed);
TreeScenario make_tree_scenario(Scenario scenario, std::uint64_t seed);

// Synthetic binary classifier: 10 inputs, 16 relu units, one logit. 50
// explained instances and 100 background rows, all standard normal.
struct MaskingFixture {
  MlpModel model;
  std::vector<std::vector<double>> instances;
  BackgroundData background;
};
MaskingFixture make_masking_fixture(std::uint64_t seed);

}  // namespace shapkit
