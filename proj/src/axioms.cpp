#include "shapkit/axioms.hpp"

#include <cmath>
#include <string>

#include "shapkit/error.hpp"

namespace shapkit {
namespace {

void require_enumerable(const GameOracle& game) {
  if (game.num_features() > kMaxEnumerationFeatures) {
    throw Error(ErrorCode::capacity, "axiom checks require M <= 25");
  }
}

}  // namespace

bool is_dummy(const GameOracle& game, int feature, double tol) {
  require_enumerable(game);
  const int m = game.num_features();
  for (const Coalition& s : enumerate_coalitions(m)) {
    if (s.contains(feature)) continue;
    if (std::abs(game.value(s.with(feature)) - game.value(s)) > tol) {
      return false;
    }
  }
  return true;
}

bool are_interchangeable(const GameOracle& game, int i, int j, double tol) {
  require_enumerable(game);
  const int m = game.num_features();
  for (const Coalition& s : enumerate_coalitions(m)) {
    if (s.contains(i) || s.contains(j)) continue;
    if (std::abs(game.value(s.with(i)) - game.value(s.with(j))) > tol) {
      return false;
    }
  }
  return true;
}

bool dominates_marginals(const GameOracle& base, const GameOracle& dominant,
                         int feature, double tol) {
  require_enumerable(base);
  if (base.num_features() != dominant.num_features()) {
    throw Error(ErrorCode::shape, "games differ in feature count");
  }
  for (const Coalition& s : enumerate_coalitions(base.num_features())) {
    if (s.contains(feature)) continue;
    const double da = base.value(s.with(feature)) - base.value(s);
    const double db = dominant.value(s.with(feature)) - dominant.value(s);
    if (db < da - tol) return false;
  }
  return true;
}

bool check_consistency_pair(const GameOracle& game_a,
                            const GameOracle& game_b, int feature,
                            const ExactSolver& solver) {
  if (game_a.num_features() != game_b.num_features()) {
    throw Error(ErrorCode::invalid_pair, "games differ in feature count");
  }
  if (feature < 0 || feature >= game_a.num_features()) {
    throw Error(ErrorCode::invalid_pair,
                "feature index " + std::to_string(feature) + " out of range");
  }
  if (game_a.num_features() <= 12 &&
      !dominates_marginals(game_a, game_b, feature)) {
    throw Error(ErrorCode::invalid_pair,
                "second game does not dominate the marginal contributions of "
                "feature " + std::to_string(feature));
  }
  const Explanation a = solver(game_a);
  const Explanation b = solver(game_b);
  return b.attributions[feature] >= a.attributions[feature] - 1e-9;
}

}  // namespace shapkit
