#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapkit/explanation.hpp"
#include "shapkit/game.hpp"
#include "shapkit/parallel.hpp"

namespace shapkit {

inline constexpr int kMaxExactFeatures = 20;
inline constexpr int kMaxPermutationExactFeatures = 8;

/// Shapley values by the subset formula
///   phi_i = sum_{S not containing i} |S|!(M-|S|-1)!/M! [v(S+i) - v(S)],
/// with every coalition evaluated exactly once. Capacity error for
/// M > kMaxExactFeatures.
Explanation shapley_exact(const GameOracle& game, Exec exec = Exec::parallel);

/// Same values computed as the average marginal contribution over all M!
/// orderings. Independent cross-check for shapley_exact; M <= 8.
Explanation shapley_permutation_exact(const GameOracle& game);

struct SamplingConfig {
  int n_permutations = 1000;
  std::uint64_t seed = 0;
  // Each drawn ordering also contributes its reverse.
  bool antithetic = true;
};

/// Monte Carlo Shapley values from seeded uniform orderings. v(empty) and
/// v(full) are evaluated once and shared, so the run costs
/// n_permutations * (M - 1) + 2 evaluations. Orderings are drawn from
/// per-draw seeds and merged in fixed blocks, so the result does not depend
/// on the thread count.
Explanation sampling_shap(const GameOracle& game, const SamplingConfig& config,
                          Exec exec = Exec::parallel);

/// Accumulates the given orderings exactly (no randomness). With every
/// ordering of M features this reproduces shapley_exact.
Explanation sampling_shap_orderings(const GameOracle& game,
                                    std::span<const std::vector<int>> orderings);

// All M! orderings of 0..M-1 in lexicographic order.
std::vector<std::vector<int>> all_orderings(int num_features);

}  // namespace shapkit
