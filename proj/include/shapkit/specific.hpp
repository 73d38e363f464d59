#pragma once

#include <span>
#include <vector>

#include "shapkit/background.hpp"
#include "shapkit/explanation.hpp"
#include "shapkit/game.hpp"
#include "shapkit/model.hpp"

namespace shapkit {

/// phi_i = w_i (x_i - mean_i), phi_0 = b + sum_i w_i mean_i, so that
/// phi_0 + sum(phi) = f(x). Uses no game evaluations.
Explanation linear_shap(const LinearModel& model, std::span<const double> x,
                        const BackgroundData& background);

inline constexpr int kDefaultLowOrderThreshold = 13;

/// Kernel SHAP over the complete design when M <= threshold (2^M
/// evaluations); ErrorCode::budget_required above it.
Explanation low_order_dispatch(const GameOracle& game,
                               int threshold = kDefaultLowOrderThreshold);

/// Shapley values of v(S) = max(reference, max_{i in S} values_i) in
/// O(M log M): clamp to the reference, sort ascending and give each
/// increment x_(j) - x_(j-1) equally to the M - j + 1 players at or above it.
Explanation max_shap(std::span<const double> values, double reference);

/// Deep SHAP: forward passes on x and on the background column means, then
/// multipliers composed backwards with the chain rule. Each layer's
/// component is linearized by its own SHAP values: weights for the affine
/// part, (a(y) - a(y_ref)) / (y - y_ref) for one-input activations (the
/// derivative when y == y_ref) and per-pool Shapley values for maxpool.
/// Explains `output_index` of the last layer's raw output.
Explanation deep_shap(const MlpModel& model, std::span<const double> x,
                      const BackgroundData& background, int output_index = 0);

// Same, against an explicit reference input.
Explanation deep_shap_reference(const MlpModel& model,
                                std::span<const double> x,
                                std::span<const double> reference,
                                int output_index = 0);

}  // namespace shapkit
