#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shapkit/coalition.hpp"
#include "shapkit/explanation.hpp"
#include "shapkit/game.hpp"
#include "shapkit/parallel.hpp"

namespace shapkit {

/// Shapley kernel weight (M-1) / (C(M,s) s (M-s)) of a coalition of size s.
/// The empty and full coalitions (s = 0 or M) carry infinite weight; the
/// returned value is then +infinity. Domain error (config) when s is
/// outside [0, M] or M < 1.
double shapley_kernel_weight(int num_features, int size);
inline bool is_infinite_weight(double w) { return w == std::numeric_limits<double>::infinity(); }

// Total kernel weight of all coalitions of one size: (M-1)/(s(M-s)).
double kernel_stratum_mass(int num_features, int size);

struct Regularization {
  bool debiased_lasso = false;
  // Penalty; chosen by 5-fold weighted cross-validation when empty.
  std::optional<double> lambda;
};

struct KernelConfig {
  // Number of design coalitions (excluding the empty and full ones, which
  // are always evaluated in addition).
  std::uint64_t budget = 0;
  Regularization regularization;
  std::uint64_t seed = 0;
  bool paired_sampling = true;
  Exec exec = Exec::parallel;
};

// Smallest admissible budget: min(2^M - 2, M).
std::uint64_t minimum_kernel_budget(int num_features);

struct DesignRow {
  Mask mask = 0;
  double weight = 0.0;
  double value = 0.0;
};

/// Coalitions for the regression. Rows never repeat and never contain the
/// empty or full coalition; `value` is filled by evaluate_design.
struct WeightedDesign {
  int num_features = 0;
  std::vector<DesignRow> rows;
  // True when every non-trivial coalition is present with its exact weight.
  bool complete = false;
};

/// Builds the regression design. With budget >= 2^M - 2 it is the complete
/// enumeration. Otherwise size strata are taken in order of decreasing
/// kernel mass and enumerated while the proportional share of the remaining
/// budget covers them; the rest of the budget is spread over the remaining
/// strata in proportion to their mass and filled by uniform sampling
/// without replacement. Each sampled row's weight is its size's kernel
/// weight scaled by C(M,s)/(rows drawn of size s), preserving stratum mass.
WeightedDesign sample_coalitions(int num_features, const KernelConfig& config);

void evaluate_design(const GameOracle& game, WeightedDesign& design,
                     Exec exec = Exec::parallel);

/// Weighted least squares with phi_0 = v_empty and sum(phi) = v_full -
/// v_empty imposed exactly by eliminating the last feature. Singular error
/// naming the covered and missing size strata when the reduced design is
/// rank deficient.
Explanation solve_constrained_wls(const WeightedDesign& design, double v_empty,
                                  double v_full);

/// Lasso selection over all M features, with the efficiency constraint
/// folded in by pairing each row z with z - 1, then a constrained weighted
/// refit on the selected features only; the rest get exactly zero.
/// `lambda` empty selects it by cross-validation seeded with `cv_seed`.
Explanation solve_debiased_lasso(const WeightedDesign& design, double v_empty,
                                 double v_full, std::optional<double> lambda,
                                 std::uint64_t cv_seed);

/// Kernel SHAP: evaluates v(empty), v(full) and the design, then solves.
/// evaluations_used = design rows + 2.
Explanation kernel_shap(const GameOracle& game, const KernelConfig& config);

}  // namespace shapkit
