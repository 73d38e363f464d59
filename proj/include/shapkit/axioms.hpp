#pragma once

#include <functional>

#include "shapkit/explanation.hpp"
#include "shapkit/game.hpp"

namespace shapkit {

using ExactSolver = std::function<Explanation(const GameOracle&)>;

// Property checks over explicit enumeration of a game; all require
// M <= kMaxEnumerationFeatures.

// v(S + i) == v(S) (within tol) for every S not containing i.
bool is_dummy(const GameOracle& game, int feature, double tol = 1e-12);

// v(S + i) == v(S + j) (within tol) for every S containing neither.
bool are_interchangeable(const GameOracle& game, int i, int j,
                         double tol = 1e-12);

// Marginal contributions of `feature` in `dominant` are >= those in `base`
// for every coalition.
bool dominates_marginals(const GameOracle& base, const GameOracle& dominant,
                         int feature, double tol = 1e-12);

/// Consistency harness: the solver's attribution of `feature` in game_b must
/// not fall below game_a's (slack 1e-9). For M <= 12 the marginal-dominance
/// precondition is verified by enumeration and a violation raises
/// ErrorCode::invalid_pair; for larger M the caller vouches for it.
bool check_consistency_pair(const GameOracle& game_a,
                            const GameOracle& game_b, int feature,
                            const ExactSolver& solver);

}  // namespace shapkit
