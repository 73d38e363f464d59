#include "shapkit/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "shapkit/error.hpp"

namespace shapkit {
namespace {

// |S|!(M-|S|-1)!/M! = 1 / (M * C(M-1, |S|)).
std::vector<double> subset_weights(int m) {
  std::vector<double> w(m);
  double binom = 1.0;  // C(M-1, s)
  for (int s = 0; s < m; ++s) {
    w[s] = 1.0 / (m * binom);
    binom = binom * (m - 1 - s) / (s + 1);
  }
  return w;
}

Explanation make_explanation(Method method, std::vector<double> phi,
                             double v_empty, double v_full,
                             std::uint64_t evaluations) {
  Explanation e;
  e.method = method;
  e.attributions = std::move(phi);
  e.base_value = v_empty;
  e.fx_full = v_full;
  e.evaluations_used = evaluations;
  return e;
}

// Marginal contributions along one ordering. `prefix_value` starts at
// v(empty); the last step reuses v(full).
void accumulate_ordering(const GameOracle& game, std::span<const int> order,
                         double v_empty, double v_full,
                         std::vector<double>& sums) {
  const int m = game.num_features();
  Mask prefix = 0;
  double before = v_empty;
  for (int pos = 0; pos < m; ++pos) {
    const int feature = order[pos];
    prefix |= Mask{1} << feature;
    const double after =
        pos == m - 1 ? v_full : game.value(Coalition(prefix, m));
    sums[feature] += after - before;
    before = after;
  }
}

constexpr int kDrawsPerBlock = 16;

}  // namespace

Explanation shapley_exact(const GameOracle& game, Exec exec) {
  const int m = game.num_features();
  if (m > kMaxExactFeatures) {
    throw Error(ErrorCode::capacity, "shapley_exact supports M <= 20, got M=" +
                                         std::to_string(m));
  }
  const std::uint64_t before = game.evaluations();
  std::vector<Mask> masks(std::size_t{1} << m);
  std::iota(masks.begin(), masks.end(), Mask{0});
  const std::vector<double> table = evaluate_coalitions(game, masks, exec);
  const std::vector<double> weight = subset_weights(m);

  std::vector<double> phi(m, 0.0);
  auto one_feature = [&](int i) {
    const Mask bit = Mask{1} << i;
    double acc = 0.0;
    for (Mask s = 0; s < masks.size(); ++s) {
      if (s & bit) continue;
      acc += weight[std::popcount(s)] * (table[s | bit] - table[s]);
    }
    phi[i] = acc;
  };
  if (exec == Exec::serial) {
    for (int i = 0; i < m; ++i) one_feature(i);
  } else {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) one_feature(i);
  }
  return make_explanation(Method::exact, std::move(phi), table.front(),
                          table.back(), game.evaluations() - before);
}

std::vector<std::vector<int>> all_orderings(int num_features) {
  if (num_features < 1 || num_features > kMaxPermutationExactFeatures) {
    throw Error(ErrorCode::capacity,
                "ordering enumeration supports 1 <= M <= 8, got M=" +
                    std::to_string(num_features));
  }
  std::vector<int> order(num_features);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

Explanation shapley_permutation_exact(const GameOracle& game) {
  const int m = game.num_features();
  if (m > kMaxPermutationExactFeatures) {
    throw Error(ErrorCode::capacity,
                "shapley_permutation_exact supports M <= 8, got M=" +
                    std::to_string(m));
  }
  const std::uint64_t before = game.evaluations();
  std::unordered_map<Mask, double> memo;
  auto v = [&](Mask s) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const double val = game.value(Coalition(s, m));
    memo.emplace(s, val);
    return val;
  };
  std::vector<double> sums(m, 0.0);
  const auto orders = all_orderings(m);
  for (const auto& order : orders) {
    Mask prefix = 0;
    for (int feature : order) {
      const Mask next = prefix | (Mask{1} << feature);
      sums[feature] += v(next) - v(prefix);
      prefix = next;
    }
  }
  for (double& s : sums) s /= static_cast<double>(orders.size());
  return make_explanation(Method::permutation_exact, std::move(sums), v(0),
                          v(full_mask(m)), game.evaluations() - before);
}

Explanation sampling_shap_orderings(const GameOracle& game,
                                    std::span<const std::vector<int>> orderings) {
  const int m = game.num_features();
  if (orderings.empty()) {
    throw Error(ErrorCode::config, "at least one ordering is required");
  }
  const std::uint64_t before = game.evaluations();
  const double v_empty = game.value(Coalition::empty(m));
  const double v_full = game.value(Coalition::full(m));
  std::vector<double> sums(m, 0.0);
  for (const auto& order : orderings) {
    if (static_cast<int>(order.size()) != m) {
      throw Error(ErrorCode::shape, "ordering length differs from M");
    }
    accumulate_ordering(game, order, v_empty, v_full, sums);
  }
  for (double& s : sums) s /= static_cast<double>(orderings.size());
  return make_explanation(Method::sampling, std::move(sums), v_empty, v_full,
                          game.evaluations() - before);
}

Explanation sampling_shap(const GameOracle& game, const SamplingConfig& config,
                          Exec exec) {
  const int m = game.num_features();
  if (config.n_permutations < 1) {
    throw Error(ErrorCode::config, "n_permutations must be >= 1");
  }
  const std::uint64_t before = game.evaluations();
  const double v_empty = game.value(Coalition::empty(m));
  const double v_full = game.value(Coalition::full(m));

  // Draw d contributes orderings 2d and 2d+1 (forward, reverse) when
  // antithetic, ordering d otherwise.
  const int n = config.n_permutations;
  const int per_draw = config.antithetic ? 2 : 1;
  const int draws = (n + per_draw - 1) / per_draw;
  const int blocks = (draws + kDrawsPerBlock - 1) / kDrawsPerBlock;
  std::vector<std::vector<double>> block_sums(blocks, std::vector<double>(m, 0.0));

  auto run_block = [&](int b) {
    std::vector<int> order(m);
    auto& sums = block_sums[b];
    const int end = std::min(draws, (b + 1) * kDrawsPerBlock);
    for (int d = b * kDrawsPerBlock; d < end; ++d) {
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(d)));
      std::shuffle(order.begin(), order.end(), rng);
      accumulate_ordering(game, order, v_empty, v_full, sums);
      if (config.antithetic && 2 * d + 1 < n) {
        std::reverse(order.begin(), order.end());
        accumulate_ordering(game, order, v_empty, v_full, sums);
      }
    }
  };

  if (exec == Exec::serial) {
    for (int b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < blocks; ++b) {
      try {
        run_block(b);
      } catch (...) {
#pragma omp critical(shapkit_sampling_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> phi(m, 0.0);
  for (const auto& sums : block_sums) {
    for (int i = 0; i < m; ++i) phi[i] += sums[i];
  }
  for (double& p : phi) p /= n;
  Explanation e = make_explanation(Method::sampling, std::move(phi), v_empty,
                                   v_full, game.evaluations() - before);
  return e;
}

}  // namespace shapkit
