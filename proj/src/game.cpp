#include "shapkit/game.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "shapkit/error.hpp"
#include "shapkit/explanation.hpp"
#include "shapkit/parallel.hpp"

namespace shapkit {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::exact: return "exact";
    case Method::permutation_exact: return "permutation_exact";
    case Method::sampling: return "sampling";
    case Method::kernel: return "kernel";
    case Method::linear: return "linear";
    case Method::low_order: return "low-order";
    case Method::max: return "max";
    case Method::deep: return "deep";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::exact, Method::permutation_exact, Method::sampling,
                   Method::kernel, Method::linear, Method::low_order,
                   Method::max, Method::deep}) {
    if (method_name(m) == name) return m;
  }
  if (name == "low_order") return Method::low_order;
  throw Error(ErrorCode::config, "unknown method '" + std::string(name) + "'");
}

bool is_exact_method(Method method) {
  switch (method) {
    case Method::exact:
    case Method::permutation_exact:
    case Method::linear:
    case Method::low_order:
    case Method::max:
      return true;
    default:
      return false;
  }
}

double Explanation::sum() const {
  return std::accumulate(attributions.begin(), attributions.end(), 0.0);
}

bool check_local_accuracy(const Explanation& expl, double tol) {
  return std::abs(expl.base_value + expl.sum() - expl.fx_full) <= tol;
}

GameOracle::GameOracle(int num_features) : num_features_(num_features) {
  if (num_features < 1 || num_features > kMaxFeatures) {
    throw Error(ErrorCode::capacity,
                "game feature count must be in [1, 64], got " +
                    std::to_string(num_features));
  }
}

double GameOracle::value(const Coalition& coalition) const {
  if (coalition.num_features() != num_features_) {
    throw Error(ErrorCode::shape,
                "coalition over " + std::to_string(coalition.num_features()) +
                    " features passed to a game over " +
                    std::to_string(num_features_));
  }
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  return evaluate(coalition);
}

TabularGame::TabularGame(int num_features, std::vector<double> values)
    : GameOracle(num_features), values_(std::move(values)) {
  if (num_features > kMaxEnumerationFeatures) {
    throw Error(ErrorCode::capacity, "tabular games are limited to M <= 25");
  }
  const std::size_t expected = std::size_t{1} << num_features;
  if (values_.size() != expected) {
    throw Error(ErrorCode::shape,
                "tabular game over M=" + std::to_string(num_features) +
                    " needs " + std::to_string(expected) + " values, got " +
                    std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::numeric, "tabular game value is not finite");
    }
  }
}

double TabularGame::evaluate(const Coalition& coalition) const {
  return values_[coalition.mask()];
}

TabularGame tabulate(const GameOracle& game) {
  const int m = game.num_features();
  if (m > kMaxEnumerationFeatures) {
    throw Error(ErrorCode::capacity, "cannot tabulate a game with M > 25");
  }
  std::vector<Mask> masks(std::size_t{1} << m);
  std::iota(masks.begin(), masks.end(), Mask{0});
  return TabularGame(m, evaluate_coalitions(game, masks));
}

}  // namespace shapkit
