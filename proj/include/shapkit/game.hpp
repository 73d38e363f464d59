#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "shapkit/coalition.hpp"

namespace shapkit {

/// A cooperative game v(S) over M players. Every estimator consumes only
/// this interface. value() must be deterministic; the evaluation counter
/// grows by exactly one per call and is safe to bump from several threads.
class GameOracle {
 public:
  explicit GameOracle(int num_features);
  virtual ~GameOracle() = default;

  GameOracle(const GameOracle&) = delete;
  GameOracle& operator=(const GameOracle&) = delete;

  int num_features() const noexcept { return num_features_; }

  // Validates the coalition's feature count, counts the call and evaluates.
  double value(const Coalition& coalition) const;

  std::uint64_t evaluations() const noexcept {
    return evaluations_.load(std::memory_order_relaxed);
  }

 protected:
  virtual double evaluate(const Coalition& coalition) const = 0;

 private:
  int num_features_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

/// Game given by an explicit table of 2^M values indexed by mask.
class TabularGame final : public GameOracle {
 public:
  TabularGame(int num_features, std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }

 protected:
  double evaluate(const Coalition& coalition) const override;

 private:
  std::vector<double> values_;
};

/// Adapts any callable Mask -> double into a game; used for analytic games
/// that are too large to tabulate.
class FunctionGame final : public GameOracle {
 public:
  FunctionGame(int num_features, std::function<double(Mask)> fn)
      : GameOracle(num_features), fn_(std::move(fn)) {}

 protected:
  double evaluate(const Coalition& coalition) const override {
    return fn_(coalition.mask());
  }

 private:
  std::function<double(Mask)> fn_;
};

// Tabulates all 2^M values of a game (counts 2^M evaluations on it).
TabularGame tabulate(const GameOracle& game);

}  // namespace shapkit
