#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "shapkit/background.hpp"
#include "shapkit/game.hpp"
#include "shapkit/model.hpp"
#include "shapkit/parallel.hpp"

namespace shapkit {

enum class MaskingMode {
  // v(S) = mean_k f([x_S, background_k on the rest]).
  independence,
  // v(S) = f([x_S, column means on the rest]).
  mean_imputation,
};

inline constexpr int kDefaultBackgroundCap = 1000;

struct MaskedGameOptions {
  MaskingMode mode = MaskingMode::independence;
  int background_cap = kDefaultBackgroundCap;
  std::uint64_t subsample_seed = 0;
  // Execution of the per-row average inside one coalition evaluation.
  Exec exec = Exec::parallel;
};

/// The game v(S) ~ E[f(z) | z_S] for a model, an instance and a background
/// sample. value() counts coalition evaluations; model_calls() counts the
/// underlying model evaluations (N per coalition in independence mode).
class MaskedGame final : public GameOracle {
 public:
  MaskedGame(ModelSpec model, std::vector<double> instance,
             const BackgroundData& background, MaskedGameOptions options = {});

  const ModelSpec& model() const noexcept { return model_; }
  const std::vector<double>& instance() const noexcept { return instance_; }
  const BackgroundData& background() const noexcept { return background_; }
  MaskingMode mode() const noexcept { return options_.mode; }

  std::uint64_t model_calls() const noexcept {
    return model_calls_.load(std::memory_order_relaxed);
  }

 protected:
  double evaluate(const Coalition& coalition) const override;

 private:
  ModelSpec model_;
  std::vector<double> instance_;
  BackgroundData background_;
  MaskedGameOptions options_;
  double full_value_;
  mutable std::atomic<std::uint64_t> model_calls_{0};
};

// Serial reference and OpenMP kernel for the independence-mode average.
double masked_average(const ModelSpec& model, std::span<const double> instance,
                      const BackgroundData& background, Mask present,
                      Exec exec);

}  // namespace shapkit
