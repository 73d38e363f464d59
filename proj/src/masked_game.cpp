#include "shapkit/masked_game.hpp"

#include <string>

#include "shapkit/error.hpp"

namespace shapkit {

double masked_average(const ModelSpec& model, std::span<const double> instance,
                      const BackgroundData& background, Mask present,
                      Exec exec) {
  const int n = background.num_rows();
  const int m = background.num_cols();
  std::vector<double> outputs(n);
  auto one_row = [&](int k, std::vector<double>& composite) {
    auto ref = background.row(k);
    for (int j = 0; j < m; ++j) {
      composite[j] = (present >> j) & Mask{1} ? instance[j] : ref[j];
    }
    outputs[k] = predict_unchecked(model, composite);
  };
  if (exec == Exec::serial || n < 64) {
    std::vector<double> composite(m);
    for (int k = 0; k < n; ++k) one_row(k, composite);
  } else {
#pragma omp parallel
    {
      std::vector<double> composite(m);
#pragma omp for schedule(static)
      for (int k = 0; k < n; ++k) one_row(k, composite);
    }
  }
  // Fixed-order sum keeps serial and parallel results bit-identical.
  double sum = 0.0;
  for (double v : outputs) sum += v;
  return sum / n;
}

MaskedGame::MaskedGame(ModelSpec model, std::vector<double> instance,
                       const BackgroundData& background,
                       MaskedGameOptions options)
    : GameOracle(static_cast<int>(instance.size())),
      model_(std::move(model)),
      instance_(std::move(instance)),
      background_(background.capped(options.background_cap,
                                    options.subsample_seed)),
      options_(options) {
  validate(model_);
  if (background_.num_cols() != num_features()) {
    throw Error(ErrorCode::shape,
                "background has " + std::to_string(background_.num_cols()) +
                    " columns, instance has " + std::to_string(num_features()));
  }
  full_value_ = predict(model_, instance_);
}

double MaskedGame::evaluate(const Coalition& coalition) const {
  const Mask present = coalition.mask();
  if (present == full_mask(num_features())) {
    model_calls_.fetch_add(1, std::memory_order_relaxed);
    return full_value_;
  }
  if (options_.mode == MaskingMode::mean_imputation) {
    model_calls_.fetch_add(1, std::memory_order_relaxed);
    std::vector<double> composite(instance_);
    const auto& means = background_.means();
    for (int j = 0; j < num_features(); ++j) {
      if (!coalition.contains(j)) composite[j] = means[j];
    }
    return predict_unchecked(model_, composite);
  }
  model_calls_.fetch_add(background_.num_rows(), std::memory_order_relaxed);
  return masked_average(model_, instance_, background_, present, options_.exec);
}

}  // namespace shapkit
