#include "shapkit/specific.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shapkit/error.hpp"
#include "shapkit/exact.hpp"
#include "shapkit/kernel.hpp"

namespace shapkit {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::numeric, std::string(what) + " is not finite");
    }
  }
}

double activate(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    default: return z;
  }
}

double derivative(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    default: return 1.0;
  }
}

// Shapley values of one max-pool unit, where absent inputs sit at their
// reference activation: v(S) = max_i (i in S ? z_i : ref_i).
std::vector<double> pool_shapley(std::span<const double> z,
                                 std::span<const double> ref) {
  const double r = ref.front();
  const bool common_ref =
      std::all_of(ref.begin(), ref.end(), [r](double v) { return v == r; });
  const double top = *std::max_element(z.begin(), z.end());
  if (common_ref && top >= r) {
    // Then v(S) = max(r, max_{i in S} z_i), the game max_shap solves.
    return max_shap(z, r).attributions;
  }
  const int p = static_cast<int>(z.size());
  if (p > kMaxExactFeatures) {
    throw Error(ErrorCode::config,
                "maxpool groups with distinct references are limited to 20 "
                "inputs");
  }
  std::vector<double> table(std::size_t{1} << p);
  for (Mask s = 0; s < table.size(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i) best = std::max(best, (s >> i) & 1 ? z[i] : ref[i]);
    table[s] = best;
  }
  return shapley_exact(TabularGame(p, std::move(table)), Exec::serial)
      .attributions;
}

}  // namespace

Explanation linear_shap(const LinearModel& model, std::span<const double> x,
                        const BackgroundData& background) {
  const int m = static_cast<int>(model.weights.size());
  if (static_cast<int>(x.size()) != m || background.num_cols() != m) {
    throw Error(ErrorCode::shape, "linear_shap: model has " + std::to_string(m) +
                                      " weights, instance " +
                                      std::to_string(x.size()) +
                                      ", background " +
                                      std::to_string(background.num_cols()));
  }
  require_finite(x, "instance");
  const auto& mean = background.means();
  Explanation e;
  e.method = Method::linear;
  e.attributions.resize(m);
  e.base_value = model.bias;
  e.fx_full = model.bias;
  for (int j = 0; j < m; ++j) {
    e.attributions[j] = model.weights[j] * (x[j] - mean[j]);
    e.base_value += model.weights[j] * mean[j];
    e.fx_full += model.weights[j] * x[j];
  }
  return e;
}

Explanation low_order_dispatch(const GameOracle& game, int threshold) {
  const int m = game.num_features();
  if (m > threshold) {
    throw Error(ErrorCode::budget_required,
                "M=" + std::to_string(m) + " exceeds the low-order threshold " +
                    std::to_string(threshold) +
                    "; use kernel_shap with an explicit budget");
  }
  KernelConfig config;
  config.budget = (std::uint64_t{1} << m) - 2;
  Explanation e = kernel_shap(game, config);
  e.method = Method::low_order;
  return e;
}

Explanation max_shap(std::span<const double> values, double reference) {
  const int m = static_cast<int>(values.size());
  if (m < 1) throw Error(ErrorCode::config, "max_shap needs at least one input");
  require_finite(values, "max_shap input");
  if (!std::isfinite(reference)) {
    throw Error(ErrorCode::numeric, "max_shap reference is not finite");
  }
  std::vector<double> level(m);
  for (int i = 0; i < m; ++i) level[i] = std::max(values[i], reference);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return level[a] < level[b]; });

  Explanation e;
  e.method = Method::max;
  e.attributions.assign(m, 0.0);
  e.base_value = reference;
  double below = reference;
  double share = 0.0;
  for (int k = 0; k < m; ++k) {
    const double here = level[order[k]];
    share += (here - below) / (m - k);
    e.attributions[order[k]] = share;
    below = here;
  }
  e.fx_full = below;
  return e;
}

Explanation deep_shap_reference(const MlpModel& model,
                                std::span<const double> x,
                                std::span<const double> reference,
                                int output_index) {
  validate(ModelSpec(model));
  const int n_in = model.input_size();
  if (static_cast<int>(x.size()) != n_in ||
      static_cast<int>(reference.size()) != n_in) {
    throw Error(ErrorCode::shape, "deep_shap: network expects " +
                                      std::to_string(n_in) + " inputs");
  }
  if (output_index < 0 || output_index >= model.output_size()) {
    throw Error(ErrorCode::config, "deep_shap: output index out of range");
  }
  require_finite(x, "instance");
  require_finite(reference, "reference");
  const auto act = mlp_trace(model, x);
  const auto ref = mlp_trace(model, reference);

  // Multipliers of the explained output with respect to the current
  // layer's outputs, walked from the last layer to the input.
  std::vector<double> mult(model.output_size(), 0.0);
  mult[output_index] = 1.0;
  for (int k = static_cast<int>(model.layers.size()) - 1; k >= 0; --k) {
    const DenseLayer& layer = model.layers[k];
    const auto& z = act[k].pre;
    const auto& zr = ref[k].pre;
    std::vector<double> pre(layer.rows, 0.0);
    switch (layer.activation) {
      case Activation::identity:
        pre = mult;
        break;
      case Activation::relu:
      case Activation::sigmoid:
        for (int r = 0; r < layer.rows; ++r) {
          const double dz = z[r] - zr[r];
          const double slope =
              dz != 0.0 ? (activate(layer.activation, z[r]) -
                           activate(layer.activation, zr[r])) / dz
                        : derivative(layer.activation, z[r]);
          pre[r] = mult[r] * slope;
        }
        break;
      case Activation::maxpool:
        for (int g = 0; g < layer.output_size(); ++g) {
          const std::size_t first = static_cast<std::size_t>(g) * layer.pool;
          std::span<const double> zin(z.data() + first, layer.pool);
          std::span<const double> rin(zr.data() + first, layer.pool);
          const auto phi = pool_shapley(zin, rin);
          const auto argmax = std::max_element(zin.begin(), zin.end()) - zin.begin();
          for (int i = 0; i < layer.pool; ++i) {
            const double dz = zin[i] - rin[i];
            const double local = dz != 0.0 ? phi[i] / dz : (i == argmax ? 1.0 : 0.0);
            pre[first + i] = mult[g] * local;
          }
        }
        break;
    }
    std::vector<double> in(layer.cols, 0.0);
    for (int r = 0; r < layer.rows; ++r) {
      if (pre[r] == 0.0) continue;
      for (int c = 0; c < layer.cols; ++c) in[c] += layer.weight(r, c) * pre[r];
    }
    mult = std::move(in);
  }

  Explanation e;
  e.method = Method::deep;
  e.attributions.resize(n_in);
  for (int i = 0; i < n_in; ++i) e.attributions[i] = mult[i] * (x[i] - reference[i]);
  e.base_value = ref.back().post[output_index];
  e.fx_full = act.back().post[output_index];
  return e;
}

Explanation deep_shap(const MlpModel& model, std::span<const double> x,
                      const BackgroundData& background, int output_index) {
  if (background.num_cols() != model.input_size()) {
    throw Error(ErrorCode::shape, "deep_shap: background width differs from "
                                  "network input size");
  }
  return deep_shap_reference(model, x, background.means(), output_index);
}

}  // namespace shapkit
