#pragma once

// Test-side reference implementations. These deliberately share no code
// with the library beyond model prediction and the game interface.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "shapkit/game.hpp"
#include "shapkit/model.hpp"

namespace oracle {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline int bits(std::uint64_t m) {
  int c = 0;
  for (; m; m &= m - 1) ++c;
  return c;
}

// Shapley values from a full value table indexed by mask.
inline std::vector<double> shapley_subsets(const std::vector<double>& v, int m) {
  std::vector<double> phi(m, 0.0);
  const double total = factorial(m);
  for (int i = 0; i < m; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
      if (s & bit) continue;
      const int k = bits(s);
      phi[i] += factorial(k) * factorial(m - k - 1) / total * (v[s | bit] - v[s]);
    }
  }
  return phi;
}

// Average marginal contribution over every ordering.
inline std::vector<double> shapley_orderings(const std::vector<double>& v, int m) {
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(m, 0.0);
  double count = 0.0;
  do {
    std::uint64_t s = 0;
    for (int i : order) {
      phi[i] += v[s | (std::uint64_t{1} << i)] - v[s];
      s |= std::uint64_t{1} << i;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& p : phi) p /= count;
  return phi;
}

inline std::vector<double> random_table(int m, std::mt19937_64& rng, double lo = -1.0,
                                        double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(std::size_t{1} << m);
  for (double& x : v) x = u(rng);
  return v;
}

// E_b[f(x_S, b_rest)] over background rows.
inline double masked_value(const shapkit::ModelSpec& model, std::span<const double> x,
                           const std::vector<std::vector<double>>& background,
                           std::uint64_t mask) {
  double sum = 0.0;
  for (const auto& b : background) {
    std::vector<double> z(b);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if ((mask >> i) & 1u) z[i] = x[i];
    }
    sum += shapkit::predict(model, z);
  }
  return sum / static_cast<double>(background.size());
}

inline std::vector<double> masked_table(const shapkit::ModelSpec& model,
                                        std::span<const double> x,
                                        const std::vector<std::vector<double>>& background) {
  const int m = static_cast<int>(x.size());
  std::vector<double> v(std::size_t{1} << m);
  for (std::uint64_t s = 0; s < v.size(); ++s) v[s] = masked_value(model, x, background, s);
  v.back() = shapkit::predict(model, x);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Random relu network with the given layer widths; last layer identity.
inline shapkit::MlpModel random_mlp(const std::vector<int>& widths, std::mt19937_64& rng,
                                    shapkit::Activation hidden = shapkit::Activation::relu) {
  std::normal_distribution<double> n(0.0, 1.0);
  shapkit::MlpModel mlp;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    shapkit::DenseLayer l;
    l.cols = widths[k];
    l.rows = widths[k + 1];
    l.weights.resize(static_cast<std::size_t>(l.rows) * l.cols);
    for (double& w : l.weights) w = n(rng);
    l.bias.resize(l.rows);
    for (double& b : l.bias) b = 0.5 * n(rng);
    l.activation = k + 2 == widths.size() ? shapkit::Activation::identity : hidden;
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

inline std::vector<std::vector<double>> normal_rows(int n, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  for (auto& r : rows)
    for (double& x : r) x = d(rng);
  return rows;
}

}  // namespace oracle
