#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace shapkit {

enum class Method {
  exact,
  permutation_exact,
  sampling,
  kernel,
  linear,
  low_order,
  max,
  deep,
};

std::string_view method_name(Method method);
// Inverse of method_name; also accepts the CLI spelling "low-order".
// Throws config error for unknown names.
Method parse_method(std::string_view name);

// True for estimators whose output is the Shapley value up to rounding.
bool is_exact_method(Method method);

/// Additive explanation of one prediction: base_value + sum(attributions)
/// reconstructs fx_full for exact methods.
struct Explanation {
  double base_value = 0.0;
  std::vector<double> attributions;
  double fx_full = 0.0;
  Method method = Method::exact;
  std::uint64_t evaluations_used = 0;

  int num_features() const { return static_cast<int>(attributions.size()); }
  double sum() const;
};

// |base_value + sum(attributions) - fx_full| <= tol.
bool check_local_accuracy(const Explanation& expl, double tol = 1e-9);

}  // namespace shapkit
