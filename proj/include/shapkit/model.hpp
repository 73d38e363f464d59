#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace shapkit {

/// f(x) = sum_j weights[j] * x[j] + bias.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Binary regression tree stored as parallel node arrays. A node is a leaf
/// when both children are -1. Internal nodes send x[feature] <= threshold
/// to the left child, so ties go left. The root is node 0.
struct DecisionTree {
  int num_features = 0;
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  int num_nodes() const { return static_cast<int>(feature.size()); }
  bool is_leaf(int node) const { return left[node] < 0; }
};

enum class Activation { identity, relu, sigmoid, maxpool };

std::string_view activation_name(Activation activation);

/// out = activation(weights * in + bias) with `weights` row-major
/// rows x cols. For maxpool the pre-activation vector is split into
/// consecutive groups of `pool` entries and each group is reduced by max.
struct DenseLayer {
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::identity;
  int pool = 1;

  int output_size() const {
    return activation == Activation::maxpool ? rows / pool : rows;
  }
  double weight(int r, int c) const {
    return weights[static_cast<std::size_t>(r) * cols + c];
  }
};

struct MlpModel {
  std::vector<DenseLayer> layers;
  // Output explained when the last layer is vector-valued.
  int output_index = 0;

  int input_size() const { return layers.front().cols; }
  int output_size() const { return layers.back().output_size(); }
};

/// f(x) = max(floor, max_i x_i).
struct MaxModel {
  int num_features = 0;
  double floor = -std::numeric_limits<double>::infinity();
};

using ModelSpec = std::variant<LinearModel, DecisionTree, MlpModel, MaxModel>;

std::string_view model_type_name(const ModelSpec& model);

// Input dimension of the model.
int arity(const ModelSpec& model);

// Throws validation error describing the offending field when a model
// violates its structural invariants (shape chains, tree acyclicity, ...).
void validate(const ModelSpec& model);

// Shape error on arity mismatch, numeric error on non-finite input.
double predict(const ModelSpec& model, std::span<const double> x);

// Unchecked evaluation used by hot loops after inputs were validated once.
double predict_unchecked(const ModelSpec& model, std::span<const double> x);

double predict_tree(const DecisionTree& tree, std::span<const double> x);

// All outputs of the network.
std::vector<double> mlp_forward(const MlpModel& model,
                                std::span<const double> x);

struct LayerTrace {
  std::vector<double> pre;   // weights * in + bias
  std::vector<double> post;  // after activation
};
std::vector<LayerTrace> mlp_trace(const MlpModel& model,
                                  std::span<const double> x);

// Sorted distinct features referenced by internal nodes reachable from
// the root.
std::vector<int> used_features(const DecisionTree& tree);

}  // namespace shapkit
