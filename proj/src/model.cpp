#include "shapkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "shapkit/error.hpp"

namespace shapkit {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::validation, path + ": " + what);
}

double activate(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    default: return z;
  }
}

void validate_linear(const LinearModel& m) {
  if (m.weights.empty()) invalid("weights", "must be non-empty");
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    if (!std::isfinite(m.weights[j])) {
      invalid("weights[" + std::to_string(j) + "]", "not finite");
    }
  }
  if (!std::isfinite(m.bias)) invalid("bias", "not finite");
}

void validate_tree(const DecisionTree& t) {
  const int n = t.num_nodes();
  if (t.num_features < 1) invalid("num_features", "must be >= 1");
  if (n == 0) invalid("feature", "tree has no nodes");
  auto same = [n](const auto& v, const char* name) {
    if (static_cast<int>(v.size()) != n) {
      invalid(name, "length " + std::to_string(v.size()) +
                        " differs from feature[] length " + std::to_string(n));
    }
  };
  same(t.threshold, "threshold");
  same(t.left, "left");
  same(t.right, "right");
  same(t.value, "value");
  for (int i = 0; i < n; ++i) {
    const std::string at = "[" + std::to_string(i) + "]";
    const bool leaf_l = t.left[i] == -1;
    const bool leaf_r = t.right[i] == -1;
    if (leaf_l != leaf_r) {
      invalid("left" + at, "leaf nodes need -1 for both children");
    }
    if (leaf_l) {
      if (!std::isfinite(t.value[i])) invalid("value" + at, "not finite");
      continue;
    }
    if (t.left[i] < 0 || t.left[i] >= n) invalid("left" + at, "out of range");
    if (t.right[i] < 0 || t.right[i] >= n) {
      invalid("right" + at, "out of range");
    }
    if (t.feature[i] < 0 || t.feature[i] >= t.num_features) {
      invalid("feature" + at, "index must be < num_features");
    }
    if (!std::isfinite(t.threshold[i])) invalid("threshold" + at, "not finite");
  }
  // Iterative DFS; a grey node met again closes a cycle.
  std::vector<char> colour(n, 0);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  colour[0] = 1;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (t.is_leaf(node) || next == 2) {
      colour[node] = 2;
      stack.pop_back();
      continue;
    }
    const int child = next++ == 0 ? t.left[node] : t.right[node];
    if (colour[child] == 1) {
      invalid("left/right[" + std::to_string(node) + "]",
              "cycle through node " + std::to_string(child));
    }
    if (colour[child] == 0) {
      colour[child] = 1;
      stack.emplace_back(child, 0);
    }
  }
}

void validate_mlp(const MlpModel& m) {
  if (m.layers.empty()) invalid("layers", "must be non-empty");
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    const DenseLayer& l = m.layers[k];
    const std::string at = "layers[" + std::to_string(k) + "]";
    if (l.rows < 1 || l.cols < 1) invalid(at, "rows and cols must be >= 1");
    if (l.weights.size() != static_cast<std::size_t>(l.rows) * l.cols) {
      invalid(at + ".weights", "expected " + std::to_string(l.rows) + "x" +
                                   std::to_string(l.cols) + " entries, got " +
                                   std::to_string(l.weights.size()));
    }
    if (l.bias.size() != static_cast<std::size_t>(l.rows)) {
      invalid(at + ".bias", "expected " + std::to_string(l.rows) + " entries");
    }
    for (double w : l.weights) {
      if (!std::isfinite(w)) invalid(at + ".weights", "not finite");
    }
    for (double b : l.bias) {
      if (!std::isfinite(b)) invalid(at + ".bias", "not finite");
    }
    if (l.activation == Activation::maxpool) {
      if (l.pool < 1 || l.rows % l.pool != 0) {
        invalid(at + ".pool", "must divide rows");
      }
    } else if (l.pool != 1) {
      invalid(at + ".pool", "only maxpool layers take a pool size");
    }
    if (k > 0 && l.cols != m.layers[k - 1].output_size()) {
      invalid(at, "expects " + std::to_string(l.cols) +
                      " inputs but previous layer produces " +
                      std::to_string(m.layers[k - 1].output_size()));
    }
  }
  if (m.output_index < 0 || m.output_index >= m.output_size()) {
    invalid("output_index", "out of range for " +
                                std::to_string(m.output_size()) + " outputs");
  }
}

}  // namespace

std::string_view activation_name(Activation activation) {
  switch (activation) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::maxpool: return "maxpool";
  }
  return "unknown";
}

std::string_view model_type_name(const ModelSpec& model) {
  return std::visit(overloaded{
                        [](const LinearModel&) { return "linear"; },
                        [](const DecisionTree&) { return "tree"; },
                        [](const MlpModel&) { return "mlp"; },
                        [](const MaxModel&) { return "max"; },
                    },
                    model);
}

int arity(const ModelSpec& model) {
  return std::visit(
      overloaded{
          [](const LinearModel& m) { return static_cast<int>(m.weights.size()); },
          [](const DecisionTree& t) { return t.num_features; },
          [](const MlpModel& m) { return m.input_size(); },
          [](const MaxModel& m) { return m.num_features; },
      },
      model);
}

void validate(const ModelSpec& model) {
  std::visit(overloaded{
                 [](const LinearModel& m) { validate_linear(m); },
                 [](const DecisionTree& t) { validate_tree(t); },
                 [](const MlpModel& m) { validate_mlp(m); },
                 [](const MaxModel& m) {
                   if (m.num_features < 1) {
                     invalid("num_features", "must be >= 1");
                   }
                   if (std::isnan(m.floor)) invalid("floor", "is NaN");
                 },
             },
             model);
}

double predict_tree(const DecisionTree& tree, std::span<const double> x) {
  int node = 0;
  while (!tree.is_leaf(node)) {
    node = x[tree.feature[node]] <= tree.threshold[node] ? tree.left[node]
                                                         : tree.right[node];
  }
  return tree.value[node];
}

std::vector<LayerTrace> mlp_trace(const MlpModel& model,
                                  std::span<const double> x) {
  std::vector<LayerTrace> trace;
  trace.reserve(model.layers.size());
  std::vector<double> in(x.begin(), x.end());
  for (const DenseLayer& l : model.layers) {
    LayerTrace t;
    t.pre.resize(l.rows);
    for (int r = 0; r < l.rows; ++r) {
      double acc = l.bias[r];
      for (int c = 0; c < l.cols; ++c) acc += l.weight(r, c) * in[c];
      t.pre[r] = acc;
    }
    if (l.activation == Activation::maxpool) {
      t.post.resize(l.output_size());
      for (int g = 0; g < l.output_size(); ++g) {
        const auto first = t.pre.begin() + g * l.pool;
        t.post[g] = *std::max_element(first, first + l.pool);
      }
    } else {
      t.post.resize(l.rows);
      for (int r = 0; r < l.rows; ++r) t.post[r] = activate(l.activation, t.pre[r]);
    }
    in = t.post;
    trace.push_back(std::move(t));
  }
  return trace;
}

std::vector<double> mlp_forward(const MlpModel& model,
                                std::span<const double> x) {
  return mlp_trace(model, x).back().post;
}

double predict_unchecked(const ModelSpec& model, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const LinearModel& m) {
            double acc = m.bias;
            for (std::size_t j = 0; j < m.weights.size(); ++j) {
              acc += m.weights[j] * x[j];
            }
            return acc;
          },
          [&](const DecisionTree& t) { return predict_tree(t, x); },
          [&](const MlpModel& m) { return mlp_forward(m, x)[m.output_index]; },
          [&](const MaxModel& m) {
            double best = m.floor;
            for (double v : x) best = std::max(best, v);
            return best;
          },
      },
      model);
}

double predict(const ModelSpec& model, std::span<const double> x) {
  const int n = arity(model);
  if (static_cast<int>(x.size()) != n) {
    throw Error(ErrorCode::shape, "model expects " + std::to_string(n) +
                                      " inputs, got " +
                                      std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::numeric, "non-finite model input");
    }
  }
  return predict_unchecked(model, x);
}

std::vector<int> used_features(const DecisionTree& tree) {
  std::set<int> used;
  std::vector<int> stack{0};
  std::vector<char> seen(tree.num_nodes(), 0);
  while (!stack.empty()) {
    const int node = stack.back();
    stack.pop_back();
    if (seen[node]) continue;
    seen[node] = 1;
    if (tree.is_leaf(node)) continue;
    used.insert(tree.feature[node]);
    stack.push_back(tree.left[node]);
    stack.push_back(tree.right[node]);
  }
  return {used.begin(), used.end()};
}

}  // namespace shapkit
