#include "shapkit/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shapkit/error.hpp"

namespace shapkit {
namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::parse, path + ": " + what);
}

const json& field(const json& obj, const std::string& key,
                  const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) parse_fail(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) parse_fail(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> integers(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(integer(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Activation parse_activation(const json& v, const std::string& path) {
  if (!v.is_string()) parse_fail(path, "expected a string");
  const auto s = v.get<std::string>();
  for (Activation a : {Activation::identity, Activation::relu,
                       Activation::sigmoid, Activation::maxpool}) {
    if (activation_name(a) == s) return a;
  }
  parse_fail(path, "unsupported activation '" + s + "'");
}

DenseLayer parse_layer(const json& v, const std::string& path) {
  if (!v.is_object()) parse_fail(path, "expected an object");
  DenseLayer layer;
  const json& w = field(v, "weights", path + ".");
  if (w.is_array() && !w.empty() && w.front().is_array()) {
    layer.rows = static_cast<int>(w.size());
    layer.cols = static_cast<int>(w.front().size());
    for (std::size_t r = 0; r < w.size(); ++r) {
      const std::string at = path + ".weights[" + std::to_string(r) + "]";
      auto row = numbers(w[r], at);
      if (static_cast<int>(row.size()) != layer.cols) {
        throw Error(ErrorCode::validation, at + ": ragged matrix row");
      }
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
  } else {
    layer.rows = integer(field(v, "rows", path + "."), path + ".rows");
    layer.cols = integer(field(v, "cols", path + "."), path + ".cols");
    layer.weights = numbers(w, path + ".weights");
  }
  if (auto it = v.find("bias"); it != v.end()) {
    layer.bias = numbers(*it, path + ".bias");
  } else {
    layer.bias.assign(std::max(layer.rows, 0), 0.0);
  }
  if (auto it = v.find("activation"); it != v.end()) {
    layer.activation = parse_activation(*it, path + ".activation");
  }
  if (auto it = v.find("pool"); it != v.end()) {
    layer.pool = integer(*it, path + ".pool");
  } else if (layer.activation == Activation::maxpool) {
    layer.pool = 2;
  }
  return layer;
}

ModelSpec parse_model(const json& doc, const std::string& type) {
  if (type == "linear") {
    LinearModel m;
    m.weights = numbers(field(doc, "weights", ""), "weights");
    if (auto it = doc.find("bias"); it != doc.end()) m.bias = number(*it, "bias");
    if (auto it = doc.find("num_features"); it != doc.end() &&
        integer(*it, "num_features") != static_cast<int>(m.weights.size())) {
      throw Error(ErrorCode::validation,
                  "num_features: does not match weights length");
    }
    return m;
  }
  if (type == "tree") {
    DecisionTree t;
    t.num_features = integer(field(doc, "num_features", ""), "num_features");
    t.feature = integers(field(doc, "feature", ""), "feature");
    t.threshold = numbers(field(doc, "threshold", ""), "threshold");
    t.left = integers(field(doc, "left", ""), "left");
    t.right = integers(field(doc, "right", ""), "right");
    t.value = numbers(field(doc, "value", ""), "value");
    return t;
  }
  if (type == "mlp") {
    MlpModel m;
    const json& layers = field(doc, "layers", "");
    if (!layers.is_array()) parse_fail("layers", "expected an array");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      m.layers.push_back(
          parse_layer(layers[k], "layers[" + std::to_string(k) + "]"));
    }
    if (auto it = doc.find("output_index"); it != doc.end()) {
      m.output_index = integer(*it, "output_index");
    }
    return m;
  }
  if (type == "max") {
    MaxModel m;
    m.num_features = integer(field(doc, "num_features", ""), "num_features");
    if (auto it = doc.find("floor"); it != doc.end()) m.floor = number(*it, "floor");
    return m;
  }
  throw Error(ErrorCode::parse, "type: unknown model type '" + type + "'");
}

}  // namespace

ModelDocument parse_model_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("document: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("document", "expected a JSON object");
  const json& t = field(doc, "type", "");
  if (!t.is_string()) parse_fail("type", "expected a string");
  const auto type = t.get<std::string>();

  ModelDocument out;
  if (type == "tabular") {
    out.tabular_features =
        integer(field(doc, "num_features", ""), "num_features");
    out.tabular_values = numbers(field(doc, "values", ""), "values");
    // Constructing the game validates the table length.
    TabularGame probe(out.tabular_features, *out.tabular_values);
    return out;
  }
  out.model = parse_model(doc, type);
  validate(*out.model);
  return out;
}

ModelDocument load_model_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_document(buf.str());
}

ModelSpec load_model(const std::string& text) {
  ModelDocument doc = parse_model_document(text);
  if (!doc.model) {
    throw Error(ErrorCode::config, "type: expected a model, got a tabular game");
  }
  return *doc.model;
}

std::string model_to_json(const ModelSpec& model) {
  json doc;
  if (const auto* m = std::get_if<LinearModel>(&model)) {
    doc = {{"type", "linear"}, {"weights", m->weights}, {"bias", m->bias}};
  } else if (const auto* t = std::get_if<DecisionTree>(&model)) {
    doc = {{"type", "tree"},           {"num_features", t->num_features},
           {"feature", t->feature},    {"threshold", t->threshold},
           {"left", t->left},          {"right", t->right},
           {"value", t->value}};
  } else if (const auto* n = std::get_if<MlpModel>(&model)) {
    json layers = json::array();
    for (const DenseLayer& l : n->layers) {
      json rows = json::array();
      for (int r = 0; r < l.rows; ++r) {
        rows.push_back(std::vector<double>(
            l.weights.begin() + static_cast<std::ptrdiff_t>(r) * l.cols,
            l.weights.begin() + static_cast<std::ptrdiff_t>(r + 1) * l.cols));
      }
      json layer = {{"weights", rows},
                    {"bias", l.bias},
                    {"activation", std::string(activation_name(l.activation))}};
      if (l.activation == Activation::maxpool) layer["pool"] = l.pool;
      layers.push_back(layer);
    }
    doc = {{"type", "mlp"}, {"layers", layers}, {"output_index", n->output_index}};
  } else {
    const auto& x = std::get<MaxModel>(model);
    doc = {{"type", "max"}, {"num_features", x.num_features}};
    if (std::isfinite(x.floor)) doc["floor"] = x.floor;
  }
  return doc.dump(2) + "\n";
}

std::string tabular_game_to_json(const TabularGame& game) {
  json doc = {{"type", "tabular"},
              {"num_features", game.num_features()},
              {"values", game.values()}};
  return doc.dump(2) + "\n";
}

}  // namespace shapkit
