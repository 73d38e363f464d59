#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "shapkit/game.hpp"
#include "shapkit/model.hpp"

namespace shapkit {

/// A parsed model document. Besides the four model types, the loader
/// accepts {"type":"tabular","num_features":M,"values":[...]} documents
/// that describe a game directly (used for hand-written fixtures).
struct ModelDocument {
  std::optional<ModelSpec> model;
  std::optional<std::vector<double>> tabular_values;
  int tabular_features = 0;
};

// Parse errors carry a JSON-pointer-like field path, e.g. "layers[1].weights".
ModelDocument parse_model_document(const std::string& text);
ModelDocument load_model_document(const std::filesystem::path& path);

// Convenience for callers that require a model (rejects tabular documents).
ModelSpec load_model(const std::string& text);

std::string model_to_json(const ModelSpec& model);
std::string tabular_game_to_json(const TabularGame& game);

}  // namespace shapkit
