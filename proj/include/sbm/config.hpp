#pragma once

#include <string>

#include <json.hpp>

#include "sbm/model.hpp"

namespace sbm {

// A model config is a JSON object, either
//   {"pi": [...], "M": [[...], ...]}
// or
//   {"two_cluster": {"p": ..., "a": ..., "d": ...}}.
struct ModelConfig {
  BlockModel model;
  std::string text;
};

// Throws ConfigError naming the line of a syntax error or the offending
// field; model validation errors propagate unchanged.
ModelConfig parse_model_config(const std::string& text, const std::string& origin = "config");
ModelConfig load_model_config(const std::string& path);

std::string read_text_file(const std::string& path);

nlohmann::json model_to_json(const BlockModel& model);

}  // namespace sbm
