#include "sbm/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sbm/error.hpp"

namespace sbm {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& origin, const std::string& what) {
  throw Error(ErrorCode::ConfigError, origin + ": " + what);
}

double number_field(const json& obj, const std::string& key, const std::string& origin,
                    const std::string& path) {
  if (!obj.contains(key)) config_error(origin, "missing field '" + path + key + "'");
  if (!obj[key].is_number()) config_error(origin, "field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

Eigen::VectorXd vector_field(const json& doc, const std::string& key, const std::string& origin) {
  if (!doc.contains(key)) config_error(origin, "missing field '" + key + "'");
  const json& arr = doc[key];
  if (!arr.is_array() || arr.empty()) config_error(origin, "field '" + key + "' must be a non-empty array");
  Eigen::VectorXd out(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) config_error(origin, "field '" + key + "[" + std::to_string(i) + "]' must be a number");
    out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_field(const json& doc, const std::string& key, const std::string& origin) {
  if (!doc.contains(key)) config_error(origin, "missing field '" + key + "'");
  const json& rows = doc[key];
  if (!rows.is_array() || rows.empty()) config_error(origin, "field '" + key + "' must be an array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  Eigen::MatrixXd out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = key + "[" + std::to_string(i) + "]";
    if (!rows[i].is_array() || rows[i].size() != cols || cols == 0) {
      config_error(origin, "field '" + where + "' must be a row of length " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number()) {
        config_error(origin, "field '" + where + "[" + std::to_string(j) + "]' must be a number");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return out;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(origin, "syntax error at line " + std::to_string(line_of(text, e.byte)));
  }
  if (!doc.is_object()) config_error(origin, "top level must be an object");
  if (doc.contains("two_cluster")) {
    const json& tc = doc["two_cluster"];
    if (!tc.is_object()) config_error(origin, "field 'two_cluster' must be an object");
    const double p = number_field(tc, "p", origin, "two_cluster.");
    const double a = number_field(tc, "a", origin, "two_cluster.");
    const double d = number_field(tc, "d", origin, "two_cluster.");
    return ModelConfig{two_cluster_model(p, a, d), text};
  }
  const Eigen::VectorXd pi = vector_field(doc, "pi", origin);
  const Eigen::MatrixXd M = matrix_field(doc, "M", origin);
  return ModelConfig{build_model(pi, M), text};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelConfig load_model_config(const std::string& path) { return parse_model_config(read_text_file(path), path); }

nlohmann::json model_to_json(const BlockModel& model) {
  json out;
  out["pi"] = std::vector<double>(model.pi().begin(), model.pi().end());
  json rows = json::array();
  for (int i = 0; i < model.s(); ++i) {
    std::vector<double> row(model.s());
    for (int j = 0; j < model.s(); ++j) row[j] = model.M()(i, j);
    rows.push_back(row);
  }
  out["M"] = rows;
  return out;
}

}  // namespace sbm
