#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sbm {

inline constexpr std::string_view kToolVersion = "0.1.0";

// 16 lowercase hex digits of FNV-1a 64.
std::string digest_hex(std::string_view bytes);

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  // Content of every file-valued flag (--config, --graph), keyed by flag.
  std::map<std::string, std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::string generator;
  std::string version{kToolVersion};
  // Output file name -> digest.
  std::map<std::string, std::string> outputs;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
// Throws ConfigError naming a missing or mistyped field.
RunManifest manifest_from_json(const nlohmann::json& doc);

}  // namespace sbm
