#include "sbm/manifest.hpp"

#include <cstdio>

#include "sbm/error.hpp"
#include "sbm/rng.hpp"

namespace sbm {

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  nlohmann::json out;
  out["subcommand"] = manifest.subcommand;
  out["argv"] = manifest.argv;
  out["inputs"] = manifest.inputs;
  out["seed"] = manifest.seed ? nlohmann::json(*manifest.seed) : nlohmann::json(nullptr);
  out["generator"] = manifest.generator;
  out["version"] = manifest.version;
  out["outputs"] = manifest.outputs;
  return out;
}

RunManifest manifest_from_json(const nlohmann::json& doc) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!doc.is_object() || !doc.contains(key)) {
      throw Error(ErrorCode::ConfigError, std::string("manifest: missing field '") + key + "'");
    }
    return doc[key];
  };
  RunManifest m;
  try {
    m.subcommand = need("subcommand").get<std::string>();
    m.argv = need("argv").get<std::vector<std::string>>();
    m.inputs = need("inputs").get<std::map<std::string, std::string>>();
    const auto& seed = need("seed");
    if (!seed.is_null()) m.seed = seed.get<std::uint64_t>();
    m.generator = need("generator").get<std::string>();
    m.version = need("version").get<std::string>();
    m.outputs = need("outputs").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::type_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace sbm
