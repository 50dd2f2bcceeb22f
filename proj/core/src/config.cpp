#include "unlock/config.hpp"

#include <set>

#include <json.hpp>

#include "unlock/binio.hpp"
#include "unlock/errors.hpp"

namespace unlock {

using nlohmann::json;

namespace {

void check_pair(const char* name, const ThresholdPair& pair) {
  if (pair.fix < 0.0 || pair.fix > 1.0 || pair.per < 0.0 || pair.per > 1.0) {
    throw ConfigError(std::string("config: ") + name +
                      " thresholds must lie in [0, 1]");
  }
}

json pair_to_json(const ThresholdPair& pair) {
  return json{{"fix", pair.fix}, {"per", pair.per}};
}

ThresholdPair pair_from_json(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains("fix") || !j.contains("per") ||
      !j["fix"].is_number() || !j["per"].is_number()) {
    throw ConfigError(path + ": " + key + " must be an object with numeric fix and per");
  }
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (k != "fix" && k != "per") {
      throw ConfigError(path + ": unknown key " + key + "." + k);
    }
  }
  return {j["fix"].get<double>(), j["per"].get<double>()};
}

}  // namespace

void PipelineConfig::validate() const {
  check_pair("semantic", semantic);
  check_pair("instance", instance);
  check_pair("amodal", amodal);
  check_pair("strict", strict);
  if (confidence_floor < 0.0 || confidence_floor > 1.0) {
    throw ConfigError("config: confidence_floor must lie in [0, 1]");
  }
  if (pool_capacity == 0) {
    throw ConfigError("config: pool_capacity must be positive");
  }
}

std::string PipelineConfig::to_json() const {
  json j;
  j["thresholds"] = json{{"semantic", pair_to_json(semantic)},
                         {"instance", pair_to_json(instance)},
                         {"amodal", pair_to_json(amodal)}};
  j["strict"] = pair_to_json(strict);
  j["mix_count"] = mix_count;
  j["pool_capacity"] = pool_capacity;
  j["confidence_floor"] = confidence_floor;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(const std::string& text, const std::string& path) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError(path + ": config root must be an object");
  }

  PipelineConfig config;
  const std::set<std::string> known{"thresholds",    "strict",           "mix_count",
                                    "pool_capacity", "confidence_floor", "seed"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) {
      throw ConfigError(path + ": unknown key " + key);
    }
  }

  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    if (!t.is_object()) {
      throw ConfigError(path + ": thresholds must be an object");
    }
    for (const auto& [key, value] : t.items()) {
      if (key == "semantic") {
        config.semantic = pair_from_json(value, path, "thresholds.semantic");
      } else if (key == "instance") {
        config.instance = pair_from_json(value, path, "thresholds.instance");
      } else if (key == "amodal") {
        config.amodal = pair_from_json(value, path, "thresholds.amodal");
      } else {
        throw ConfigError(path + ": unknown key thresholds." + key);
      }
    }
  }
  if (j.contains("strict")) {
    config.strict = pair_from_json(j["strict"], path, "strict");
  }
  if (j.contains("mix_count")) {
    if (!j["mix_count"].is_number_unsigned()) {
      throw ConfigError(path + ": mix_count must be a non-negative integer");
    }
    config.mix_count = j["mix_count"].get<std::size_t>();
  }
  if (j.contains("pool_capacity")) {
    if (!j["pool_capacity"].is_number_unsigned()) {
      throw ConfigError(path + ": pool_capacity must be a non-negative integer");
    }
    config.pool_capacity = j["pool_capacity"].get<std::size_t>();
  }
  if (j.contains("confidence_floor")) {
    if (!j["confidence_floor"].is_number()) {
      throw ConfigError(path + ": confidence_floor must be a number");
    }
    config.confidence_floor = j["confidence_floor"].get<double>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      throw ConfigError(path + ": seed must be a non-negative integer");
    }
    config.seed = j["seed"].get<std::uint64_t>();
  }

  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return PipelineConfig::from_json(std::string(bytes.begin(), bytes.end()), path);
}

void save_config(const PipelineConfig& config, const std::string& path) {
  const std::string text = config.to_json();
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace unlock
