#pragma once

#include <cstdint>
#include <string>

namespace unlock {

struct ThresholdPair {
  double fix = 0.0;
  double per = 0.0;
};

// Tunables shared by every stage. The defaults are the values the adaptation
// recipe ships with; loading a config file overrides only the keys present.
struct PipelineConfig {
  ThresholdPair semantic{0.5, 0.8};
  ThresholdPair instance{0.5, 0.3};
  ThresholdPair amodal{0.3, 0.5};
  // Stricter pair used when admitting objects into the paste pool.
  ThresholdPair strict{0.95, 0.1};

  // Objects pasted per mixed image.
  std::size_t mix_count = 10;
  std::size_t pool_capacity = 2048;
  // Detections below this score do not take part in fusion.
  double confidence_floor = 0.5;

  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text, const std::string& path);
};

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& config, const std::string& path);

}  // namespace unlock
