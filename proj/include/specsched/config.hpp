#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "specsched/core.hpp"
#include "specsched/policies.hpp"
#include "specsched/workload.hpp"

namespace specsched {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Raised for malformed or out-of-range configuration; the message starts with
// the dotted key path of the offending value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Everything needed to generate a workload and run any policy on it.
struct ExperimentConfig {
  std::string profile = "chat";
  WorkloadConfig workload;
  CostModel cost;
  PolicySettings policy;
};

// Names of the built-in workload profiles, in file order.
std::vector<std::string> profile_names();

// Defaults for a named profile; throws ConfigError for unknown names.
ExperimentConfig profile_config(std::string_view name);

// Parses a config document. A "workload.profile" key (default "chat") selects
// the base profile; every other key overrides it.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Parses a cost object, either bare or wrapped in {"cost": {...}}, over `base`.
CostModel cost_from_json(const nlohmann::json& doc, const CostModel& base);
CostModel load_cost(const std::filesystem::path& path, const CostModel& base);

nlohmann::json cost_to_json(const CostModel& cost);

// Stable 16-hex-digit FNV-1a digest of the canonical JSON form.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace specsched
