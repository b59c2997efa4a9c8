#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/model.hpp"
#include "holmes/partition.hpp"
#include "holmes/simulator.hpp"
#include "holmes/topology.hpp"

namespace holmes {

// Malformed input: unreadable file, bad JSON, unknown keys, wrong types or
// values that break a type invariant. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultAlpha = 1.05;

struct PartitionSettings {
  PartitionStrategy strategy = PartitionStrategy::kSelfAdapting;
  double alpha = kDefaultAlpha;
  std::vector<double> cluster_alphas;  // optional, one per cluster
};

struct Scenario {
  std::string name;
  ClusterTopology topology;  // as declared, before IB-first ordering
  ModelSpec model;
  ParallelConfig parallel;
  PartitionSettings partition;
  CostModel cost;
  // Dotted paths of settings that fell back to non-measured defaults.
  std::vector<std::string> defaults_applied;
  std::string fingerprint;  // SHA-256 of the config bytes, hex
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace holmes
