#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/topology.hpp"

namespace holmes {

enum class PartitionStrategy { kUniform, kSelfAdapting };

std::string_view to_string(PartitionStrategy strategy);
std::optional<PartitionStrategy> partition_strategy_from_string(std::string_view name);

struct PartitionPlan {
  PartitionStrategy strategy = PartitionStrategy::kUniform;
  double alpha = 1.0;
  std::vector<double> cluster_alphas;
  std::vector<int> stage_layers;    // length p
  std::vector<int> cluster_layers;  // per cluster, in topology order
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kClampedAlpha = "CLAMPED_ALPHA";

// L layers over p stages; counts differ by at most one and the earliest
// stages take the remainder.
std::vector<int> uniform_partition(int layers, int stages);

struct TwoNicSplit {
  int ib_layers = 0;
  int roce_layers = 0;
  std::optional<std::string> warning;
};

// N_ib = floor(alpha * S(IB) / (S(IB) + S(RoCE)) * L), N_roce = L - N_ib.
// Out-of-range results are clamped to [1, L-1] with a CLAMPED_ALPHA warning.
TwoNicSplit two_nic_split(int layers, double s_ib, double s_roce, double alpha);

struct ClusterAllocation {
  std::vector<int> layers;
  std::vector<std::string> warnings;
};

// Speed-proportional allocation over M clusters. The first M-1 clusters get
// floor(alpha_i * S_i / sum(S) * L); the last takes the remainder. Each
// cluster's share must fit its memory: layers * mem_per_layer <= dmem.
// `alphas` needs at least M-1 entries.
ClusterAllocation multi_cluster_alloc(int layers, std::span<const double> speeds,
                                      std::span<const double> alphas,
                                      double mem_per_layer_gb,
                                      std::span<const double> dmem_gb);

// Number of pipeline stages hosted by each cluster (requires a clean validate).
std::vector<int> stages_per_cluster(const ParallelConfig& cfg,
                                    const ClusterTopology& topo);

// Expand per-cluster layer totals into per-stage counts by splitting each
// cluster's total uniformly over the stages it hosts, in rank order.
PartitionPlan stages_from_cluster_alloc(std::span<const int> cluster_layers,
                                        const ParallelConfig& cfg,
                                        const ClusterTopology& topo);

}  // namespace holmes
