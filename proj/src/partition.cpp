#include "holmes/partition.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kUniform: return "uniform";
    case PartitionStrategy::kSelfAdapting: return "self_adapting";
  }
  return "unknown";
}

std::optional<PartitionStrategy> partition_strategy_from_string(std::string_view name) {
  if (name == "uniform") return PartitionStrategy::kUniform;
  if (name == "self_adapting") return PartitionStrategy::kSelfAdapting;
  return std::nullopt;
}

std::vector<int> uniform_partition(int layers, int stages) {
  if (stages < 1 || layers < stages) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "cannot split " + std::to_string(layers) + " layers over " +
                    std::to_string(stages) + " stages");
  }
  std::vector<int> out(static_cast<std::size_t>(stages), layers / stages);
  for (int i = 0; i < layers % stages; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

TwoNicSplit two_nic_split(int layers, double s_ib, double s_roce, double alpha) {
  if (!(s_ib > 0.0) || !(s_roce > 0.0)) {
    throw Error(ErrorCode::kInvalidDevice, "device speeds must be positive");
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInfeasibleAlpha, "alpha must be positive");
  }
  if (layers < 2) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "a two-way split needs at least 2 layers");
  }
  const double share = alpha * s_ib / (s_ib + s_roce) * layers;
  const double floored = std::floor(share);
  TwoNicSplit out;
  if (floored > layers - 1) {
    out.ib_layers = layers - 1;
  } else if (floored < 1) {
    out.ib_layers = 1;
  } else {
    out.ib_layers = static_cast<int>(floored);
  }
  if (static_cast<double>(out.ib_layers) != floored) {
    std::ostringstream msg;
    msg << kClampedAlpha << ": alpha=" << alpha << " gives " << floored
        << " of " << layers << " layers to the first cluster; clamped to "
        << out.ib_layers;
    out.warning = msg.str();
  }
  out.roce_layers = layers - out.ib_layers;
  return out;
}

ClusterAllocation multi_cluster_alloc(int layers, std::span<const double> speeds,
                                      std::span<const double> alphas,
                                      double mem_per_layer_gb,
                                      std::span<const double> dmem_gb) {
  const std::size_t m = speeds.size();
  if (m == 0 || dmem_gb.size() != m || alphas.size() + 1 < m) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "speeds, alphas and memory limits must describe the same clusters");
  }
  for (double s : speeds) {
    if (!(s > 0.0)) throw Error(ErrorCode::kInvalidDevice, "cluster speeds must be positive");
  }
  if (layers < static_cast<int>(m)) {
    throw Error(ErrorCode::kInfeasiblePartition,
                std::to_string(layers) + " layers cannot cover " +
                    std::to_string(m) + " clusters");
  }
  const double total = std::accumulate(speeds.begin(), speeds.end(), 0.0);
  ClusterAllocation out;
  out.layers.resize(m);
  int assigned = 0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (!(alphas[i] > 0.0)) {
      throw Error(ErrorCode::kInfeasibleAlpha, "alpha must be positive");
    }
    const double share = std::floor(alphas[i] * speeds[i] / total * layers);
    int n = static_cast<int>(share);
    if (n < 1) {
      n = 1;
      out.warnings.push_back(std::string(kClampedAlpha) + ": cluster " +
                             std::to_string(i + 1) + " raised to 1 layer");
    }
    out.layers[i] = n;
    assigned += n;
  }
  const int remainder = layers - assigned;
  if (remainder < 1) {
    throw Error(ErrorCode::kInfeasibleAlpha,
                "alphas leave " + std::to_string(remainder) + " layers for cluster " +
                    std::to_string(m) + "; reduce alpha");
  }
  out.layers[m - 1] = remainder;
  for (std::size_t i = 0; i < m; ++i) {
    const double mem = out.layers[i] * mem_per_layer_gb;
    if (mem > dmem_gb[i]) {
      std::ostringstream msg;
      msg << "memory exceeded on cluster " << (i + 1) << ": " << out.layers[i]
          << " layers need " << mem << " GB but only " << dmem_gb[i]
          << " GB are available; reduce alpha for this cluster";
      throw Error(ErrorCode::kMemoryExceeded, msg.str());
    }
  }
  return out;
}

std::vector<int> stages_per_cluster(const ParallelConfig& cfg,
                                    const ClusterTopology& topo) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(topo.cluster_count()));
  for (const Cluster& c : topo.clusters()) {
    const int devices = topo.cluster_device_count(c.index);
    if (devices % cfg.stage_block() != 0) {
      throw Error(ErrorCode::kInfeasibleConfig,
                  "cluster " + std::to_string(c.index) +
                      " does not host a whole number of pipeline stages");
    }
    out.push_back(devices / cfg.stage_block());
  }
  if (std::accumulate(out.begin(), out.end(), 0) != cfg.p) {
    throw Error(ErrorCode::kInfeasibleConfig,
                "stage blocks do not cover the topology");
  }
  return out;
}

PartitionPlan stages_from_cluster_alloc(std::span<const int> cluster_layers,
                                        const ParallelConfig& cfg,
                                        const ClusterTopology& topo) {
  const std::vector<int> stages = stages_per_cluster(cfg, topo);
  if (cluster_layers.size() != stages.size()) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "allocation has " + std::to_string(cluster_layers.size()) +
                    " entries for " + std::to_string(stages.size()) + " clusters");
  }
  PartitionPlan plan;
  plan.strategy = PartitionStrategy::kSelfAdapting;
  plan.cluster_layers.assign(cluster_layers.begin(), cluster_layers.end());
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] == 0) {
      if (cluster_layers[i] != 0) {
        throw Error(ErrorCode::kInfeasiblePartition,
                    "cluster " + std::to_string(i + 1) +
                        " hosts no stage but was given layers");
      }
      continue;
    }
    if (cluster_layers[i] < stages[i]) {
      throw Error(ErrorCode::kInfeasiblePartition,
                  "cluster " + std::to_string(i + 1) + " hosts " +
                      std::to_string(stages[i]) + " stages but only " +
                      std::to_string(cluster_layers[i]) + " layers");
    }
    for (int n : uniform_partition(cluster_layers[i], stages[i])) {
      plan.stage_layers.push_back(n);
    }
  }
  return plan;
}

}  // namespace holmes
