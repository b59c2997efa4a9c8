#pragma once

#include <string>
#include <vector>

#include "holmes/topology.hpp"

namespace holmes::testing {

inline NicSpec nic(NicKind kind) {
  return NicSpec::with_default_latency(kind, kind == NicKind::kEthernet ? 25.0 : 200.0);
}

// Clusters with the given node counts and NIC kinds, A100-like devices.
inline ClusterTopology make_topo(const std::vector<int>& nodes,
                                 const std::vector<NicKind>& kinds, int gpus_per_node,
                                 bool inter_cluster_rdma = false) {
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    clusters.push_back({static_cast<int>(i) + 1, nodes[i], nic(kinds[i]), 312.0, 80.0});
  }
  return ClusterTopology(std::move(clusters), gpus_per_node, nic(NicKind::kEthernet), 2400.0,
                         inter_cluster_rdma);
}

// Two clusters of two 4-GPU nodes: IB then RoCE, no cross-cluster RDMA.
inline ClusterTopology two_cluster_topo() {
  return make_topo({2, 2}, {NicKind::kInfiniBand, NicKind::kRoCE}, 4);
}

inline std::string scenario_path(const std::string& name) {
  return std::string(HOLMES_SOURCE_DIR) + "/scenarios/" + name + ".json";
}

}  // namespace holmes::testing
