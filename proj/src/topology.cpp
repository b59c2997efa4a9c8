#include "holmes/topology.hpp"

#include <algorithm>
#include <string>

#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(NicKind kind) {
  switch (kind) {
    case NicKind::kInfiniBand: return "infiniband";
    case NicKind::kRoCE: return "roce";
    case NicKind::kEthernet: return "ethernet";
  }
  return "unknown";
}

std::optional<NicKind> nic_kind_from_string(std::string_view name) {
  if (name == "infiniband" || name == "ib") return NicKind::kInfiniBand;
  if (name == "roce") return NicKind::kRoCE;
  if (name == "ethernet") return NicKind::kEthernet;
  return std::nullopt;
}

double default_latency(NicKind kind) {
  return kind == NicKind::kEthernet ? kEthernetLatencySeconds
                                    : kRdmaLatencySeconds;
}

namespace {

[[noreturn]] void bad_topology(const std::string& msg) {
  throw Error(ErrorCode::kInvalidTopology, "invalid topology: " + msg);
}

void check_nic(const NicSpec& nic, const std::string& where) {
  if (!(nic.bandwidth_gbps > 0.0)) {
    bad_topology(where + " bandwidth must be positive");
  }
  if (!(nic.latency_s >= 0.0)) {
    bad_topology(where + " latency must be non-negative");
  }
}

}  // namespace

ClusterTopology::ClusterTopology(std::vector<Cluster> clusters,
                                 int gpus_per_node, NicSpec ethernet,
                                 double intra_node_bandwidth_gbps,
                                 bool inter_cluster_rdma,
                                 double intra_node_latency_s)
    : clusters_(std::move(clusters)),
      gpus_per_node_(gpus_per_node),
      ethernet_(ethernet),
      intra_node_bandwidth_gbps_(intra_node_bandwidth_gbps),
      inter_cluster_rdma_(inter_cluster_rdma),
      intra_node_latency_s_(intra_node_latency_s) {
  if (clusters_.empty()) bad_topology("at least one cluster is required");
  if (gpus_per_node_ < 1) bad_topology("gpus_per_node must be >= 1");
  if (ethernet_.kind != NicKind::kEthernet) {
    bad_topology("the fallback fabric must be Ethernet");
  }
  check_nic(ethernet_, "ethernet");
  if (!(intra_node_bandwidth_gbps_ > 0.0)) {
    bad_topology("intra_node_bandwidth must be positive");
  }
  if (!(intra_node_latency_s_ >= 0.0)) {
    bad_topology("intra_node_latency must be non-negative");
  }
  node_prefix_.reserve(clusters_.size() + 1);
  node_prefix_.push_back(0);
  for (std::size_t i = 0; i < clusters_.size(); ++i) {
    const Cluster& c = clusters_[i];
    const std::string where = "cluster " + std::to_string(i + 1);
    if (c.index != static_cast<int>(i) + 1) {
      bad_topology(where + " has index " + std::to_string(c.index) +
                   "; indices must be contiguous from 1");
    }
    if (c.node_count < 1) bad_topology(where + " node_count must be >= 1");
    if (!(c.device_tflops_peak > 0.0)) {
      bad_topology(where + " device_tflops_peak must be positive");
    }
    if (!(c.device_mem_gb > 0.0)) {
      bad_topology(where + " device_mem must be positive");
    }
    check_nic(c.rdma_nic, where + " nic");
    node_prefix_.push_back(node_prefix_.back() + c.node_count);
  }
  device_count_ = node_prefix_.back() * gpus_per_node_;
}

int ClusterTopology::cluster_device_count(int index) const {
  return cluster(index).node_count * gpus_per_node_;
}

int ClusterTopology::first_rank(int cluster_index) const {
  if (cluster_index < 1 || cluster_index > cluster_count()) {
    throw Error(ErrorCode::kInvalidCoordinate,
                "cluster index " + std::to_string(cluster_index) +
                    " out of range");
  }
  return node_prefix_[cluster_index - 1] * gpus_per_node_ + 1;
}

int ClusterTopology::node_ordinal(int rank) const {
  if (rank < 1 || rank > device_count_) {
    throw Error(ErrorCode::kInvalidRank,
                "rank " + std::to_string(rank) + " outside [1, " +
                    std::to_string(device_count_) + "]");
  }
  return (rank - 1) / gpus_per_node_ + 1;
}

const Cluster& ClusterTopology::cluster_of_rank(int rank) const {
  const int node = node_ordinal(rank);
  // node_prefix_ is strictly increasing; find the first prefix >= node.
  auto it = std::lower_bound(node_prefix_.begin() + 1, node_prefix_.end(), node);
  return clusters_[static_cast<std::size_t>(it - node_prefix_.begin() - 1)];
}

int rank_of(const ClusterTopology& topo, const DeviceCoord& coord) {
  auto bad = [](const std::string& field, int value) -> Error {
    return Error(ErrorCode::kInvalidCoordinate,
                 "invalid coordinate: " + field + " = " + std::to_string(value) +
                     " is out of range");
  };
  if (coord.cluster < 1 || coord.cluster > topo.cluster_count()) {
    throw bad("cluster", coord.cluster);
  }
  const Cluster& c = topo.cluster(coord.cluster);
  if (coord.node < 1 || coord.node > c.node_count) throw bad("node", coord.node);
  if (coord.gpu < 1 || coord.gpu > topo.gpus_per_node()) {
    throw bad("gpu", coord.gpu);
  }
  const int nodes_before = (topo.first_rank(coord.cluster) - 1) / topo.gpus_per_node();
  return topo.gpus_per_node() * (nodes_before + coord.node - 1) + coord.gpu;
}

DeviceCoord coord_of(const ClusterTopology& topo, int rank) {
  const int node = topo.node_ordinal(rank);
  const Cluster& c = topo.cluster_of_rank(rank);
  const int nodes_before = (topo.first_rank(c.index) - 1) / topo.gpus_per_node();
  return {c.index, node - nodes_before, (rank - 1) % topo.gpus_per_node() + 1};
}

const NicSpec& nic_of_rank(const ClusterTopology& topo, int rank) {
  return topo.cluster_of_rank(rank).rdma_nic;
}

}  // namespace holmes
