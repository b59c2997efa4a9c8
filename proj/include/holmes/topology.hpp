#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holmes {

enum class NicKind { kInfiniBand, kRoCE, kEthernet };

std::string_view to_string(NicKind kind);
std::optional<NicKind> nic_kind_from_string(std::string_view name);

// Typical datacenter per-message latencies; only bandwidths are measured.
inline constexpr double kRdmaLatencySeconds = 5e-6;
inline constexpr double kEthernetLatencySeconds = 30e-6;
inline constexpr double kIntraNodeLatencySeconds = 1e-6;

double default_latency(NicKind kind);

struct NicSpec {
  NicKind kind = NicKind::kEthernet;
  double bandwidth_gbps = 0.0;
  double latency_s = kEthernetLatencySeconds;

  static NicSpec with_default_latency(NicKind kind, double bandwidth_gbps) {
    return {kind, bandwidth_gbps, default_latency(kind)};
  }
};

// A cluster whose rdma_nic.kind is Ethernet has no RDMA fabric at all.
struct Cluster {
  int index = 0;  // 1-based
  int node_count = 0;
  NicSpec rdma_nic;
  double device_tflops_peak = 0.0;
  double device_mem_gb = 0.0;
};

struct DeviceCoord {
  int cluster = 0;
  int node = 0;
  int gpu = 0;

  friend auto operator<=>(const DeviceCoord&, const DeviceCoord&) = default;
};

// Immutable description of clusters, nodes and fabrics. Ranks are 1-based and
// numbered cluster-major, then node, then GPU.
class ClusterTopology {
 public:
  ClusterTopology(std::vector<Cluster> clusters, int gpus_per_node,
                  NicSpec ethernet, double intra_node_bandwidth_gbps,
                  bool inter_cluster_rdma,
                  double intra_node_latency_s = kIntraNodeLatencySeconds);

  const std::vector<Cluster>& clusters() const { return clusters_; }
  const Cluster& cluster(int index) const { return clusters_.at(index - 1); }
  int cluster_count() const { return static_cast<int>(clusters_.size()); }
  int gpus_per_node() const { return gpus_per_node_; }
  const NicSpec& ethernet() const { return ethernet_; }
  double intra_node_bandwidth_gbps() const { return intra_node_bandwidth_gbps_; }
  double intra_node_latency_s() const { return intra_node_latency_s_; }
  bool inter_cluster_rdma() const { return inter_cluster_rdma_; }

  int device_count() const { return device_count_; }
  int node_count() const { return node_prefix_.back(); }
  int cluster_device_count(int index) const;
  // First rank (1-based) owned by the given cluster.
  int first_rank(int cluster_index) const;
  const Cluster& cluster_of_rank(int rank) const;
  // Global 1-based node ordinal of a rank.
  int node_ordinal(int rank) const;

 private:
  std::vector<Cluster> clusters_;
  int gpus_per_node_;
  NicSpec ethernet_;
  double intra_node_bandwidth_gbps_;
  bool inter_cluster_rdma_;
  double intra_node_latency_s_;
  std::vector<int> node_prefix_;  // node_prefix_[i] = sum of f_a for a <= i
  int device_count_ = 0;
};

int rank_of(const ClusterTopology& topo, const DeviceCoord& coord);
DeviceCoord coord_of(const ClusterTopology& topo, int rank);
const NicSpec& nic_of_rank(const ClusterTopology& topo, int rank);

}  // namespace holmes
