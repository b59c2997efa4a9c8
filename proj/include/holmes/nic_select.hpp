#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/topology.hpp"

namespace holmes {

enum class Channel { kIntraNode, kInfiniBand, kRoCE, kEthernet };

std::string_view to_string(Channel channel);
std::optional<Channel> channel_from_string(std::string_view name);

struct ChannelAssignment {
  GroupKind kind = GroupKind::kTP;
  int row = 0;  // 1-based row of the kind's matrix
  Channel channel = Channel::kEthernet;
  double bandwidth_gbps = 0.0;
  double latency_s = 0.0;
  std::optional<std::string> warning;

  friend bool operator==(const ChannelAssignment&, const ChannelAssignment&) = default;
};

// IB clusters first, then RoCE, then Ethernet-only; stable within a kind.
struct ClusterOrdering {
  std::vector<int> order;  // order[k] = original index of the k-th cluster
  int m1 = 0;              // number of InfiniBand clusters

  friend bool operator==(const ClusterOrdering&, const ClusterOrdering&) = default;
};

ClusterOrdering order_clusters(const ClusterTopology& topo);

// Topology with clusters permuted by `ordering` and re-indexed from 1, so that
// rank numbering follows the IB-first order.
ClusterTopology apply_ordering(const ClusterTopology& topo,
                               const ClusterOrdering& ordering);

// Per-group channel selection: TP stays inside the node; PP and DP use the
// members' shared RDMA NIC when they can reach each other over it, otherwise
// Ethernet. DP rows that mix NIC kinds fall back to Ethernet with a warning.
std::vector<ChannelAssignment> assign_channels(const GroupPlan& plan,
                                               const ClusterTopology& topo);

// Unified-environment baseline: once the topology mixes NIC kinds every
// inter-node group is forced onto Ethernet.
std::vector<ChannelAssignment> naive_channels(const GroupPlan& plan,
                                              const ClusterTopology& topo);

const ChannelAssignment& find_channel(const std::vector<ChannelAssignment>& channels,
                                      GroupKind kind, int row);

}  // namespace holmes
