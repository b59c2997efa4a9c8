#include "holmes/nic_select.hpp"

#include <algorithm>
#include <set>

#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::kIntraNode: return "intra_node";
    case Channel::kInfiniBand: return "infiniband";
    case Channel::kRoCE: return "roce";
    case Channel::kEthernet: return "ethernet";
  }
  return "unknown";
}

std::optional<Channel> channel_from_string(std::string_view name) {
  if (name == "intra_node") return Channel::kIntraNode;
  if (name == "infiniband") return Channel::kInfiniBand;
  if (name == "roce") return Channel::kRoCE;
  if (name == "ethernet") return Channel::kEthernet;
  return std::nullopt;
}

namespace {

int kind_order(NicKind kind) {
  switch (kind) {
    case NicKind::kInfiniBand: return 0;
    case NicKind::kRoCE: return 1;
    case NicKind::kEthernet: return 2;
  }
  return 3;
}

Channel channel_for(NicKind kind) {
  switch (kind) {
    case NicKind::kInfiniBand: return Channel::kInfiniBand;
    case NicKind::kRoCE: return Channel::kRoCE;
    case NicKind::kEthernet: return Channel::kEthernet;
  }
  return Channel::kEthernet;
}

ChannelAssignment intra_node(const ClusterTopology& topo, int row) {
  return {GroupKind::kTP, row, Channel::kIntraNode,
          topo.intra_node_bandwidth_gbps(), topo.intra_node_latency_s(),
          std::nullopt};
}

ChannelAssignment ethernet(const ClusterTopology& topo, GroupKind kind, int row) {
  return {kind, row, Channel::kEthernet, topo.ethernet().bandwidth_gbps,
          topo.ethernet().latency_s, std::nullopt};
}

// Channel for a PP or DP row under the per-group selection rule.
ChannelAssignment select(const ClusterTopology& topo, GroupKind kind, int row,
                         const std::vector<int>& ranks) {
  std::set<int> clusters;
  std::set<NicKind> kinds;
  double bandwidth = 0.0;
  double latency = 0.0;
  bool first = true;
  for (int r : ranks) {
    const Cluster& c = topo.cluster_of_rank(r);
    clusters.insert(c.index);
    kinds.insert(c.rdma_nic.kind);
    if (first) {
      bandwidth = c.rdma_nic.bandwidth_gbps;
      latency = c.rdma_nic.latency_s;
      first = false;
    } else {
      bandwidth = std::min(bandwidth, c.rdma_nic.bandwidth_gbps);
      latency = std::max(latency, c.rdma_nic.latency_s);
    }
  }
  const bool reachable = clusters.size() == 1 || topo.inter_cluster_rdma();
  if (kinds.size() == 1 && *kinds.begin() != NicKind::kEthernet && reachable) {
    return {kind, row, channel_for(*kinds.begin()), bandwidth, latency,
            std::nullopt};
  }
  ChannelAssignment out = ethernet(topo, kind, row);
  if (kind == GroupKind::kDP && kinds.size() > 1) {
    out.warning = "MIXED_NIC: data-parallel group " + std::to_string(row) +
                  " mixes NIC kinds; falling back to Ethernet";
  } else if (kind == GroupKind::kDP && !reachable &&
             *kinds.begin() != NicKind::kEthernet) {
    out.warning = "CROSS_CLUSTER_DP: data-parallel group " + std::to_string(row) +
                  " spans clusters without an RDMA interconnect";
  }
  return out;
}

void require_nonempty(const GroupPlan& plan) {
  if (plan.tp.rows.empty() || plan.pp.rows.empty() || plan.dp.rows.empty()) {
    throw Error(ErrorCode::kInvalidPlan, "invalid plan: empty group matrix");
  }
}

bool mixes_nic_kinds(const ClusterTopology& topo) {
  std::set<NicKind> kinds;
  for (const Cluster& c : topo.clusters()) kinds.insert(c.rdma_nic.kind);
  return kinds.size() > 1;
}

}  // namespace

ClusterOrdering order_clusters(const ClusterTopology& topo) {
  ClusterOrdering out;
  for (const Cluster& c : topo.clusters()) out.order.push_back(c.index);
  std::stable_sort(out.order.begin(), out.order.end(), [&topo](int a, int b) {
    return kind_order(topo.cluster(a).rdma_nic.kind) <
           kind_order(topo.cluster(b).rdma_nic.kind);
  });
  for (const Cluster& c : topo.clusters()) {
    if (c.rdma_nic.kind == NicKind::kInfiniBand) ++out.m1;
  }
  return out;
}

ClusterTopology apply_ordering(const ClusterTopology& topo,
                               const ClusterOrdering& ordering) {
  if (static_cast<int>(ordering.order.size()) != topo.cluster_count()) {
    throw Error(ErrorCode::kInvalidTopology,
                "cluster ordering does not match the topology");
  }
  std::vector<Cluster> clusters;
  clusters.reserve(ordering.order.size());
  for (int source : ordering.order) {
    Cluster c = topo.cluster(source);
    c.index = static_cast<int>(clusters.size()) + 1;
    clusters.push_back(c);
  }
  return ClusterTopology(std::move(clusters), topo.gpus_per_node(),
                         topo.ethernet(), topo.intra_node_bandwidth_gbps(),
                         topo.inter_cluster_rdma(), topo.intra_node_latency_s());
}

std::vector<ChannelAssignment> assign_channels(const GroupPlan& plan,
                                               const ClusterTopology& topo) {
  require_nonempty(plan);
  std::vector<ChannelAssignment> out;
  out.reserve(plan.tp.rows.size() + plan.pp.rows.size() + plan.dp.rows.size());
  for (std::size_t i = 0; i < plan.tp.rows.size(); ++i) {
    out.push_back(intra_node(topo, static_cast<int>(i) + 1));
  }
  for (std::size_t i = 0; i < plan.pp.rows.size(); ++i) {
    out.push_back(select(topo, GroupKind::kPP, static_cast<int>(i) + 1, plan.pp.rows[i]));
  }
  for (std::size_t i = 0; i < plan.dp.rows.size(); ++i) {
    out.push_back(select(topo, GroupKind::kDP, static_cast<int>(i) + 1, plan.dp.rows[i]));
  }
  return out;
}

std::vector<ChannelAssignment> naive_channels(const GroupPlan& plan,
                                              const ClusterTopology& topo) {
  std::vector<ChannelAssignment> out = assign_channels(plan, topo);
  if (!mixes_nic_kinds(topo)) return out;
  for (ChannelAssignment& a : out) {
    if (a.kind != GroupKind::kTP) a = ethernet(topo, a.kind, a.row);
  }
  return out;
}

const ChannelAssignment& find_channel(const std::vector<ChannelAssignment>& channels,
                                      GroupKind kind, int row) {
  for (const ChannelAssignment& a : channels) {
    if (a.kind == kind && a.row == row) return a;
  }
  throw Error(ErrorCode::kInconsistentPlan,
              "no channel assigned to " + std::string(to_string(kind)) + " row " +
                  std::to_string(row));
}

}  // namespace holmes
