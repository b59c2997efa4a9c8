#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/nic_select.hpp"
#include "holmes/partition.hpp"
#include "holmes/scenario.hpp"
#include "holmes/simulator.hpp"

namespace holmes {

enum class ChannelPolicy { kHolmes, kNaive };

std::string_view to_string(ChannelPolicy policy);

// Groups and channels computed against the IB-first ordered topology.
struct Plan {
  ClusterOrdering ordering;
  ClusterTopology topology;
  GroupPlan groups;
  std::vector<ChannelAssignment> channels;
};

// Group diagnostics plus model-level checks; empty means plannable.
std::vector<Diagnostic> validate_scenario(const Scenario& scenario);

// Throws kInfeasibleConfig carrying the diagnostics when validation fails.
Plan make_plan(const Scenario& scenario, ChannelPolicy policy);

// Per-replica memory budget of each cluster: its device memory divided over
// the d data-parallel replicas that share it.
std::vector<double> cluster_memory_budget_gb(const ClusterTopology& topo,
                                             const ParallelConfig& cfg);

PartitionPlan make_partition(const Scenario& scenario, const ClusterTopology& ordered,
                             PartitionStrategy strategy);

struct Simulation {
  Plan plan;
  PartitionPlan partition;
  SimReport report;
};

Simulation simulate(const Scenario& scenario, ChannelPolicy policy,
                    std::optional<PartitionStrategy> strategy = std::nullopt);

// Fit cost.efficiency so the scenario (Holmes channels, configured partition)
// reports the target TFLOPS per GPU.
double calibrate(const Scenario& scenario, double target_tflops);

// Same nodes and devices with every cluster switched to one NIC kind. RDMA
// kinds also get a cluster-wide RDMA interconnect; Ethernet clusters use the
// topology's Ethernet spec.
Scenario with_uniform_fabric(const Scenario& scenario, NicKind kind);

// "infiniband", "roce", "ethernet" for single-kind topologies, else "hybrid".
std::string nic_environment(const ClusterTopology& topo);

}  // namespace holmes
