#pragma once

#include <string>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/nic_select.hpp"
#include "holmes/partition.hpp"
#include "holmes/planner.hpp"
#include "json.hpp"

namespace holmes {

using ordered_json = nlohmann::ordered_json;

// The plan document: ordering, the three group matrices and the channels.
struct PlanDocument {
  ClusterOrdering ordering;
  GroupPlan groups;
  std::vector<ChannelAssignment> channels;

  friend bool operator==(const PlanDocument&, const PlanDocument&) = default;
};

ordered_json plan_to_json(const PlanDocument& doc);
// Throws ConfigError on any structural problem.
PlanDocument plan_from_json(const ordered_json& j);

ordered_json partition_to_json(const PartitionPlan& plan);
ordered_json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);
ordered_json report_to_json(const Scenario& scenario, const Simulation& sim,
                            ChannelPolicy policy);

// Two-space indented, newline-terminated.
std::string dump(const ordered_json& j);

}  // namespace holmes
