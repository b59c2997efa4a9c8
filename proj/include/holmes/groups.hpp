#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "holmes/topology.hpp"

namespace holmes {

// Tensor (t), pipeline (p) and data (d) parallel degrees.
struct ParallelConfig {
  int t = 1;
  int p = 1;
  int d = 1;

  int product() const { return t * p * d; }
  // Contiguous ranks serving one pipeline stage.
  int stage_block() const { return t * d; }
};

enum class GroupKind { kTP, kPP, kDP };

std::string_view to_string(GroupKind kind);

struct GroupMatrix {
  GroupKind kind = GroupKind::kTP;
  std::vector<std::vector<int>> rows;  // ranks, 1-based, in defining order

  friend bool operator==(const GroupMatrix&, const GroupMatrix&) = default;
};

struct GroupPlan {
  GroupMatrix tp{GroupKind::kTP, {}};
  GroupMatrix pp{GroupKind::kPP, {}};
  GroupMatrix dp{GroupKind::kDP, {}};

  const GroupMatrix& matrix(GroupKind kind) const;
  friend bool operator==(const GroupPlan&, const GroupPlan&) = default;
};

// [TP]_{i,j} = rank_{(i-1)t + j}. Throws kInfeasibleConfig if a row would
// straddle a node boundary.
GroupMatrix build_tp(const ParallelConfig& cfg, const ClusterTopology& topo);
// [PP]_{i,j} = rank_{i + (j-1)td}; column j is the stage-j member.
GroupMatrix build_pp(const ParallelConfig& cfg, const ClusterTopology& topo);
// [DP]_{i,j} = rank_{mod(i-1,t) + (floor((i-1)/t) d + j - 1) t + 1}.
GroupMatrix build_dp(const ParallelConfig& cfg, const ClusterTopology& topo);
GroupPlan build_plan(const ParallelConfig& cfg, const ClusterTopology& topo);

struct Diagnostic {
  std::string code;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

namespace diag {
inline constexpr std::string_view kNonPositiveDegree = "NONPOSITIVE_DEGREE";
inline constexpr std::string_view kDegreeProduct = "DEGREE_PRODUCT";
inline constexpr std::string_view kTensorExceedsNode = "TP_EXCEEDS_NODE";
inline constexpr std::string_view kTensorStraddlesNode = "TP_STRADDLES_NODE";
inline constexpr std::string_view kStageStraddlesCluster = "STAGE_STRADDLES_CLUSTER";
}  // namespace diag

// Never throws. Empty result means the config is schedulable: degrees multiply
// to N, TP fits inside a node, and no stage block crosses a cluster boundary.
std::vector<Diagnostic> validate(const ParallelConfig& cfg,
                                 const ClusterTopology& topo);

// Pipeline stage (1-based) that serves the given rank.
int stage_of_rank(const ParallelConfig& cfg, int rank);

// Structural check of an externally supplied plan against (cfg, topo):
// shapes, ranges and the per-kind partition property. Returns diagnostics.
std::vector<Diagnostic> check_plan(const GroupPlan& plan,
                                   const ParallelConfig& cfg,
                                   const ClusterTopology& topo);

}  // namespace holmes
