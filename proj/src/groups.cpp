#include "holmes/groups.hpp"

#include <string>

#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::kTP: return "tp";
    case GroupKind::kPP: return "pp";
    case GroupKind::kDP: return "dp";
  }
  return "unknown";
}

const GroupMatrix& GroupPlan::matrix(GroupKind kind) const {
  switch (kind) {
    case GroupKind::kTP: return tp;
    case GroupKind::kPP: return pp;
    case GroupKind::kDP: return dp;
  }
  return tp;
}

namespace {

void require_consistent(const ParallelConfig& cfg, const ClusterTopology& topo) {
  if (cfg.t < 1 || cfg.p < 1 || cfg.d < 1) {
    throw Error(ErrorCode::kInfeasibleConfig,
                "parallel degrees must be positive");
  }
  if (cfg.product() != topo.device_count()) {
    throw Error(ErrorCode::kInfeasibleConfig,
                "d*p*t = " + std::to_string(cfg.product()) +
                    " does not equal device count " +
                    std::to_string(topo.device_count()));
  }
}

}  // namespace

GroupMatrix build_tp(const ParallelConfig& cfg, const ClusterTopology& topo) {
  require_consistent(cfg, topo);
  const int g = topo.gpus_per_node();
  if (cfg.t > g || g % cfg.t != 0) {
    throw Error(ErrorCode::kInfeasibleConfig,
                "tensor degree " + std::to_string(cfg.t) +
                    " does not tile a node of " + std::to_string(g) + " GPUs");
  }
  GroupMatrix m{GroupKind::kTP, {}};
  const int rows = cfg.p * cfg.d;
  m.rows.reserve(static_cast<std::size_t>(rows));
  for (int i = 1; i <= rows; ++i) {
    std::vector<int> row;
    row.reserve(static_cast<std::size_t>(cfg.t));
    for (int j = 1; j <= cfg.t; ++j) row.push_back((i - 1) * cfg.t + j);
    m.rows.push_back(std::move(row));
  }
  return m;
}

GroupMatrix build_pp(const ParallelConfig& cfg, const ClusterTopology& topo) {
  require_consistent(cfg, topo);
  GroupMatrix m{GroupKind::kPP, {}};
  const int rows = cfg.t * cfg.d;
  m.rows.reserve(static_cast<std::size_t>(rows));
  for (int i = 1; i <= rows; ++i) {
    std::vector<int> row;
    row.reserve(static_cast<std::size_t>(cfg.p));
    for (int j = 1; j <= cfg.p; ++j) row.push_back(i + (j - 1) * cfg.t * cfg.d);
    m.rows.push_back(std::move(row));
  }
  return m;
}

GroupMatrix build_dp(const ParallelConfig& cfg, const ClusterTopology& topo) {
  require_consistent(cfg, topo);
  GroupMatrix m{GroupKind::kDP, {}};
  const int rows = cfg.p * cfg.t;
  m.rows.reserve(static_cast<std::size_t>(rows));
  for (int i = 1; i <= rows; ++i) {
    std::vector<int> row;
    row.reserve(static_cast<std::size_t>(cfg.d));
    for (int j = 1; j <= cfg.d; ++j) {
      row.push_back((i - 1) % cfg.t + ((i - 1) / cfg.t * cfg.d + j - 1) * cfg.t + 1);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

GroupPlan build_plan(const ParallelConfig& cfg, const ClusterTopology& topo) {
  return {build_tp(cfg, topo), build_pp(cfg, topo), build_dp(cfg, topo)};
}

int stage_of_rank(const ParallelConfig& cfg, int rank) {
  return (rank - 1) / cfg.stage_block() + 1;
}

std::vector<Diagnostic> validate(const ParallelConfig& cfg,
                                 const ClusterTopology& topo) {
  std::vector<Diagnostic> out;
  auto emit = [&out](std::string_view code, std::string msg) {
    out.push_back({std::string(code), std::move(msg)});
  };
  if (cfg.t < 1 || cfg.p < 1 || cfg.d < 1) {
    emit(diag::kNonPositiveDegree,
         "degrees must be positive (t=" + std::to_string(cfg.t) + ", p=" +
             std::to_string(cfg.p) + ", d=" + std::to_string(cfg.d) + ")");
    return out;
  }
  const int n = topo.device_count();
  const int g = topo.gpus_per_node();
  if (cfg.product() != n) {
    emit(diag::kDegreeProduct,
         "d*p*t = " + std::to_string(cfg.d) + "*" + std::to_string(cfg.p) + "*" +
             std::to_string(cfg.t) + " = " + std::to_string(cfg.product()) +
             " but the topology has " + std::to_string(n) + " devices");
  }
  if (cfg.t > g) {
    emit(diag::kTensorExceedsNode, "tensor degree " + std::to_string(cfg.t) +
                                       " exceeds " + std::to_string(g) +
                                       " GPUs per node");
  } else if (g % cfg.t != 0) {
    emit(diag::kTensorStraddlesNode,
         "tensor degree " + std::to_string(cfg.t) + " does not divide " +
             std::to_string(g) + " GPUs per node; TP groups would cross nodes");
  }
  const int block = cfg.stage_block();
  for (const Cluster& c : topo.clusters()) {
    const int devices = topo.cluster_device_count(c.index);
    if (devices % block != 0) {
      emit(diag::kStageStraddlesCluster,
           "stage block t*d = " + std::to_string(block) + " straddles cluster " +
               std::to_string(c.index) + " (" + std::to_string(devices) +
               " devices)");
    }
  }
  return out;
}

std::vector<Diagnostic> check_plan(const GroupPlan& plan,
                                   const ParallelConfig& cfg,
                                   const ClusterTopology& topo) {
  std::vector<Diagnostic> out;
  const int n = topo.device_count();
  struct Shape {
    const GroupMatrix* m;
    GroupKind kind;
    int rows;
    int cols;
  };
  const Shape shapes[] = {
      {&plan.tp, GroupKind::kTP, cfg.p * cfg.d, cfg.t},
      {&plan.pp, GroupKind::kPP, cfg.t * cfg.d, cfg.p},
      {&plan.dp, GroupKind::kDP, cfg.p * cfg.t, cfg.d},
  };
  for (const Shape& s : shapes) {
    const std::string name(to_string(s.kind));
    if (s.m->kind != s.kind) {
      out.push_back({"PLAN_KIND", name + " matrix carries the wrong kind"});
    }
    if (static_cast<int>(s.m->rows.size()) != s.rows) {
      out.push_back({"PLAN_SHAPE", name + " has " +
                                       std::to_string(s.m->rows.size()) +
                                       " rows, expected " + std::to_string(s.rows)});
      continue;
    }
    std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
    bool ok = true;
    for (const auto& row : s.m->rows) {
      if (static_cast<int>(row.size()) != s.cols) {
        out.push_back({"PLAN_SHAPE", name + " row has " +
                                         std::to_string(row.size()) +
                                         " ranks, expected " + std::to_string(s.cols)});
        ok = false;
        break;
      }
      for (int r : row) {
        if (r < 1 || r > n) {
          out.push_back({"PLAN_RANK", name + " contains out-of-range rank " +
                                          std::to_string(r)});
          ok = false;
          break;
        }
        ++seen[static_cast<std::size_t>(r)];
      }
      if (!ok) break;
    }
    if (!ok) continue;
    for (int r = 1; r <= n; ++r) {
      if (seen[static_cast<std::size_t>(r)] != 1) {
        out.push_back({"PLAN_PARTITION",
                       name + " covers rank " + std::to_string(r) + " " +
                           std::to_string(seen[static_cast<std::size_t>(r)]) +
                           " times"});
        break;
      }
    }
  }
  // A well-formed plan must also be the one the defining equations produce.
  if (out.empty() && validate(cfg, topo).empty()) {
    const GroupPlan expected = build_plan(cfg, topo);
    for (const Shape& s : shapes) {
      if (s.m->rows != expected.matrix(s.kind).rows) {
        out.push_back({"PLAN_MISMATCH", std::string(to_string(s.kind)) +
                                            " rows differ from the rank mapping"});
      }
    }
  }
  return out;
}

}  // namespace holmes
