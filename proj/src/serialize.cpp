#include "holmes/serialize.hpp"

#include "holmes/scenario.hpp"

namespace holmes {

namespace {

ordered_json matrix_to_json(const GroupMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : m.rows) rows.push_back(row);
  return rows;
}

GroupMatrix matrix_from_json(const ordered_json& j, GroupKind kind) {
  const std::string name(to_string(kind));
  if (!j.is_array()) throw ConfigError("plan." + name + ": expected an array of rows");
  GroupMatrix m{kind, {}};
  for (const auto& row : j) {
    if (!row.is_array()) throw ConfigError("plan." + name + ": rows must be arrays");
    std::vector<int> ranks;
    for (const auto& r : row) {
      if (!r.is_number_integer()) throw ConfigError("plan." + name + ": ranks must be integers");
      ranks.push_back(r.get<int>());
    }
    m.rows.push_back(std::move(ranks));
  }
  return m;
}

std::optional<GroupKind> group_kind_from_string(std::string_view s) {
  if (s == "tp") return GroupKind::kTP;
  if (s == "pp") return GroupKind::kPP;
  if (s == "dp") return GroupKind::kDP;
  return std::nullopt;
}

const ordered_json& need(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(path + ": missing key \"" + key + "\"");
  }
  return j.at(key);
}

}  // namespace

ordered_json plan_to_json(const PlanDocument& doc) {
  ordered_json j;
  j["ordering"] = {{"clusters", doc.ordering.order}, {"m1", doc.ordering.m1}};
  j["tp"] = matrix_to_json(doc.groups.tp);
  j["pp"] = matrix_to_json(doc.groups.pp);
  j["dp"] = matrix_to_json(doc.groups.dp);
  ordered_json channels = ordered_json::array();
  for (const ChannelAssignment& a : doc.channels) {
    ordered_json c;
    c["kind"] = to_string(a.kind);
    c["row"] = a.row;
    c["channel"] = to_string(a.channel);
    c["bandwidth_gbps"] = a.bandwidth_gbps;
    c["latency_s"] = a.latency_s;
    if (a.warning) c["warning"] = *a.warning;
    channels.push_back(std::move(c));
  }
  j["channels"] = std::move(channels);
  return j;
}

PlanDocument plan_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("plan: expected an object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "ordering" && k != "tp" && k != "pp" && k != "dp" && k != "channels") {
      throw ConfigError("plan: unknown key \"" + k + "\"");
    }
  }
  PlanDocument doc;
  const ordered_json& ord = need(j, "ordering", "plan");
  const ordered_json& clusters = need(ord, "clusters", "plan.ordering");
  const ordered_json& m1 = need(ord, "m1", "plan.ordering");
  if (!clusters.is_array() || !m1.is_number_integer() || ord.size() != 2) {
    throw ConfigError("plan.ordering: expected {\"clusters\": [...], \"m1\": n}");
  }
  for (const auto& c : clusters) {
    if (!c.is_number_integer()) throw ConfigError("plan.ordering.clusters: expected integers");
    doc.ordering.order.push_back(c.get<int>());
  }
  doc.ordering.m1 = m1.get<int>();
  doc.groups.tp = matrix_from_json(need(j, "tp", "plan"), GroupKind::kTP);
  doc.groups.pp = matrix_from_json(need(j, "pp", "plan"), GroupKind::kPP);
  doc.groups.dp = matrix_from_json(need(j, "dp", "plan"), GroupKind::kDP);
  const ordered_json& channels = need(j, "channels", "plan");
  if (!channels.is_array()) throw ConfigError("plan.channels: expected an array");
  for (const auto& c : channels) {
    const std::string path = "plan.channels";
    if (!c.is_object()) throw ConfigError(path + ": expected objects");
    for (const auto& item : c.items()) {
      const std::string& k = item.key();
      if (k != "kind" && k != "row" && k != "channel" && k != "bandwidth_gbps" &&
          k != "latency_s" && k != "warning") {
        throw ConfigError(path + ": unknown key \"" + k + "\"");
      }
    }
    const ordered_json& kind = need(c, "kind", path);
    const ordered_json& row = need(c, "row", path);
    const ordered_json& channel = need(c, "channel", path);
    const ordered_json& bw = need(c, "bandwidth_gbps", path);
    const ordered_json& lat = need(c, "latency_s", path);
    if (!kind.is_string() || !row.is_number_integer() || !channel.is_string() ||
        !bw.is_number() || !lat.is_number()) {
      throw ConfigError(path + ": field has the wrong type");
    }
    const auto k = group_kind_from_string(kind.get<std::string>());
    const auto ch = channel_from_string(channel.get<std::string>());
    if (!k || !ch) throw ConfigError(path + ": unknown kind or channel name");
    ChannelAssignment a{*k, row.get<int>(), *ch, bw.get<double>(), lat.get<double>(),
                        std::nullopt};
    if (c.contains("warning")) {
      if (!c["warning"].is_string()) throw ConfigError(path + ": warning must be a string");
      a.warning = c["warning"].get<std::string>();
    }
    doc.channels.push_back(std::move(a));
  }
  return doc;
}

ordered_json partition_to_json(const PartitionPlan& plan) {
  ordered_json j;
  j["strategy"] = to_string(plan.strategy);
  if (plan.strategy == PartitionStrategy::kSelfAdapting) {
    j["alpha"] = plan.alpha;
  } else {
    j["alpha"] = nullptr;
  }
  j["stage_layers"] = plan.stage_layers;
  j["cluster_layers"] = plan.cluster_layers;
  return j;
}

ordered_json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
  ordered_json out = ordered_json::array();
  for (const Diagnostic& d : diagnostics) {
    out.push_back({{"code", d.code}, {"message", d.message}});
  }
  return out;
}

ordered_json report_to_json(const Scenario& scenario, const Simulation& sim,
                            ChannelPolicy policy) {
  const SimReport& r = sim.report;
  ordered_json j;
  j["scenario"] = scenario.name;
  j["config_sha256"] = scenario.fingerprint;
  j["defaults_applied"] = scenario.defaults_applied;
  j["nic_env"] = nic_environment(scenario.topology);
  j["channel_policy"] = to_string(policy);
  j["efficiency"] = scenario.cost.efficiency;
  j["nodes"] = sim.plan.topology.node_count();
  j["devices"] = sim.plan.topology.device_count();
  j["parallel"] = {{"t", scenario.parallel.t}, {"p", scenario.parallel.p},
                   {"d", scenario.parallel.d}};
  j["partition"] = partition_to_json(sim.partition);
  j["micro_batches"] = r.micro_batches;
  j["flops"] = r.flops;
  j["iter_time_s"] = r.iter_time;
  j["tflops_per_gpu"] = r.tflops_per_gpu;
  j["throughput"] = r.throughput;
  j["breakdown"] = {{"pipeline_compute_s", r.breakdown.pipeline_compute},
                    {"pipeline_p2p_s", r.breakdown.pipeline_p2p},
                    {"dp_sync_s", r.breakdown.dp_sync},
                    {"tp_collectives_s", r.breakdown.tp_collectives}};
  ordered_json dp = ordered_json::array();
  for (const DpGroupTiming& g : r.dp_groups) {
    dp.push_back({{"row", g.row},
                  {"stage", g.stage},
                  {"channel", to_string(g.channel)},
                  {"grad_bytes", g.grad_bytes},
                  {"reduce_scatter_s", g.reduce_scatter_s},
                  {"all_gather_s", g.all_gather_s}});
  }
  j["dp_groups"] = std::move(dp);
  ordered_json timeline = ordered_json::array();
  for (const TimelineEvent& e : r.timeline) {
    timeline.push_back({{"stage", e.stage},
                        {"op", std::string(1, e.op)},
                        {"micro", e.micro},
                        {"start", e.start},
                        {"end", e.end}});
  }
  j["timeline"] = std::move(timeline);
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace holmes
