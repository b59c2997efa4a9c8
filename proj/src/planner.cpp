#include "holmes/planner.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "holmes/error.hpp"

namespace holmes {

std::string_view to_string(ChannelPolicy policy) {
  return policy == ChannelPolicy::kHolmes ? "holmes" : "naive";
}

std::vector<Diagnostic> validate_scenario(const Scenario& scenario) {
  std::vector<Diagnostic> out = validate(scenario.parallel, scenario.topology);
  for (Diagnostic& d : validate_model(scenario.model, scenario.parallel)) {
    out.push_back(std::move(d));
  }
  return out;
}

Plan make_plan(const Scenario& scenario, ChannelPolicy policy) {
  const auto diagnostics = validate_scenario(scenario);
  if (!diagnostics.empty()) {
    std::ostringstream msg;
    msg << "infeasible configuration:";
    for (const Diagnostic& d : diagnostics) msg << "\n  " << d.code << ": " << d.message;
    throw Error(ErrorCode::kInfeasibleConfig, msg.str());
  }
  ClusterOrdering ordering = order_clusters(scenario.topology);
  ClusterTopology ordered = apply_ordering(scenario.topology, ordering);
  GroupPlan groups = build_plan(scenario.parallel, ordered);
  std::vector<ChannelAssignment> channels = policy == ChannelPolicy::kHolmes
                                                ? assign_channels(groups, ordered)
                                                : naive_channels(groups, ordered);
  return Plan{std::move(ordering), std::move(ordered), std::move(groups),
              std::move(channels)};
}

std::vector<double> cluster_memory_budget_gb(const ClusterTopology& topo,
                                             const ParallelConfig& cfg) {
  std::vector<double> out;
  for (const Cluster& c : topo.clusters()) {
    out.push_back(c.device_mem_gb * topo.cluster_device_count(c.index) / cfg.d);
  }
  return out;
}

namespace {

void check_memory(const std::vector<int>& cluster_layers, double layer_mem_gb,
                  const std::vector<double>& budget) {
  for (std::size_t i = 0; i < cluster_layers.size(); ++i) {
    const double need = cluster_layers[i] * layer_mem_gb;
    if (need > budget[i]) {
      std::ostringstream msg;
      msg << "memory exceeded on cluster " << (i + 1) << ": " << cluster_layers[i]
          << " layers need " << need << " GB per replica but only " << budget[i]
          << " GB are available; reduce alpha for this cluster";
      throw Error(ErrorCode::kMemoryExceeded, msg.str());
    }
  }
}

// Move layers so every cluster keeps at least one layer per hosted stage.
void clamp_to_stages(std::vector<int>& alloc, const std::vector<int>& stages) {
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    while (alloc[i] < stages[i]) {
      std::size_t donor = alloc.size();
      for (std::size_t k = 0; k < alloc.size(); ++k) {
        if (alloc[k] > stages[k] && (donor == alloc.size() || alloc[k] > alloc[donor])) {
          donor = k;
        }
      }
      if (donor == alloc.size()) {
        throw Error(ErrorCode::kInfeasiblePartition,
                    "not enough layers for one per pipeline stage");
      }
      --alloc[donor];
      ++alloc[i];
    }
  }
}

}  // namespace

PartitionPlan make_partition(const Scenario& scenario, const ClusterTopology& ordered,
                             PartitionStrategy strategy) {
  const ParallelConfig& cfg = scenario.parallel;
  const int layers = scenario.model.layers;
  const std::vector<int> stages = stages_per_cluster(cfg, ordered);
  const std::vector<double> budget = cluster_memory_budget_gb(ordered, cfg);
  const double layer_mem = scenario.model.layer_mem_gb();

  PartitionPlan plan;
  if (strategy == PartitionStrategy::kUniform) {
    plan.strategy = strategy;
    plan.alpha = 1.0;
    plan.stage_layers = uniform_partition(layers, cfg.p);
    std::size_t next = 0;
    for (int s : stages) {
      int total = 0;
      for (int k = 0; k < s; ++k) total += plan.stage_layers[next++];
      plan.cluster_layers.push_back(total);
    }
    check_memory(plan.cluster_layers, layer_mem, budget);
    return plan;
  }

  // A cluster's speed is its per-device speed times the stages it hosts, so
  // clusters holding more of the pipeline get proportionally more layers.
  // With equal stage counts this is the plain per-device ratio.
  std::vector<double> speeds;
  for (std::size_t i = 0; i < ordered.clusters().size(); ++i) {
    speeds.push_back(scenario.cost.device_speed_tflops(ordered.clusters()[i]) * stages[i]);
  }
  // cluster_alphas follow the declared order; permute to the ordered list.
  std::vector<double> alphas;
  const ClusterOrdering ordering = order_clusters(scenario.topology);
  for (int source : ordering.order) {
    alphas.push_back(scenario.partition.cluster_alphas.empty()
                         ? scenario.partition.alpha
                         : scenario.partition.cluster_alphas[static_cast<std::size_t>(source - 1)]);
  }

  std::vector<int> alloc;
  std::vector<std::string> warnings;
  if (speeds.size() == 1) {
    alloc = {layers};
  } else if (speeds.size() == 2) {
    const TwoNicSplit split = two_nic_split(layers, speeds[0], speeds[1], alphas[0]);
    alloc = {split.ib_layers, split.roce_layers};
    if (split.warning) warnings.push_back(*split.warning);
  } else {
    ClusterAllocation a = multi_cluster_alloc(layers, speeds, alphas, layer_mem, budget);
    alloc = std::move(a.layers);
    warnings = std::move(a.warnings);
  }
  const std::vector<int> before = alloc;
  clamp_to_stages(alloc, stages);
  if (alloc != before) {
    std::ostringstream msg;
    msg << kClampedAlpha << ": allocation adjusted so every stage keeps a layer (";
    for (std::size_t i = 0; i < alloc.size(); ++i) {
      msg << (i ? ", " : "") << before[i] << "->" << alloc[i];
    }
    msg << ")";
    warnings.push_back(msg.str());
  }
  check_memory(alloc, layer_mem, budget);
  plan = stages_from_cluster_alloc(alloc, cfg, ordered);
  plan.alpha = alphas.front();
  plan.cluster_alphas = alphas;
  plan.warnings = std::move(warnings);
  return plan;
}

Simulation simulate(const Scenario& scenario, ChannelPolicy policy,
                    std::optional<PartitionStrategy> strategy) {
  Plan plan = make_plan(scenario, policy);
  PartitionPlan partition = make_partition(
      scenario, plan.topology, strategy.value_or(scenario.partition.strategy));
  SimReport report = simulate_iteration({plan.topology, scenario.parallel, plan.groups,
                                         plan.channels, partition, scenario.model,
                                         scenario.cost});
  return Simulation{std::move(plan), std::move(partition), std::move(report)};
}

double calibrate(const Scenario& scenario, double target_tflops) {
  Plan plan = make_plan(scenario, ChannelPolicy::kHolmes);
  return calibrate_efficiency(
      [&](double efficiency) {
        Scenario s = scenario;
        s.cost.efficiency = efficiency;
        const PartitionPlan part = make_partition(s, plan.topology, s.partition.strategy);
        return simulate_iteration({plan.topology, s.parallel, plan.groups, plan.channels,
                                   part, s.model, s.cost})
            .tflops_per_gpu;
      },
      target_tflops);
}

Scenario with_uniform_fabric(const Scenario& scenario, NicKind kind) {
  const ClusterTopology& t = scenario.topology;
  std::vector<Cluster> clusters = t.clusters();
  for (Cluster& c : clusters) {
    if (kind == NicKind::kEthernet) {
      c.rdma_nic = t.ethernet();
    } else {
      c.rdma_nic.kind = kind;
    }
  }
  Scenario out = scenario;
  out.topology = ClusterTopology(std::move(clusters), t.gpus_per_node(), t.ethernet(),
                                 t.intra_node_bandwidth_gbps(),
                                 kind != NicKind::kEthernet, t.intra_node_latency_s());
  return out;
}

std::string nic_environment(const ClusterTopology& topo) {
  std::set<NicKind> kinds;
  for (const Cluster& c : topo.clusters()) kinds.insert(c.rdma_nic.kind);
  return kinds.size() == 1 ? std::string(to_string(*kinds.begin())) : "hybrid";
}

}  // namespace holmes
