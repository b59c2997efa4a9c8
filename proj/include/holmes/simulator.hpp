#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "holmes/groups.hpp"
#include "holmes/model.hpp"
#include "holmes/nic_select.hpp"
#include "holmes/partition.hpp"
#include "holmes/topology.hpp"

namespace holmes {

// Fraction of peak TFLOPS achieved by compute kernels. Fitted once so the
// homogeneous InfiniBand 4-node run of parameter group 1 reports ~197 TFLOPS.
inline constexpr double kDefaultEfficiency = 0.67;

// Alpha-beta communication model plus compute efficiency.
struct CostModel {
  double efficiency = kDefaultEfficiency;
  double backward_ratio = 2.0;  // t_bwd / t_fwd
  int tp_allreduces_per_layer = 4;  // half in forward, half in backward
  // Per-NIC-kind multiplier on device speed, indexed by NicKind.
  std::array<double, 3> nic_speed_scale{1.0, 1.0, 1.0};

  double speed_scale(NicKind kind) const {
    return nic_speed_scale[static_cast<std::size_t>(kind)];
  }
  // Achieved TFLOPS of one device in the given cluster.
  double device_speed_tflops(const Cluster& cluster) const {
    return efficiency * cluster.device_tflops_peak *
           speed_scale(cluster.rdma_nic.kind);
  }

  // latency + 8 * bytes / (bandwidth * 1e9)
  static double comm(double bytes, double bandwidth_gbps, double latency_s) {
    return latency_s + 8.0 * bytes / (bandwidth_gbps * 1e9);
  }
  // Ring collective over `bytes` scaled by `factor`; free when factor is 0.
  static double collective(double factor, double bytes, double bandwidth_gbps,
                           double latency_s) {
    return factor == 0.0 ? 0.0 : comm(factor * bytes, bandwidth_gbps, latency_s);
  }
};

inline double all_reduce_factor(int n) { return 2.0 * (n - 1) / n; }
inline double reduce_scatter_factor(int n) { return static_cast<double>(n - 1) / n; }
inline double all_gather_factor(int n) { return static_cast<double>(n - 1) / n; }

struct StageTimes {
  double fwd = 0.0;
  double bwd = 0.0;
};

// Per-micro-batch compute time of one stage on one device. Each device runs
// 1/(d*t) of the iteration's FLOPs, spread evenly over layers and
// micro-batches; backward costs backward_ratio times forward.
StageTimes stage_compute_time(int stage_layers, const ModelSpec& model,
                              const ParallelConfig& cfg,
                              double device_tflops_peak, double efficiency,
                              double backward_ratio = 2.0);

struct TimelineEvent {
  int stage = 0;  // 1-based
  char op = 'F';  // 'F' forward, 'B' backward, 'S' data-parallel sync
  int micro = 0;  // 1-based; 0 for sync
  double start = 0.0;
  double end = 0.0;

  friend bool operator==(const TimelineEvent&, const TimelineEvent&) = default;
};

struct PipelineRun {
  double makespan = 0.0;
  std::vector<double> stage_finish;  // per stage, last backward completion
  std::vector<double> stage_busy;    // per stage, total op time
  std::vector<TimelineEvent> events; // in completion order
};

// Event-driven 1F1B (PipeDream-Flush) over one pipeline. Stage j (1-based)
// runs min(p - j, m) warm-up forwards, then alternates forward/backward, then
// drains. `p2p` holds the transfer time across each of the p-1 boundaries.
PipelineRun run_1f1b(std::span<const StageTimes> stages, int micro_batches,
                     std::span<const double> p2p);

// Closed form for uniform stages and uniform boundary cost c:
// (m + p - 1)(t_f + t_b) + 2 (p - 1 + floor((m - 1)(p - 1) / p)) c.
// The first term is fill plus steady state. Each forward/backward round trip
// from stage 1 to stage p and back crosses 2(p-1) boundaries with no slack in
// 1F1B, so the p2p cost is paid once during fill and then once per p
// micro-batches of steady state on every boundary. Throws kNotApplicable for
// non-uniform input.
double analytic_makespan(std::span<const StageTimes> stages, int micro_batches,
                         std::span<const double> p2p);

struct Metrics {
  double tflops_per_gpu = 0.0;
  double throughput = 0.0;
};

// tflops = F / (iter_time * N * 1e12); throughput = B / iter_time.
Metrics metrics(double flops, double iter_time, int devices, int global_batch);

struct Breakdown {
  double pipeline_compute = 0.0;  // busiest stage's compute
  double pipeline_p2p = 0.0;      // makespan added by p2p transfers
  double dp_sync = 0.0;           // slowest reduce-scatter + all-gather
  double tp_collectives = 0.0;    // busiest stage's TP all-reduces
};

struct DpGroupTiming {
  int row = 0;
  int stage = 0;
  Channel channel = Channel::kEthernet;
  double grad_bytes = 0.0;
  double reduce_scatter_s = 0.0;
  double all_gather_s = 0.0;
};

struct SimReport {
  double flops = 0.0;
  int micro_batches = 0;
  double iter_time = 0.0;
  double tflops_per_gpu = 0.0;
  double throughput = 0.0;
  Breakdown breakdown;
  std::vector<StageTimes> stage_times;  // per micro-batch, including TP
  std::vector<DpGroupTiming> dp_groups;
  std::vector<TimelineEvent> timeline;  // pipeline 1 plus its sync phases
  double total_busy_compute = 0.0;      // summed over all ranks
};

struct SimInput {
  const ClusterTopology& topo;
  const ParallelConfig& cfg;
  const GroupPlan& plan;
  const std::vector<ChannelAssignment>& channels;
  const PartitionPlan& partition;
  const ModelSpec& model;
  const CostModel& cost;
};

// Gradient bytes one DP member synchronizes for a stage: parameters of its
// layers (plus the V*h embedding on terminal stages) at bytes_per_param,
// divided across the t tensor shards.
double stage_grad_bytes(int stage, int stage_layers, const ModelSpec& model,
                        const ParallelConfig& cfg);

SimReport simulate_iteration(const SimInput& in);

// Per-DP-group reduce-scatter time on each group's channel.
std::vector<DpGroupTiming> reduce_scatter_report(const SimInput& in);

// Bisection on efficiency so that tflops_at(efficiency) hits the target.
// tflops_at must be non-decreasing in efficiency.
double calibrate_efficiency(const std::function<double(double)>& tflops_at,
                            double target_tflops, double tolerance = 1e-6);

}  // namespace holmes
