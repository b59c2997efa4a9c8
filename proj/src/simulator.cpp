#include "holmes/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

#include "holmes/error.hpp"

namespace holmes {

StageTimes stage_compute_time(int stage_layers, const ModelSpec& model,
                              const ParallelConfig& cfg,
                              double device_tflops_peak, double efficiency,
                              double backward_ratio) {
  if (!(device_tflops_peak > 0.0) || !(efficiency > 0.0)) {
    throw Error(ErrorCode::kInvalidDevice,
                "device speed must be positive (peak " +
                    std::to_string(device_tflops_peak) + " TFLOPS, efficiency " +
                    std::to_string(efficiency) + ")");
  }
  if (stage_layers < 1) {
    throw Error(ErrorCode::kInconsistentPlan, "a stage needs at least one layer");
  }
  const int m = model.micro_batches(cfg);
  const double per_layer_fwd = flops_per_iteration(model) /
                               ((1.0 + backward_ratio) * model.layers * m *
                                cfg.d * cfg.t);
  const double fwd = per_layer_fwd * stage_layers / (efficiency * device_tflops_peak * 1e12);
  return {fwd, backward_ratio * fwd};
}

namespace {

constexpr double kNotReady = std::numeric_limits<double>::infinity();

struct Event {
  double time;
  long seq;
  enum Type { kComplete, kArrive } type;
  int stage;  // 0-based
  bool forward;
  int micro;  // 0-based

  bool operator>(const Event& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

struct Op {
  bool forward;
  int micro;
};

std::vector<std::vector<Op>> one_f_one_b_order(int p, int m) {
  std::vector<std::vector<Op>> orders(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    auto& ops = orders[static_cast<std::size_t>(j)];
    const int warmup = std::min(p - j - 1, m);
    int f = 0;
    int b = 0;
    for (; f < warmup; ++f) ops.push_back({true, f});
    while (f < m || b < m) {
      if (f < m) ops.push_back({true, f++});
      if (b < m) ops.push_back({false, b++});
    }
  }
  return orders;
}

}  // namespace

PipelineRun run_1f1b(std::span<const StageTimes> stages, int micro_batches,
                     std::span<const double> p2p) {
  const int p = static_cast<int>(stages.size());
  const int m = micro_batches;
  if (p < 1 || m < 1 || static_cast<int>(p2p.size()) != p - 1) {
    throw Error(ErrorCode::kInconsistentPlan,
                "pipeline needs >= 1 stage, >= 1 micro-batch and p-1 boundary costs");
  }
  const auto orders = one_f_one_b_order(p, m);
  const auto idx = [m](int stage, int micro) {
    return static_cast<std::size_t>(stage) * static_cast<std::size_t>(m) +
           static_cast<std::size_t>(micro);
  };
  std::vector<double> fwd_ready(static_cast<std::size_t>(p * m), kNotReady);
  std::vector<double> bwd_ready(static_cast<std::size_t>(p * m), kNotReady);
  for (int i = 0; i < m; ++i) fwd_ready[idx(0, i)] = 0.0;
  std::vector<std::size_t> next(static_cast<std::size_t>(p), 0);
  std::vector<bool> busy(static_cast<std::size_t>(p), false);
  std::vector<double> op_start(static_cast<std::size_t>(p), 0.0);

  PipelineRun run;
  run.stage_finish.assign(static_cast<std::size_t>(p), 0.0);
  run.stage_busy.assign(static_cast<std::size_t>(p), 0.0);
  run.events.reserve(static_cast<std::size_t>(2 * p * m));

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  long seq = 0;

  auto try_start = [&](int j, double now) {
    const auto sj = static_cast<std::size_t>(j);
    if (busy[sj] || next[sj] >= orders[sj].size()) return;
    const Op op = orders[sj][next[sj]];
    const double ready = op.forward ? fwd_ready[idx(j, op.micro)]
                                    : bwd_ready[idx(j, op.micro)];
    if (ready == kNotReady) return;
    const double duration = op.forward ? stages[sj].fwd : stages[sj].bwd;
    busy[sj] = true;
    op_start[sj] = now;
    queue.push({now + duration, seq++, Event::kComplete, j, op.forward, op.micro});
  };

  for (int j = 0; j < p; ++j) try_start(j, 0.0);
  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    const auto sj = static_cast<std::size_t>(ev.stage);
    if (ev.type == Event::kArrive) {
      (ev.forward ? fwd_ready : bwd_ready)[idx(ev.stage, ev.micro)] = ev.time;
      try_start(ev.stage, ev.time);
      continue;
    }
    busy[sj] = false;
    ++next[sj];
    run.stage_busy[sj] += ev.time - op_start[sj];
    run.events.push_back({ev.stage + 1, ev.forward ? 'F' : 'B', ev.micro + 1,
                          op_start[sj], ev.time});
    if (ev.forward) {
      if (ev.stage + 1 < p) {
        queue.push({ev.time + p2p[sj], seq++, Event::kArrive, ev.stage + 1, true,
                    ev.micro});
      } else {
        bwd_ready[idx(ev.stage, ev.micro)] = ev.time;
      }
    } else {
      run.stage_finish[sj] = ev.time;
      if (ev.stage > 0) {
        queue.push({ev.time + p2p[sj - 1], seq++, Event::kArrive, ev.stage - 1,
                    false, ev.micro});
      }
    }
    try_start(ev.stage, ev.time);
  }
  for (int j = 0; j < p; ++j) {
    if (next[static_cast<std::size_t>(j)] != orders[static_cast<std::size_t>(j)].size()) {
      throw Error(ErrorCode::kInconsistentPlan, "1F1B schedule deadlocked");
    }
  }
  run.makespan = *std::max_element(run.stage_finish.begin(), run.stage_finish.end());
  return run;
}

namespace {

bool uniform(double lo, double hi) {
  if (hi == 0.0) return lo == 0.0;
  return lo > 0.0 ? hi / lo - 1.0 <= 1e-9 : false;
}

}  // namespace

double analytic_makespan(std::span<const StageTimes> stages, int micro_batches,
                         std::span<const double> p2p) {
  const int p = static_cast<int>(stages.size());
  const int m = micro_batches;
  if (p < 1 || m < 1 || static_cast<int>(p2p.size()) != p - 1) {
    throw Error(ErrorCode::kNotApplicable, "malformed pipeline description");
  }
  auto [fmin, fmax] = std::minmax_element(
      stages.begin(), stages.end(),
      [](const StageTimes& a, const StageTimes& b) { return a.fwd < b.fwd; });
  auto [bmin, bmax] = std::minmax_element(
      stages.begin(), stages.end(),
      [](const StageTimes& a, const StageTimes& b) { return a.bwd < b.bwd; });
  double c = 0.0;
  if (!p2p.empty()) {
    auto [cmin, cmax] = std::minmax_element(p2p.begin(), p2p.end());
    if (!uniform(*cmin, *cmax)) {
      throw Error(ErrorCode::kNotApplicable, "p2p costs are not uniform");
    }
    c = *cmax;
  }
  if (!uniform(fmin->fwd, fmax->fwd) || !uniform(bmin->bwd, bmax->bwd)) {
    throw Error(ErrorCode::kNotApplicable, "stage times are not uniform");
  }
  const double tf = fmax->fwd;
  const double tb = bmax->bwd;
  const int crossings = 2 * (p - 1 + (m - 1) * (p - 1) / p);
  return (m + p - 1) * (tf + tb) + crossings * c;
}

Metrics metrics(double flops, double iter_time, int devices, int global_batch) {
  if (!(iter_time > 0.0)) {
    throw Error(ErrorCode::kNotApplicable, "iteration time must be positive");
  }
  return {flops / (iter_time * devices * 1e12), global_batch / iter_time};
}

double stage_grad_bytes(int stage, int stage_layers, const ModelSpec& model,
                        const ParallelConfig& cfg) {
  const double h = model.hidden;
  double params = 12.0 * h * h * stage_layers;
  // Input embedding on the first stage, output embedding on the last; a
  // single-stage pipeline holds one tied copy.
  if (stage == 1 || stage == cfg.p) params += static_cast<double>(model.vocab) * h;
  return params * model.bytes_per_param / cfg.t;
}

namespace {

struct Prepared {
  int m = 0;
  std::vector<StageTimes> compute;  // compute only
  std::vector<StageTimes> tp;       // TP collectives only
  std::vector<StageTimes> total;
  std::vector<std::size_t> pp_channel;  // index into channels, per PP row
  std::vector<std::size_t> dp_channel;
};

Prepared prepare(const SimInput& in) {
  const ParallelConfig& cfg = in.cfg;
  const auto fail = [](const std::string& msg) -> Error {
    return Error(ErrorCode::kInconsistentPlan, "inconsistent plan: " + msg);
  };
  if (cfg.product() != in.topo.device_count()) throw fail("degrees do not match topology");
  if (static_cast<int>(in.partition.stage_layers.size()) != cfg.p) {
    throw fail("partition has " + std::to_string(in.partition.stage_layers.size()) +
               " stages, pipeline degree is " + std::to_string(cfg.p));
  }
  const int layer_sum = std::accumulate(in.partition.stage_layers.begin(),
                                        in.partition.stage_layers.end(), 0);
  if (layer_sum != in.model.layers) {
    throw fail("partition covers " + std::to_string(layer_sum) + " of " +
               std::to_string(in.model.layers) + " layers");
  }
  if (!check_plan(in.plan, cfg, in.topo).empty()) throw fail("group plan does not match config");

  Prepared out;
  out.m = in.model.micro_batches(cfg);

  std::map<std::pair<GroupKind, int>, std::size_t> index;
  for (std::size_t i = 0; i < in.channels.size(); ++i) {
    index[{in.channels[i].kind, in.channels[i].row}] = i;
  }
  const auto lookup = [&](GroupKind kind, int row) {
    auto it = index.find({kind, row});
    if (it == index.end()) {
      throw fail("no channel for " + std::string(to_string(kind)) + " row " +
                 std::to_string(row));
    }
    return it->second;
  };

  const double act_bytes = static_cast<double>(in.model.micro_batch) *
                           in.model.seq_len * in.model.hidden * 2.0;
  for (int j = 1; j <= cfg.p; ++j) {
    const int first = (j - 1) * cfg.stage_block() + 1;
    const Cluster& cluster = in.topo.cluster_of_rank(first);
    const int layers = in.partition.stage_layers[static_cast<std::size_t>(j - 1)];
    const StageTimes c = stage_compute_time(
        layers, in.model, cfg,
        cluster.device_tflops_peak * in.cost.speed_scale(cluster.rdma_nic.kind),
        in.cost.efficiency, in.cost.backward_ratio);
    StageTimes tp;
    if (cfg.t > 1) {
      const ChannelAssignment& ch =
          in.channels[lookup(GroupKind::kTP, (first - 1) / cfg.t + 1)];
      const double one = CostModel::collective(all_reduce_factor(cfg.t), act_bytes,
                                               ch.bandwidth_gbps, ch.latency_s);
      const double fwd_count = in.cost.tp_allreduces_per_layer / 2;
      const double bwd_count = in.cost.tp_allreduces_per_layer - fwd_count;
      tp = {fwd_count * layers * one, bwd_count * layers * one};
    }
    out.compute.push_back(c);
    out.tp.push_back(tp);
    out.total.push_back({c.fwd + tp.fwd, c.bwd + tp.bwd});
  }
  for (std::size_t i = 0; i < in.plan.pp.rows.size(); ++i) {
    out.pp_channel.push_back(lookup(GroupKind::kPP, static_cast<int>(i) + 1));
  }
  for (std::size_t i = 0; i < in.plan.dp.rows.size(); ++i) {
    out.dp_channel.push_back(lookup(GroupKind::kDP, static_cast<int>(i) + 1));
  }
  return out;
}

std::vector<DpGroupTiming> dp_timings(const SimInput& in, const Prepared& prep) {
  std::vector<DpGroupTiming> out;
  const int d = in.cfg.d;
  for (std::size_t i = 0; i < in.plan.dp.rows.size(); ++i) {
    const int stage = stage_of_rank(in.cfg, in.plan.dp.rows[i].front());
    const ChannelAssignment& ch = in.channels[prep.dp_channel[i]];
    const double bytes = stage_grad_bytes(
        stage, in.partition.stage_layers[static_cast<std::size_t>(stage - 1)],
        in.model, in.cfg);
    out.push_back({static_cast<int>(i) + 1, stage, ch.channel, bytes,
                   CostModel::collective(reduce_scatter_factor(d), bytes,
                                         ch.bandwidth_gbps, ch.latency_s),
                   CostModel::collective(all_gather_factor(d), bytes,
                                         ch.bandwidth_gbps, ch.latency_s)});
  }
  return out;
}

}  // namespace

std::vector<DpGroupTiming> reduce_scatter_report(const SimInput& in) {
  return dp_timings(in, prepare(in));
}

SimReport simulate_iteration(const SimInput& in) {
  const Prepared prep = prepare(in);
  const ParallelConfig& cfg = in.cfg;
  const int p = cfg.p;
  const double act_bytes = static_cast<double>(in.model.micro_batch) *
                           in.model.seq_len * in.model.hidden * 2.0;

  SimReport report;
  report.flops = flops_per_iteration(in.model);
  report.micro_batches = prep.m;
  report.stage_times = prep.total;

  // Pipelines with the same boundary channel behave identically.
  std::map<std::pair<double, double>, std::pair<PipelineRun, double>> runs;
  std::vector<const PipelineRun*> row_run(in.plan.pp.rows.size());
  for (std::size_t i = 0; i < in.plan.pp.rows.size(); ++i) {
    const ChannelAssignment& ch = in.channels[prep.pp_channel[i]];
    const std::pair<double, double> key{ch.bandwidth_gbps, ch.latency_s};
    auto it = runs.find(key);
    if (it == runs.end()) {
      const double c = CostModel::comm(act_bytes, ch.bandwidth_gbps, ch.latency_s);
      std::vector<double> p2p(static_cast<std::size_t>(p - 1), c);
      PipelineRun with = run_1f1b(prep.total, prep.m, p2p);
      std::fill(p2p.begin(), p2p.end(), 0.0);
      const double without = run_1f1b(prep.total, prep.m, p2p).makespan;
      it = runs.emplace(key, std::make_pair(std::move(with), without)).first;
    }
    row_run[i] = &it->second.first;
    report.breakdown.pipeline_p2p =
        std::max(report.breakdown.pipeline_p2p, it->second.first.makespan - it->second.second);
  }

  const int block = cfg.stage_block();
  const auto pp_row_of = [block](int rank) { return (rank - 1) % block; };
  report.dp_groups = dp_timings(in, prep);
  std::vector<double> rank_end(static_cast<std::size_t>(in.topo.device_count()) + 1, 0.0);
  std::vector<double> sync_start(report.dp_groups.size(), 0.0);
  for (std::size_t g = 0; g < in.plan.dp.rows.size(); ++g) {
    const auto& row = in.plan.dp.rows[g];
    const DpGroupTiming& timing = report.dp_groups[g];
    double start = 0.0;
    for (int r : row) {
      const PipelineRun& run = *row_run[static_cast<std::size_t>(pp_row_of(r))];
      start = std::max(start, run.stage_finish[static_cast<std::size_t>(timing.stage - 1)]);
    }
    const double sync = timing.reduce_scatter_s + timing.all_gather_s;
    for (int r : row) rank_end[static_cast<std::size_t>(r)] = start + sync;
    sync_start[g] = start;
    report.breakdown.dp_sync = std::max(report.breakdown.dp_sync, sync);
  }
  report.iter_time = *std::max_element(rank_end.begin(), rank_end.end());

  for (int j = 0; j < p; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    report.breakdown.pipeline_compute = std::max(
        report.breakdown.pipeline_compute, prep.m * (prep.compute[sj].fwd + prep.compute[sj].bwd));
    report.breakdown.tp_collectives = std::max(
        report.breakdown.tp_collectives, prep.m * (prep.tp[sj].fwd + prep.tp[sj].bwd));
    report.total_busy_compute +=
        static_cast<double>(block) * prep.m * (prep.compute[sj].fwd + prep.compute[sj].bwd);
  }

  report.timeline = row_run.front()->events;
  for (std::size_t g = 0; g < in.plan.dp.rows.size(); ++g) {
    const auto& row = in.plan.dp.rows[g];
    if (std::find_if(row.begin(), row.end(), [&](int r) { return pp_row_of(r) == 0; }) ==
        row.end()) {
      continue;
    }
    const DpGroupTiming& timing = report.dp_groups[g];
    report.timeline.push_back({timing.stage, 'S', 0, sync_start[g],
                               sync_start[g] + timing.reduce_scatter_s + timing.all_gather_s});
  }

  const Metrics mt = metrics(report.flops, report.iter_time, in.topo.device_count(),
                             in.model.global_batch);
  report.tflops_per_gpu = mt.tflops_per_gpu;
  report.throughput = mt.throughput;
  return report;
}

double calibrate_efficiency(const std::function<double(double)>& tflops_at,
                            double target_tflops, double tolerance) {
  double lo = 1e-3;
  double hi = 1.0;
  if (tflops_at(hi) < target_tflops) {
    throw Error(ErrorCode::kNotApplicable,
                "target TFLOPS unreachable even at full efficiency");
  }
  if (tflops_at(lo) > target_tflops) {
    throw Error(ErrorCode::kNotApplicable, "target TFLOPS below the calibration range");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (tflops_at(mid) < target_tflops ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace holmes
