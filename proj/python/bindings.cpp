#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "holmes/commands.hpp"
#include "holmes/error.hpp"
#include "holmes/groups.hpp"
#include "holmes/partition.hpp"
#include "holmes/planner.hpp"
#include "holmes/scenario.hpp"
#include "holmes/serialize.hpp"
#include "holmes/simulator.hpp"
#include "holmes/topology.hpp"

namespace py = pybind11;

namespace {

// Minimal topology for the numbering helpers: one RDMA kind, default fabrics.
holmes::ClusterTopology toy_topology(const std::vector<int>& nodes_per_cluster,
                                     int gpus_per_node) {
  std::vector<holmes::Cluster> clusters;
  for (std::size_t i = 0; i < nodes_per_cluster.size(); ++i) {
    clusters.push_back({static_cast<int>(i) + 1, nodes_per_cluster[i],
                        holmes::NicSpec::with_default_latency(holmes::NicKind::kInfiniBand, 200),
                        312.0, 80.0});
  }
  return holmes::ClusterTopology(
      std::move(clusters), gpus_per_node,
      holmes::NicSpec::with_default_latency(holmes::NicKind::kEthernet, 25), 2400.0, false);
}

std::optional<holmes::PartitionStrategy> strategy_arg(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  auto parsed = holmes::partition_strategy_from_string(*s);
  if (!parsed) throw py::value_error("strategy must be 'uniform' or 'self_adapting'");
  return parsed;
}

holmes::ChannelPolicy policy_arg(bool naive) {
  return naive ? holmes::ChannelPolicy::kNaive : holmes::ChannelPolicy::kHolmes;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Group planning, NIC selection, pipeline partitioning and iteration simulation";

  py::register_exception<holmes::Error>(m, "HolmesError", PyExc_RuntimeError);
  py::register_exception<holmes::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<holmes::Scenario>(m, "Scenario")
      .def_property_readonly("name", [](const holmes::Scenario& s) { return s.name; })
      .def_property_readonly("fingerprint",
                             [](const holmes::Scenario& s) { return s.fingerprint; })
      .def_property_readonly("devices",
                             [](const holmes::Scenario& s) { return s.topology.device_count(); })
      .def_property_readonly("nic_env", [](const holmes::Scenario& s) {
        return holmes::nic_environment(s.topology);
      })
      .def_property(
          "efficiency", [](const holmes::Scenario& s) { return s.cost.efficiency; },
          [](holmes::Scenario& s, double e) { s.cost.efficiency = e; });

  m.def("load_scenario", [](const std::string& path) { return holmes::load_scenario(path); },
        py::arg("path"));
  m.def("parse_scenario", [](const std::string& text) { return holmes::parse_scenario(text); },
        py::arg("text"));

  m.def("validate_json", [](const holmes::Scenario& s) {
    return holmes::diagnostics_to_json(holmes::validate_scenario(s)).dump();
  });
  m.def(
      "plan_json",
      [](const holmes::Scenario& s, bool naive) {
        const holmes::Plan plan = holmes::make_plan(s, policy_arg(naive));
        return holmes::plan_to_json({plan.ordering, plan.groups, plan.channels}).dump();
      },
      py::arg("scenario"), py::arg("naive") = false);
  m.def(
      "partition_json",
      [](const holmes::Scenario& s, std::optional<std::string> strategy) {
        const holmes::Plan plan = holmes::make_plan(s, holmes::ChannelPolicy::kHolmes);
        return holmes::partition_to_json(
                   holmes::make_partition(s, plan.topology,
                                          strategy_arg(strategy).value_or(s.partition.strategy)))
            .dump();
      },
      py::arg("scenario"), py::arg("strategy") = py::none());
  m.def(
      "simulate_json",
      [](const holmes::Scenario& s, bool naive, std::optional<std::string> strategy) {
        py::gil_scoped_release release;
        const auto sim = holmes::simulate(s, policy_arg(naive), strategy_arg(strategy));
        return holmes::report_to_json(s, sim, policy_arg(naive)).dump();
      },
      py::arg("scenario"), py::arg("naive") = false, py::arg("strategy") = py::none());
  m.def("calibrate", &holmes::calibrate, py::arg("scenario"), py::arg("target_tflops"));

  m.def("rank_of",
        [](const std::vector<int>& nodes, int gpus, int cluster, int node, int gpu) {
          return holmes::rank_of(toy_topology(nodes, gpus), {cluster, node, gpu});
        },
        py::arg("nodes_per_cluster"), py::arg("gpus_per_node"), py::arg("cluster"),
        py::arg("node"), py::arg("gpu"));
  m.def("coord_of",
        [](const std::vector<int>& nodes, int gpus, int rank) {
          const auto c = holmes::coord_of(toy_topology(nodes, gpus), rank);
          return std::make_tuple(c.cluster, c.node, c.gpu);
        },
        py::arg("nodes_per_cluster"), py::arg("gpus_per_node"), py::arg("rank"));
  m.def("build_groups",
        [](const std::vector<int>& nodes, int gpus, int t, int p, int d) {
          const auto plan = holmes::build_plan({t, p, d}, toy_topology(nodes, gpus));
          py::dict out;
          out["tp"] = plan.tp.rows;
          out["pp"] = plan.pp.rows;
          out["dp"] = plan.dp.rows;
          return out;
        },
        py::arg("nodes_per_cluster"), py::arg("gpus_per_node"), py::arg("t"), py::arg("p"),
        py::arg("d"));

  m.def("uniform_partition", &holmes::uniform_partition, py::arg("layers"), py::arg("stages"));
  m.def("two_nic_split",
        [](int layers, double s_ib, double s_roce, double alpha) {
          const auto r = holmes::two_nic_split(layers, s_ib, s_roce, alpha);
          return std::make_tuple(r.ib_layers, r.roce_layers, r.warning);
        },
        py::arg("layers"), py::arg("s_ib"), py::arg("s_roce"), py::arg("alpha"));
  m.def("multi_cluster_alloc",
        [](int layers, const std::vector<double>& speeds, const std::vector<double>& alphas,
           double mem_per_layer_gb, const std::vector<double>& dmem_gb) {
          return holmes::multi_cluster_alloc(layers, speeds, alphas, mem_per_layer_gb, dmem_gb)
              .layers;
        },
        py::arg("layers"), py::arg("speeds"), py::arg("alphas"), py::arg("mem_per_layer_gb"),
        py::arg("dmem_gb"));

  m.def("flops_per_iteration",
        [](int layers, int hidden, int global_batch, int seq_len, int vocab) {
          holmes::ModelSpec model;
          model.layers = layers;
          model.hidden = hidden;
          model.global_batch = global_batch;
          model.seq_len = seq_len;
          model.vocab = vocab;
          return holmes::flops_per_iteration(model);
        },
        py::arg("layers"), py::arg("hidden"), py::arg("global_batch"),
        py::arg("seq_len") = holmes::kDefaultSeqLen, py::arg("vocab") = holmes::kDefaultVocab);
  m.def("analytic_makespan",
        [](const std::vector<std::pair<double, double>>& stages, int micro_batches,
           const std::vector<double>& p2p) {
          std::vector<holmes::StageTimes> st;
          for (auto [f, b] : stages) st.push_back({f, b});
          return holmes::analytic_makespan(st, micro_batches, p2p);
        },
        py::arg("stages"), py::arg("micro_batches"), py::arg("p2p"));
  m.def("run_1f1b",
        [](const std::vector<std::pair<double, double>>& stages, int micro_batches,
           const std::vector<double>& p2p) {
          std::vector<holmes::StageTimes> st;
          for (auto [f, b] : stages) st.push_back({f, b});
          return holmes::run_1f1b(st, micro_batches, p2p).makespan;
        },
        py::arg("stages"), py::arg("micro_batches"), py::arg("p2p"));
  m.def("metrics",
        [](double flops, double iter_time, int devices, int global_batch) {
          const auto r = holmes::metrics(flops, iter_time, devices, global_batch);
          return std::make_tuple(r.tflops_per_gpu, r.throughput);
        },
        py::arg("flops"), py::arg("iter_time"), py::arg("devices"), py::arg("global_batch"));

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, std::optional<std::string> format,
         bool naive, std::vector<std::string> strategies) {
        holmes::CommandOptions opts;
        opts.config = config;
        if (format) {
          opts.format = *format == "table" ? holmes::OutputFormat::kTable
                                           : holmes::OutputFormat::kJson;
        }
        opts.naive = naive;
        opts.strategies = std::move(strategies);
        const auto r = holmes::run_command(name, opts);
        return std::make_tuple(r.exit_code, r.out, r.err);
      },
      py::arg("command"), py::arg("config"), py::arg("format") = py::none(),
      py::arg("naive") = false, py::arg("strategies") = std::vector<std::string>{});
}
