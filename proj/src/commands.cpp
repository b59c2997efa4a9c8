#include "holmes/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "holmes/error.hpp"
#include "holmes/planner.hpp"
#include "holmes/scenario.hpp"
#include "holmes/serialize.hpp"

namespace holmes {

namespace {

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string bold(const std::string& s, bool color) {
  return color ? "\x1b[1m" + s + "\x1b[0m" : s;
}

std::string join_ints(const std::vector<int>& v, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

// Runs a command body and maps exceptions onto the exit-code contract.
CommandResult guarded(const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return {kExitMalformed, "", std::string("error: ") + e.what() + "\n"};
  } catch (const Error& e) {
    return {kExitInfeasible, "",
            "error: " + std::string(to_string(e.code())) + ": " + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {kExitMalformed, "", std::string("error: ") + e.what() + "\n"};
  }
}

std::string diagnostic_lines(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const Diagnostic& d : diagnostics) out += d.code + ": " + d.message + "\n";
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& rows) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << kCsvHeader << "\n";
  for (const std::string& r : rows) f << r << "\n";
  if (!f) throw ConfigError("failed writing " + path.string());
}

double max_reduce_scatter(const SimReport& r) {
  double out = 0.0;
  for (const DpGroupTiming& g : r.dp_groups) out = std::max(out, g.reduce_scatter_s);
  return out;
}

std::string csv_row(const std::string& scenario, const std::string& env,
                    const SimReport& r) {
  return scenario + "," + env + "," + fixed(r.tflops_per_gpu, 6) + "," +
         fixed(r.throughput, 6) + "," + fixed(max_reduce_scatter(r), 9);
}

std::vector<std::string> channel_warnings(const Plan& plan) {
  std::vector<std::string> out;
  for (const ChannelAssignment& a : plan.channels) {
    if (a.warning) out.push_back(*a.warning);
  }
  return out;
}

std::string warning_lines(const std::vector<std::string>& warnings) {
  std::string out;
  for (const std::string& w : warnings) out += "warning: " + w + "\n";
  return out;
}

std::string plan_table(const Plan& plan, bool color) {
  std::ostringstream os;
  os << bold("cluster ordering", color) << ": [" << join_ints(plan.ordering.order, ", ")
     << "], m1 = " << plan.ordering.m1 << "\n";
  for (GroupKind kind : {GroupKind::kTP, GroupKind::kPP, GroupKind::kDP}) {
    const GroupMatrix& m = plan.groups.matrix(kind);
    std::string name(to_string(kind));
    std::transform(name.begin(), name.end(), name.begin(), ::toupper);
    os << bold(name + " groups (" + std::to_string(m.rows.size()) + ")", color) << "\n";
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      const ChannelAssignment& a = find_channel(plan.channels, kind, static_cast<int>(i) + 1);
      char row[32];
      std::snprintf(row, sizeof row, "  %4zu  ", i + 1);
      os << row << "[" << join_ints(m.rows[i], ", ") << "]  " << to_string(a.channel)
         << " " << fixed(a.bandwidth_gbps, 1) << " Gbps";
      if (a.warning) os << "  (" << *a.warning << ")";
      os << "\n";
    }
  }
  return os.str();
}

struct StrategySpec {
  std::string_view name;
  ChannelPolicy policy;
  std::optional<PartitionStrategy> partition;  // nullopt: as configured
  std::optional<NicKind> fabric;               // rewrite every cluster
};

const std::vector<StrategySpec>& strategy_table() {
  static const std::vector<StrategySpec> table = {
      {"holmes", ChannelPolicy::kHolmes, PartitionStrategy::kSelfAdapting, std::nullopt},
      {"naive", ChannelPolicy::kNaive, PartitionStrategy::kUniform, std::nullopt},
      {"uniform-partition", ChannelPolicy::kHolmes, PartitionStrategy::kUniform, std::nullopt},
      {"self-adapting-partition", ChannelPolicy::kHolmes, PartitionStrategy::kSelfAdapting,
       std::nullopt},
      {"ib-only", ChannelPolicy::kHolmes, PartitionStrategy::kUniform, NicKind::kInfiniBand},
      {"roce-only", ChannelPolicy::kHolmes, PartitionStrategy::kUniform, NicKind::kRoCE},
      {"ethernet-only", ChannelPolicy::kHolmes, PartitionStrategy::kUniform,
       NicKind::kEthernet},
      {"hybrid", ChannelPolicy::kHolmes, std::nullopt, std::nullopt},
  };
  return table;
}

}  // namespace

const std::vector<std::string_view>& compare_strategy_names() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> out;
    for (const StrategySpec& s : strategy_table()) out.push_back(s.name);
    return out;
  }();
  return names;
}

CommandResult cmd_validate(const CommandOptions& opts) {
  return guarded([&] {
    const Scenario scenario = load_scenario(opts.config);
    const auto diagnostics = validate_scenario(scenario);
    CommandResult r;
    r.exit_code = diagnostics.empty() ? kExitOk : kExitInfeasible;
    if (opts.format == OutputFormat::kJson) {
      ordered_json j;
      j["scenario"] = scenario.name;
      j["valid"] = diagnostics.empty();
      j["diagnostics"] = diagnostics_to_json(diagnostics);
      r.out = dump(j);
    } else if (diagnostics.empty()) {
      r.out = scenario.name + ": ok\n";
    } else {
      r.out = diagnostic_lines(diagnostics);
    }
    return r;
  });
}

CommandResult cmd_plan(const CommandOptions& opts) {
  return guarded([&] {
    const Scenario scenario = load_scenario(opts.config);
    const auto diagnostics = validate_scenario(scenario);
    if (!diagnostics.empty()) {
      return CommandResult{kExitInfeasible, "", diagnostic_lines(diagnostics)};
    }
    const Plan plan =
        make_plan(scenario, opts.naive ? ChannelPolicy::kNaive : ChannelPolicy::kHolmes);
    CommandResult r;
    r.err = warning_lines(channel_warnings(plan));
    if (opts.format == OutputFormat::kTable) {
      r.out = plan_table(plan, opts.color);
    } else {
      r.out = dump(plan_to_json({plan.ordering, plan.groups, plan.channels}));
    }
    return r;
  });
}

CommandResult cmd_partition(const CommandOptions& opts) {
  return guarded([&] {
    const Scenario scenario = load_scenario(opts.config);
    const auto diagnostics = validate_scenario(scenario);
    if (!diagnostics.empty()) {
      return CommandResult{kExitInfeasible, "", diagnostic_lines(diagnostics)};
    }
    const Plan plan = make_plan(scenario, ChannelPolicy::kHolmes);
    const PartitionPlan part =
        make_partition(scenario, plan.topology, scenario.partition.strategy);
    CommandResult r;
    r.err = warning_lines(part.warnings);
    if (opts.format == OutputFormat::kTable) {
      std::ostringstream os;
      os << bold("strategy", opts.color) << ": " << to_string(part.strategy) << "\n";
      if (part.strategy == PartitionStrategy::kSelfAdapting) {
        os << bold("alpha", opts.color) << ": " << part.alpha << "\n";
      }
      os << bold("stage_layers", opts.color) << ": " << join_ints(part.stage_layers) << "\n";
      os << bold("cluster_layers", opts.color) << ": " << join_ints(part.cluster_layers)
         << "\n";
      r.out = os.str();
    } else {
      r.out = dump(partition_to_json(part));
    }
    return r;
  });
}

CommandResult cmd_simulate(const CommandOptions& opts) {
  return guarded([&] {
    Scenario scenario = load_scenario(opts.config);
    const auto diagnostics = validate_scenario(scenario);
    if (!diagnostics.empty()) {
      return CommandResult{kExitInfeasible, "", diagnostic_lines(diagnostics)};
    }
    CommandResult r;
    if (opts.calibrate_tflops) {
      scenario.cost.efficiency = calibrate(scenario, *opts.calibrate_tflops);
      r.err += "calibrated efficiency = " + fixed(scenario.cost.efficiency, 6) + "\n";
    }
    const ChannelPolicy policy = opts.naive ? ChannelPolicy::kNaive : ChannelPolicy::kHolmes;
    const Simulation sim = simulate(scenario, policy);
    r.err += warning_lines(sim.partition.warnings);
    r.err += warning_lines(channel_warnings(sim.plan));
    if (opts.csv) {
      write_csv(*opts.csv, {csv_row(scenario.name, nic_environment(scenario.topology),
                                    sim.report)});
    }
    if (opts.format == OutputFormat::kTable) {
      const SimReport& rep = sim.report;
      std::ostringstream os;
      os << bold("scenario", opts.color) << ": " << scenario.name << " ("
         << nic_environment(scenario.topology) << ", " << to_string(policy) << ")\n";
      if (!scenario.defaults_applied.empty()) {
        os << "defaults applied:";
        for (const auto& d : scenario.defaults_applied) os << " " << d;
        os << "\n";
      }
      os << "config sha256:     " << scenario.fingerprint << "\n"
         << "efficiency:        " << fixed(scenario.cost.efficiency, 6) << "\n"
         << "stage layers:      " << join_ints(sim.partition.stage_layers) << "\n"
         << "micro-batches:     " << rep.micro_batches << "\n"
         << "iteration time:    " << fixed(rep.iter_time, 6) << " s\n"
         << "TFLOPS per GPU:    " << fixed(rep.tflops_per_gpu, 3) << "\n"
         << "throughput:        " << fixed(rep.throughput, 3) << " samples/s\n"
         << "  pipeline compute " << fixed(rep.breakdown.pipeline_compute, 6) << " s\n"
         << "  pipeline p2p     " << fixed(rep.breakdown.pipeline_p2p, 6) << " s\n"
         << "  dp sync          " << fixed(rep.breakdown.dp_sync, 6) << " s\n"
         << "  tp collectives   " << fixed(rep.breakdown.tp_collectives, 6) << " s\n";
      r.out = os.str();
    } else {
      r.out = dump(report_to_json(scenario, sim, policy));
    }
    return r;
  });
}

CommandResult cmd_compare(const CommandOptions& opts) {
  return guarded([&] {
    std::vector<std::string> names = opts.strategies;
    if (names.empty()) names = {"holmes", "naive"};
    std::vector<const StrategySpec*> specs;
    for (const std::string& n : names) {
      auto it = std::find_if(strategy_table().begin(), strategy_table().end(),
                             [&](const StrategySpec& s) { return s.name == n; });
      if (it == strategy_table().end()) {
        std::string valid;
        for (auto v : compare_strategy_names()) valid += " " + std::string(v);
        return CommandResult{kExitInfeasible, "",
                             "error: unknown strategy \"" + n + "\"; valid names:" + valid +
                                 "\n"};
      }
      specs.push_back(&*it);
    }
    if (specs.size() < 2) {
      return CommandResult{kExitInfeasible, "", "error: compare needs at least 2 strategies\n"};
    }
    const Scenario scenario = load_scenario(opts.config);
    const auto diagnostics = validate_scenario(scenario);
    if (!diagnostics.empty()) {
      return CommandResult{kExitInfeasible, "", diagnostic_lines(diagnostics)};
    }

    struct Row {
      std::string env;
      Simulation sim;
    };
    std::vector<std::future<Row>> futures;
    for (const StrategySpec* spec : specs) {
      futures.push_back(std::async(std::launch::async, [spec, &scenario] {
        const Scenario variant =
            spec->fabric ? with_uniform_fabric(scenario, *spec->fabric) : scenario;
        return Row{nic_environment(variant.topology),
                   simulate(variant, spec->policy, spec->partition)};
      }));
    }
    std::vector<Row> rows;
    for (auto& f : futures) rows.push_back(f.get());

    const double base = rows.front().sim.report.throughput;
    CommandResult r;
    ordered_json out;
    out["scenario"] = scenario.name;
    out["config_sha256"] = scenario.fingerprint;
    out["defaults_applied"] = scenario.defaults_applied;
    ordered_json jrows = ordered_json::array();
    std::vector<std::string> csv;
    std::ostringstream table;
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %5s %-10s %10s %12s %10s %8s", "strategy",
                  "nodes", "nic_env", "tflops", "throughput", "dp_sync_s", "ratio");
    table << bold(line, opts.color) << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SimReport& rep = rows[i].sim.report;
      const double ratio = rep.throughput / base;
      ordered_json row;
      row["strategy"] = specs[i]->name;
      row["nodes"] = rows[i].sim.plan.topology.node_count();
      row["nic_env"] = rows[i].env;
      row["tflops"] = rep.tflops_per_gpu;
      row["throughput"] = rep.throughput;
      row["dp_sync_s"] = rep.breakdown.dp_sync;
      row["reduce_scatter_s"] = max_reduce_scatter(rep);
      row["ratio"] = ratio;
      jrows.push_back(std::move(row));
      csv.push_back(csv_row(scenario.name + ":" + std::string(specs[i]->name), rows[i].env, rep));
      std::snprintf(line, sizeof line, "%-24s %5d %-10s %10.3f %12.3f %10.6f %8.4f",
                    std::string(specs[i]->name).c_str(),
                    rows[i].sim.plan.topology.node_count(), rows[i].env.c_str(),
                    rep.tflops_per_gpu, rep.throughput, rep.breakdown.dp_sync, ratio);
      table << line << "\n";
    }
    out["rows"] = std::move(jrows);
    if (opts.csv) write_csv(*opts.csv, csv);
    r.out = opts.format == OutputFormat::kTable ? table.str() : dump(out);
    return r;
  });
}

CommandResult run_command(std::string_view name, const CommandOptions& opts) {
  if (name == "validate") return cmd_validate(opts);
  if (name == "plan") return cmd_plan(opts);
  if (name == "partition") return cmd_partition(opts);
  if (name == "simulate") return cmd_simulate(opts);
  if (name == "compare") return cmd_compare(opts);
  return {kExitMalformed, "", "error: unknown command \"" + std::string(name) + "\"\n"};
}

}  // namespace holmes
