#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "holmes/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Plan and simulate LLM training over clusters with heterogeneous NICs",
               "holmes-planner"};
  app.require_subcommand(1);

  holmes::CommandOptions opts;
  std::string format;
  std::string csv;
  std::vector<std::string> strategies;
  double calibrate_tflops = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "scenario JSON file")->required();
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"json", "table"}));
  };
  auto* validate = app.add_subcommand("validate", "check a scenario for feasibility");
  auto* plan = app.add_subcommand("plan", "print TP/PP/DP groups and their channels");
  auto* partition = app.add_subcommand("partition", "print the pipeline layer split");
  auto* simulate = app.add_subcommand("simulate", "simulate one training iteration");
  auto* compare = app.add_subcommand("compare", "compare strategies on one scenario");
  for (auto* sub : {validate, plan, partition, simulate, compare}) add_common(sub);
  plan->add_flag("--naive", opts.naive, "use the unified-environment baseline channels");
  simulate->add_flag("--naive", opts.naive, "use the unified-environment baseline channels");
  simulate->add_option("--csv", csv, "also write a CSV row to this path");
  simulate->add_option("--calibrate-tflops", calibrate_tflops,
                       "fit compute efficiency to this TFLOPS target first");
  compare->add_option("--csv", csv, "also write CSV rows to this path");
  compare->add_option("--strategies", strategies, "strategies to compare (>= 2)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? holmes::kExitOk : holmes::kExitMalformed;
  }

  if (!format.empty()) {
    opts.format = format == "table" ? holmes::OutputFormat::kTable
                                    : holmes::OutputFormat::kJson;
  }
  if (!csv.empty()) opts.csv = csv;
  if (simulate->count("--calibrate-tflops") > 0) opts.calibrate_tflops = calibrate_tflops;
  opts.strategies = strategies;
  opts.color = std::getenv("HOLMES_NO_COLOR") == nullptr && isatty(STDOUT_FILENO);

  const auto* sub = app.get_subcommands().front();
  const holmes::CommandResult result = holmes::run_command(sub->get_name(), opts);
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
