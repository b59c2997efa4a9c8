#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holmes {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitMalformed = 2;

enum class OutputFormat { kJson, kTable };

struct CommandOptions {
  std::filesystem::path config;
  std::optional<OutputFormat> format;
  std::optional<std::filesystem::path> csv;
  bool naive = false;
  std::vector<std::string> strategies;  // compare only
  std::optional<double> calibrate_tflops;  // simulate only
  bool color = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string out;
  std::string err;
};

inline constexpr std::string_view kCsvHeader =
    "scenario,nic_env,tflops,throughput,reduce_scatter_s";

const std::vector<std::string_view>& compare_strategy_names();

CommandResult cmd_validate(const CommandOptions& opts);
CommandResult cmd_plan(const CommandOptions& opts);
CommandResult cmd_partition(const CommandOptions& opts);
CommandResult cmd_simulate(const CommandOptions& opts);
CommandResult cmd_compare(const CommandOptions& opts);

// Dispatch by subcommand name; unknown names exit with kExitMalformed.
CommandResult run_command(std::string_view name, const CommandOptions& opts);

}  // namespace holmes
