#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "support.hpp"

using holmes::testing::scenario_path;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded and HOLMES_NO_COLOR set.
Run cli(const std::string& args) {
  const std::string cmd = "HOLMES_NO_COLOR=1 '" + std::string(HOLMES_CLI) + "' " + args +
                          " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string cfg(const std::string& name) { return "--config '" + scenario_path(name) + "'"; }

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / ("holmes_cli_" + name);
  std::ofstream(p) << contents;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate exit codes") {
  CHECK(cli("validate " + cfg("hybrid_2x2")).code == 0);

  auto j = nlohmann::json::parse(slurp(scenario_path("toy_n8")));
  j["parallel"]["d"] = 3;
  const fs::path bad = temp_file("degree.json", j.dump());
  const Run r = cli("validate --config '" + bad.string() + "'");
  CHECK(r.code == 1);
  CHECK(r.out.find("DEGREE_PRODUCT") != std::string::npos);

  const fs::path broken = temp_file("broken.json", "{\"name\": ");
  CHECK(cli("validate --config '" + broken.string() + "'").code == 2);
  CHECK(cli("validate --config /nonexistent/x.json").code == 2);
  CHECK(cli("validate").code == 2);
  CHECK(cli("frobnicate " + cfg("toy_n8")).code == 2);
}

TEST_CASE("plan output") {
  const Run r = cli("plan " + cfg("toy_n8"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["tp"] == nlohmann::json::parse("[[1,2],[3,4],[5,6],[7,8]]"));
  CHECK(j["pp"] == nlohmann::json::parse("[[1,5],[2,6],[3,7],[4,8]]"));
  CHECK(j["dp"] == nlohmann::json::parse("[[1,3],[2,4],[5,7],[6,8]]"));

  const auto f3 = nlohmann::json::parse(cli("plan " + cfg("hybrid_2x2")).out);
  for (const auto& c : f3["channels"]) {
    if (c["kind"] == "pp") CHECK(c["channel"] == "ethernet");
  }
  const auto naive = nlohmann::json::parse(cli("plan --naive " + cfg("hybrid_2x2")).out);
  for (const auto& c : naive["channels"]) {
    if (c["kind"] == "dp") CHECK(c["channel"] == "ethernet");
  }
  const Run table = cli("plan --format table " + cfg("toy_n8"));
  CHECK(table.code == 0);
  CHECK(table.out.find('\x1b') == std::string::npos);
}

TEST_CASE("partition output") {
  const auto j = nlohmann::json::parse(cli("partition " + cfg("group1_hybrid")).out);
  CHECK(j["cluster_layers"] == nlohmann::json::parse("[17,13]"));
  CHECK(j["strategy"] == "self_adapting");

  auto g3 = nlohmann::json::parse(slurp(scenario_path("group3_ib")));
  g3["partition"] = {{"strategy", "uniform"}};
  const fs::path u = temp_file("uniform.json", g3.dump());
  const auto uj = nlohmann::json::parse(cli("partition --config '" + u.string() + "'").out);
  CHECK(uj["stage_layers"] == nlohmann::json::parse("[12,12,12]"));
  CHECK(uj["alpha"].is_null());

  auto heavy = nlohmann::json::parse(slurp(scenario_path("group1_hybrid")));
  heavy["model"]["per_layer_mem_gb"] = 1000.0;
  const fs::path h = temp_file("heavy.json", heavy.dump());
  CHECK(cli("partition --config '" + h.string() + "'").code == 1);
}

TEST_CASE("simulate and CSV") {
  const fs::path csv = fs::temp_directory_path() / "holmes_cli_out.csv";
  fs::remove(csv);
  const Run r = cli("simulate " + cfg("group1_ib") + " --csv '" + csv.string() + "'");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["tflops_per_gpu"].get<double>() == doctest::Approx(197.0).epsilon(0.01));
  CHECK(j["config_sha256"].get<std::string>().size() == 64);
  std::istringstream lines(slurp(csv));
  std::string header;
  std::getline(lines, header);
  CHECK(header == "scenario,nic_env,tflops,throughput,reduce_scatter_s");
  std::string row;
  std::getline(lines, row);
  CHECK(row.rfind("group1_ib,infiniband,", 0) == 0);
}

TEST_CASE("compare") {
  const Run r = cli("compare " + cfg("group1_hybrid") + " --strategies holmes,naive");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["rows"][1]["ratio"].get<double>() < 1.0);
  const auto self = nlohmann::json::parse(
      cli("compare " + cfg("group1_ib") + " --strategies ib-only,ib-only").out);
  CHECK(self["rows"][1]["ratio"].get<double>() == 1.0);
  CHECK(cli("compare " + cfg("group1_ib") + " --strategies holmes,warp-drive").code == 1);
  CHECK(cli("compare " + cfg("group1_ib") + " --strategies holmes").code == 1);
}

TEST_CASE("byte-identical output across runs") {
  for (const char* cmd : {"validate", "plan", "partition", "simulate", "compare"}) {
    for (const char* fmt : {"json", "table"}) {
      CAPTURE(cmd);
      CAPTURE(fmt);
      const std::string args =
          std::string(cmd) + " --format " + fmt + " " + cfg("hybrid_2x2");
      const Run a = cli(args);
      CHECK(a.code == 0);
      CHECK(cli(args).out == a.out);
      CHECK(cli(args).out == a.out);
    }
  }
}
