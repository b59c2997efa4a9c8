#include "holmes/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>

#include "holmes/error.hpp"
#include "json.hpp"

namespace holmes {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& path, const std::string& msg) {
  throw ConfigError(path.empty() ? msg : path + ": " + msg);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) malformed(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      malformed(path, "unknown key \"" + item.key() + "\"");
    }
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

const json* find(const json& j, std::string_view key) {
  auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const std::string& path, std::string_view key) {
  const json* v = find(j, key);
  if (v == nullptr) malformed(path, "missing key \"" + std::string(key) + "\"");
  return *v;
}

int as_positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 1 ||
      v.get<long long>() > 1'000'000'000) {
    malformed(path, "expected a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) malformed(path, "expected a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x > 0.0)) malformed(path, "must be positive");
  return x;
}

double as_non_negative(const json& v, const std::string& path) {
  const double x = as_number(v, path);
  if (!(x >= 0.0)) malformed(path, "must be non-negative");
  return x;
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) malformed(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) malformed(path, "expected a string");
  return v.get<std::string>();
}

struct Latencies {
  std::optional<double> rdma;
  std::optional<double> ethernet;
  std::optional<double> intra_node;
};

NicSpec parse_nic(const json& j, const std::string& path, bool must_be_ethernet,
                  const Latencies& lat) {
  check_keys(j, path, {"kind", "bandwidth_gbps", "latency_s"});
  NicKind kind = NicKind::kEthernet;
  if (const json* k = find(j, "kind")) {
    const std::string name = as_string(*k, join(path, "kind"));
    const auto parsed = nic_kind_from_string(name);
    if (!parsed) malformed(join(path, "kind"), "unknown NIC kind \"" + name + "\"");
    kind = *parsed;
  } else if (!must_be_ethernet) {
    malformed(path, "missing key \"kind\"");
  }
  if (must_be_ethernet && kind != NicKind::kEthernet) {
    malformed(join(path, "kind"), "the fallback fabric must be ethernet");
  }
  NicSpec nic = NicSpec::with_default_latency(
      kind, as_positive(need(j, path, "bandwidth_gbps"), join(path, "bandwidth_gbps")));
  const auto& fallback = kind == NicKind::kEthernet ? lat.ethernet : lat.rdma;
  if (const json* l = find(j, "latency_s")) {
    nic.latency_s = as_non_negative(*l, join(path, "latency_s"));
  } else if (fallback) {
    nic.latency_s = *fallback;
  }
  return nic;
}

CostModel parse_cost(const json* j, Latencies& lat) {
  CostModel cost;
  if (j == nullptr) return cost;
  const std::string path = "cost";
  check_keys(*j, path,
             {"efficiency", "backward_ratio", "tp_allreduces_per_layer",
              "rdma_latency_s", "ethernet_latency_s", "intra_node_latency_s",
              "nic_speed_scale"});
  if (const json* v = find(*j, "efficiency")) {
    cost.efficiency = as_positive(*v, join(path, "efficiency"));
    if (cost.efficiency > 1.0) malformed(join(path, "efficiency"), "must be in (0, 1]");
  }
  if (const json* v = find(*j, "backward_ratio")) {
    cost.backward_ratio = as_positive(*v, join(path, "backward_ratio"));
  }
  if (const json* v = find(*j, "tp_allreduces_per_layer")) {
    if (!v->is_number_integer() || v->get<long long>() < 0 || v->get<long long>() > 64) {
      malformed(join(path, "tp_allreduces_per_layer"), "expected an integer in [0, 64]");
    }
    cost.tp_allreduces_per_layer = static_cast<int>(v->get<long long>());
  }
  if (const json* v = find(*j, "rdma_latency_s")) {
    lat.rdma = as_non_negative(*v, join(path, "rdma_latency_s"));
  }
  if (const json* v = find(*j, "ethernet_latency_s")) {
    lat.ethernet = as_non_negative(*v, join(path, "ethernet_latency_s"));
  }
  if (const json* v = find(*j, "intra_node_latency_s")) {
    lat.intra_node = as_non_negative(*v, join(path, "intra_node_latency_s"));
  }
  if (const json* v = find(*j, "nic_speed_scale")) {
    const std::string sp = join(path, "nic_speed_scale");
    check_keys(*v, sp, {"infiniband", "roce", "ethernet"});
    for (const auto& item : v->items()) {
      const double scale = as_positive(item.value(), join(sp, item.key()));
      if (scale > 1.0) malformed(join(sp, item.key()), "must be in (0, 1]");
      cost.nic_speed_scale[static_cast<std::size_t>(*nic_kind_from_string(item.key()))] = scale;
    }
  }
  return cost;
}

ClusterTopology parse_topology(const json& j, const Latencies& lat) {
  const std::string path = "topology";
  check_keys(j, path,
             {"gpus_per_node", "intra_node_bandwidth_gbps", "inter_cluster_rdma",
              "ethernet", "clusters"});
  const int g = as_positive_int(need(j, path, "gpus_per_node"), join(path, "gpus_per_node"));
  const double intra = as_positive(need(j, path, "intra_node_bandwidth_gbps"),
                                   join(path, "intra_node_bandwidth_gbps"));
  bool inter = false;
  if (const json* v = find(j, "inter_cluster_rdma")) {
    inter = as_bool(*v, join(path, "inter_cluster_rdma"));
  }
  const NicSpec eth = parse_nic(need(j, path, "ethernet"), join(path, "ethernet"), true, lat);
  const json& cl = need(j, path, "clusters");
  if (!cl.is_array() || cl.empty()) {
    malformed(join(path, "clusters"), "expected a non-empty array");
  }
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    const std::string cp = join(path, "clusters[" + std::to_string(i) + "]");
    const json& c = cl[i];
    check_keys(c, cp, {"name", "nodes", "nic", "device_tflops_peak", "device_mem_gb",
                       "gpus_per_node"});
    if (const json* v = find(c, "name")) as_string(*v, join(cp, "name"));
    if (const json* v = find(c, "gpus_per_node")) {
      if (as_positive_int(*v, join(cp, "gpus_per_node")) != g) {
        malformed(join(cp, "gpus_per_node"),
                  "mixed GPUs per node is not supported; every cluster must have " +
                      std::to_string(g));
      }
    }
    Cluster cluster;
    cluster.index = static_cast<int>(i) + 1;
    cluster.node_count = as_positive_int(need(c, cp, "nodes"), join(cp, "nodes"));
    cluster.rdma_nic = parse_nic(need(c, cp, "nic"), join(cp, "nic"), false, lat);
    cluster.device_tflops_peak =
        as_positive(need(c, cp, "device_tflops_peak"), join(cp, "device_tflops_peak"));
    cluster.device_mem_gb = as_positive(need(c, cp, "device_mem_gb"), join(cp, "device_mem_gb"));
    clusters.push_back(cluster);
  }
  try {
    return ClusterTopology(std::move(clusters), g, eth, intra, inter,
                           lat.intra_node.value_or(kIntraNodeLatencySeconds));
  } catch (const Error& e) {
    malformed(path, e.what());
  }
}

ModelSpec parse_model(const json& j, std::vector<std::string>& defaults) {
  const std::string path = "model";
  check_keys(j, path,
             {"layers", "hidden", "heads", "seq_len", "vocab", "global_batch",
              "micro_batch", "bytes_per_param", "per_layer_mem_gb"});
  ModelSpec m;
  m.layers = as_positive_int(need(j, path, "layers"), join(path, "layers"));
  m.hidden = as_positive_int(need(j, path, "hidden"), join(path, "hidden"));
  m.heads = as_positive_int(need(j, path, "heads"), join(path, "heads"));
  m.global_batch = as_positive_int(need(j, path, "global_batch"), join(path, "global_batch"));
  m.micro_batch = as_positive_int(need(j, path, "micro_batch"), join(path, "micro_batch"));
  if (m.hidden % m.heads != 0) malformed(join(path, "heads"), "must divide hidden");
  if (const json* v = find(j, "seq_len")) {
    m.seq_len = as_positive_int(*v, join(path, "seq_len"));
  } else {
    defaults.push_back("model.seq_len");
  }
  if (const json* v = find(j, "vocab")) {
    m.vocab = as_positive_int(*v, join(path, "vocab"));
  } else {
    defaults.push_back("model.vocab");
  }
  if (const json* v = find(j, "bytes_per_param")) {
    m.bytes_per_param = as_positive_int(*v, join(path, "bytes_per_param"));
  }
  if (const json* v = find(j, "per_layer_mem_gb")) {
    m.per_layer_mem_gb = as_positive(*v, join(path, "per_layer_mem_gb"));
  }
  return m;
}

PartitionSettings parse_partition(const json* j, int clusters) {
  PartitionSettings s;
  if (j == nullptr) return s;
  const std::string path = "partition";
  check_keys(*j, path, {"strategy", "alpha", "cluster_alphas"});
  if (const json* v = find(*j, "strategy")) {
    const std::string name = as_string(*v, join(path, "strategy"));
    const auto parsed = partition_strategy_from_string(name);
    if (!parsed) {
      malformed(join(path, "strategy"),
                "unknown strategy \"" + name + "\" (expected uniform or self_adapting)");
    }
    s.strategy = *parsed;
  }
  if (const json* v = find(*j, "alpha")) s.alpha = as_positive(*v, join(path, "alpha"));
  if (const json* v = find(*j, "cluster_alphas")) {
    const std::string ap = join(path, "cluster_alphas");
    if (!v->is_array() || static_cast<int>(v->size()) != clusters) {
      malformed(ap, "expected one alpha per cluster (" + std::to_string(clusters) + ")");
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      s.cluster_alphas.push_back(
          as_positive((*v)[i], ap + "[" + std::to_string(i) + "]"));
    }
  }
  return s;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON at " + line_column(text, e.byte) + ": " + e.what());
  }
  check_keys(doc, "", {"name", "topology", "model", "parallel", "partition", "cost"});
  std::string name = "scenario";
  if (const json* v = find(doc, "name")) name = as_string(*v, "name");

  Latencies lat;
  CostModel cost = parse_cost(find(doc, "cost"), lat);
  ClusterTopology topo = parse_topology(need(doc, "", "topology"), lat);
  std::vector<std::string> defaults;
  ModelSpec model = parse_model(need(doc, "", "model"), defaults);

  const json& pj = need(doc, "", "parallel");
  check_keys(pj, "parallel", {"t", "p", "d"});
  ParallelConfig cfg{as_positive_int(need(pj, "parallel", "t"), "parallel.t"),
                     as_positive_int(need(pj, "parallel", "p"), "parallel.p"),
                     as_positive_int(need(pj, "parallel", "d"), "parallel.d")};
  PartitionSettings part = parse_partition(find(doc, "partition"), topo.cluster_count());

  return Scenario{std::move(name), std::move(topo), model,  cfg,
                  std::move(part), cost,           std::move(defaults),
                  sha256_hex(text)};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace holmes
