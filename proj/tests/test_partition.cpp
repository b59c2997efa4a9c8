#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "holmes/error.hpp"
#include "holmes/groups.hpp"
#include "holmes/partition.hpp"
#include "support.hpp"

using namespace holmes;
using holmes::testing::two_cluster_topo;
using holmes::testing::make_topo;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected holmes::Error");
  return ErrorCode::kNotApplicable;
}

}  // namespace

TEST_CASE("uniform partition") {
  CHECK(uniform_partition(30, 2) == std::vector<int>{15, 15});
  CHECK(uniform_partition(36, 3) == std::vector<int>{12, 12, 12});
  CHECK(uniform_partition(7, 2) == std::vector<int>{4, 3});
  CHECK(uniform_partition(6, 4) == std::vector<int>{2, 2, 1, 1});
  CHECK(code_of([] { uniform_partition(2, 3); }) == ErrorCode::kInfeasiblePartition);
}

TEST_CASE("two NIC split") {
  auto split = [](int l, double a, double b, double alpha) {
    const auto r = two_nic_split(l, a, b, alpha);
    return std::pair{r.ib_layers, r.roce_layers};
  };
  CHECK(split(30, 197, 160, 1.05) == std::pair{17, 13});
  CHECK(split(30, 197, 160, 1.0) == std::pair{16, 14});
  CHECK(split(30, 150, 150, 1.0) == std::pair{15, 15});
  CHECK_FALSE(two_nic_split(30, 197, 160, 1.05).warning.has_value());
}

TEST_CASE("two NIC split clamps overflow") {
  const auto high = two_nic_split(30, 197, 160, 3.0);
  CHECK(high.ib_layers == 29);
  CHECK(high.roce_layers == 1);
  REQUIRE(high.warning.has_value());
  CHECK(high.warning->find(kClampedAlpha) != std::string::npos);
  const auto low = two_nic_split(30, 197, 160, 0.01);
  CHECK(low.ib_layers == 1);
  CHECK(low.warning.has_value());
}

TEST_CASE("two NIC split monotonicity and symmetry grids") {
  for (int l = 2; l <= 40; ++l) {
    for (int s = 1; s <= 40; ++s) {
      int prev = 0;
      for (int a = 50; a <= 150; a += 5) {
        const int n = two_nic_split(l, 20, s, a / 100.0).ib_layers;
        CHECK(n >= prev);
        CHECK(n >= 1);
        CHECK(n <= l - 1);
        prev = n;
      }
      int prev_speed = 0;
      for (int sib = 1; sib <= 40; ++sib) {
        const int n = two_nic_split(l, sib, s, 1.0).ib_layers;
        CHECK(n >= prev_speed);
        prev_speed = n;
      }
    }
    if (l % 2 == 0) {
      const auto r = two_nic_split(l, 100, 100, 1.0);
      CHECK(std::vector<int>{r.ib_layers, r.roce_layers} == uniform_partition(l, 2));
    }
  }
}

TEST_CASE("multi cluster allocation") {
  const std::vector<double> speeds{197, 160, 122};
  const std::vector<double> ones{1, 1, 1};
  const std::vector<double> big{1e9, 1e9, 1e9};
  CHECK(multi_cluster_alloc(36, speeds, ones, 0.0, big).layers == std::vector<int>{14, 12, 10});
  const std::vector<double> one_speed{197};
  const std::vector<double> one_alpha{1};
  const std::vector<double> one_mem{1e9};
  CHECK(multi_cluster_alloc(36, one_speed, one_alpha, 0.0, one_mem).layers ==
        std::vector<int>{36});
  const std::vector<double> thirty{30, 30, 30};
  CHECK(multi_cluster_alloc(36, speeds, ones, 2.0, thirty).layers ==
        std::vector<int>{14, 12, 10});
}

TEST_CASE("multi cluster errors") {
  const std::vector<double> speeds{197, 160, 122};
  const std::vector<double> ones{1, 1, 1};
  const std::vector<double> tight{25, 30, 30};
  CHECK(code_of([&] { multi_cluster_alloc(36, speeds, ones, 2.0, tight); }) ==
        ErrorCode::kMemoryExceeded);
  const std::vector<double> greedy{2.0, 2.0, 1};
  const std::vector<double> big{1e9, 1e9, 1e9};
  CHECK(code_of([&] { multi_cluster_alloc(36, speeds, greedy, 0.0, big); }) ==
        ErrorCode::kInfeasibleAlpha);
}

TEST_CASE("multi cluster conservation on random inputs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = std::uniform_int_distribution<int>(1, 5)(rng);
    const int l = std::uniform_int_distribution<int>(m, 96)(rng);
    std::vector<double> speeds, alphas, mem(static_cast<std::size_t>(m), 1e9);
    for (int i = 0; i < m; ++i) {
      speeds.push_back(std::uniform_real_distribution<double>(50, 300)(rng));
      alphas.push_back(1.0);
    }
    const auto r = multi_cluster_alloc(l, speeds, alphas, 0.0, mem);
    CHECK(std::accumulate(r.layers.begin(), r.layers.end(), 0) == l);
    for (int n : r.layers) CHECK(n >= 1);
  }
}

TEST_CASE("stages from cluster allocation") {
  const auto topo = two_cluster_topo();
  const ParallelConfig cfg{2, 4, 2};
  CHECK(stages_per_cluster(cfg, topo) == std::vector<int>{2, 2});
  const std::vector<int> skewed{4, 2};
  CHECK(stages_from_cluster_alloc(skewed, cfg, topo).stage_layers ==
        std::vector<int>{2, 2, 1, 1});
  const std::vector<int> even{3, 3};
  const auto plan = stages_from_cluster_alloc(even, cfg, topo);
  CHECK(plan.stage_layers == std::vector<int>{2, 1, 2, 1});
  CHECK(plan.cluster_layers == even);
  const auto single = make_topo({4}, {NicKind::kInfiniBand}, 8);
  const std::vector<int> all{30};
  CHECK(stages_from_cluster_alloc(all, {1, 2, 16}, single).stage_layers ==
        std::vector<int>{15, 15});
  const std::vector<int> starved{5, 1};
  CHECK(code_of([&] { stages_from_cluster_alloc(starved, cfg, topo); }) ==
        ErrorCode::kInfeasiblePartition);
}

TEST_CASE("strategy names") {
  CHECK(to_string(PartitionStrategy::kUniform) == "uniform");
  CHECK(partition_strategy_from_string("self_adapting") == PartitionStrategy::kSelfAdapting);
  CHECK_FALSE(partition_strategy_from_string("greedy").has_value());
}
