#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "holmes/error.hpp"
#include "holmes/topology.hpp"
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

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("rank_of examples") {
  const auto topo = two_cluster_topo();
  CHECK(rank_of(topo, {1, 1, 1}) == 1);
  CHECK(rank_of(topo, {2, 1, 1}) == 9);
  CHECK(rank_of(topo, {1, 2, 4}) == 8);
  CHECK(rank_of(topo, {2, 2, 4}) == 16);
  const auto single = make_topo({5}, {NicKind::kInfiniBand}, 8);
  CHECK(rank_of(single, {1, 1, 1}) == 1);
}

TEST_CASE("coord_of examples") {
  const auto topo = two_cluster_topo();
  CHECK(coord_of(topo, 1) == DeviceCoord{1, 1, 1});
  CHECK(coord_of(topo, 9) == DeviceCoord{2, 1, 1});
  CHECK(coord_of(topo, 16) == DeviceCoord{2, 2, 4});
}

TEST_CASE("out of range coordinates name the field") {
  const auto topo = two_cluster_topo();
  CHECK(code_of([&] { rank_of(topo, {3, 1, 1}); }) == ErrorCode::kInvalidCoordinate);
  CHECK(message_of([&] { rank_of(topo, {3, 1, 1}); }).find("cluster") != std::string::npos);
  CHECK(message_of([&] { rank_of(topo, {1, 3, 1}); }).find("node") != std::string::npos);
  CHECK(message_of([&] { rank_of(topo, {1, 1, 0}); }).find("gpu") != std::string::npos);
  CHECK(code_of([&] { coord_of(topo, 0); }) == ErrorCode::kInvalidRank);
  CHECK(code_of([&] { coord_of(topo, 17); }) == ErrorCode::kInvalidRank);
  CHECK(code_of([&] { nic_of_rank(topo, 17); }) == ErrorCode::kInvalidRank);
}

TEST_CASE("nic_of_rank follows the owning cluster") {
  const auto topo = two_cluster_topo();
  CHECK(nic_of_rank(topo, 1).kind == NicKind::kInfiniBand);
  CHECK(nic_of_rank(topo, 8).kind == NicKind::kInfiniBand);
  CHECK(nic_of_rank(topo, 9).kind == NicKind::kRoCE);
  const auto eth = make_topo({1}, {NicKind::kEthernet}, 4);
  CHECK(nic_of_rank(eth, 1).kind == NicKind::kEthernet);
}

TEST_CASE("exhaustive round trip, contiguity and node locality") {
  const std::vector<std::vector<int>> layouts = {{1}, {2, 2}, {1, 3}, {3, 1, 2}, {4, 4, 4, 4}};
  for (int g : {1, 2, 4, 8}) {
    for (const auto& nodes : layouts) {
      std::vector<NicKind> kinds(nodes.size(), NicKind::kRoCE);
      const auto topo = make_topo(nodes, kinds, g);
      int prefix = 0;
      for (std::size_t c = 0; c < nodes.size(); ++c) {
        const int lo = g * prefix + 1;
        prefix += nodes[c];
        const int hi = g * prefix;
        CHECK(topo.first_rank(static_cast<int>(c) + 1) == lo);
        for (int r = lo; r <= hi; ++r) CHECK(coord_of(topo, r).cluster == static_cast<int>(c) + 1);
      }
      for (int r = 1; r <= topo.device_count(); ++r) {
        const DeviceCoord c = coord_of(topo, r);
        REQUIRE(rank_of(topo, c) == r);
        CHECK(topo.node_ordinal(r) == (r - 1) / g + 1);
        CHECK(c.gpu == (r - 1) % g + 1);
      }
    }
  }
}

TEST_CASE("round trip holds up to 1024 devices") {
  const auto topo = make_topo({16, 48, 64}, {NicKind::kInfiniBand, NicKind::kRoCE,
                                             NicKind::kEthernet}, 8);
  REQUIRE(topo.device_count() == 1024);
  for (int r = 1; r <= 1024; ++r) REQUIRE(rank_of(topo, coord_of(topo, r)) == r);
}

TEST_CASE("constructor rejects bad topologies") {
  CHECK(code_of([] { make_topo({}, {}, 4); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] { make_topo({0}, {NicKind::kRoCE}, 4); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] { make_topo({1}, {NicKind::kRoCE}, 0); }) == ErrorCode::kInvalidTopology);
  CHECK(code_of([] {
          ClusterTopology({{1, 1, testing::nic(NicKind::kRoCE), 312, 80}}, 4,
                          testing::nic(NicKind::kInfiniBand), 2400, false);
        }) == ErrorCode::kInvalidTopology);
}

TEST_CASE("nic kind names") {
  CHECK(nic_kind_from_string("infiniband") == NicKind::kInfiniBand);
  CHECK(nic_kind_from_string("ib") == NicKind::kInfiniBand);
  CHECK(nic_kind_from_string("roce") == NicKind::kRoCE);
  CHECK(nic_kind_from_string("ethernet") == NicKind::kEthernet);
  CHECK_FALSE(nic_kind_from_string("token-ring").has_value());
  CHECK(default_latency(NicKind::kRoCE) == doctest::Approx(5e-6));
  CHECK(default_latency(NicKind::kEthernet) == doctest::Approx(30e-6));
}
