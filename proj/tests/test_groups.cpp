#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "holmes/error.hpp"
#include "holmes/groups.hpp"
#include "support.hpp"

using namespace holmes;
using holmes::testing::two_cluster_topo;
using holmes::testing::make_topo;

using Rows = std::vector<std::vector<int>>;

namespace {

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

// Every rank 1..n exactly once.
bool is_partition(const Rows& rows, int n) {
  std::vector<int> seen(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& row : rows) {
    for (int r : row) {
      if (r < 1 || r > n || seen[static_cast<std::size_t>(r)]++) return false;
    }
  }
  return std::count(seen.begin() + 1, seen.end(), 1) == n;
}

}  // namespace

TEST_CASE("N=8 matrices") {
  const auto topo = make_topo({2}, {NicKind::kInfiniBand}, 4);
  const ParallelConfig cfg{2, 2, 2};
  REQUIRE(validate(cfg, topo).empty());
  CHECK(build_tp(cfg, topo).rows == Rows{{1, 2}, {3, 4}, {5, 6}, {7, 8}});
  CHECK(build_pp(cfg, topo).rows == Rows{{1, 5}, {2, 6}, {3, 7}, {4, 8}});
  CHECK(build_dp(cfg, topo).rows == Rows{{1, 3}, {2, 4}, {5, 7}, {6, 8}});
}

TEST_CASE("two-cluster first rows") {
  const auto topo = two_cluster_topo();
  const ParallelConfig cfg{2, 4, 2};
  REQUIRE(validate(cfg, topo).empty());
  const GroupPlan plan = build_plan(cfg, topo);
  CHECK(plan.tp.rows.front() == std::vector<int>{1, 2});
  CHECK(plan.pp.rows.front() == std::vector<int>{1, 5, 9, 13});
  CHECK(plan.dp.rows.front() == std::vector<int>{1, 3});
  CHECK(plan.tp.rows.size() == 8);
  CHECK(plan.pp.rows.size() == 4);
  CHECK(plan.dp.rows.size() == 8);
}

TEST_CASE("degenerate degrees give singleton rows") {
  const auto topo = make_topo({2}, {NicKind::kRoCE}, 4);
  const GroupPlan a = build_plan({1, 4, 2}, topo);
  CHECK(a.tp.rows.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(a.tp.rows[i] == std::vector<int>{int(i) + 1});
  const GroupPlan b = build_plan({2, 1, 4}, topo);
  CHECK(b.pp.rows.size() == 8);
  for (const auto& row : b.pp.rows) CHECK(row.size() == 1);
  const GroupPlan c = build_plan({2, 4, 1}, topo);
  CHECK(c.dp.rows.size() == 8);
  for (const auto& row : c.dp.rows) CHECK(row.size() == 1);
}

TEST_CASE("validate examples") {
  CHECK(validate({2, 4, 2}, two_cluster_topo()).empty());
  const auto uneven = make_topo({1, 3}, {NicKind::kInfiniBand, NicKind::kRoCE}, 4);
  CHECK(has_code(validate({2, 2, 4}, uneven), diag::kStageStraddlesCluster));
  const auto eight = make_topo({2}, {NicKind::kInfiniBand}, 4);
  CHECK(has_code(validate({2, 2, 3}, eight), diag::kDegreeProduct));
  CHECK(has_code(validate({8, 1, 1}, eight), diag::kTensorExceedsNode));
  CHECK(has_code(validate({0, 8, 1}, eight), diag::kNonPositiveDegree));
  const auto six = make_topo({2}, {NicKind::kInfiniBand}, 6);
  CHECK(has_code(validate({4, 3, 1}, six), diag::kTensorStraddlesNode));
}

TEST_CASE("builders refuse infeasible tensor degree") {
  const auto topo = make_topo({2}, {NicKind::kInfiniBand}, 4);
  CHECK_THROWS_AS(build_tp({8, 1, 1}, topo), Error);
}

TEST_CASE("brute-force oracle over all factorizations") {
  int checked = 0;
  for (int n : {4, 8, 16, 32, 64}) {
    for (int t = 1; t <= n; ++t) {
      if (n % t) continue;
      for (int p = 1; p <= n / t; ++p) {
        if ((n / t) % p) continue;
        const int d = n / t / p;
        for (int g : {1, 2, 4, 8}) {
          if (g < t || g % t || n % g) continue;
          // One cluster, plus a two-cluster split of the stages when it lands on node
          // boundaries.
          std::vector<std::vector<int>> layouts = {{n / g}};
          for (int s1 = 1; s1 < p; ++s1) {
            const int dev1 = s1 * t * d;
            if (dev1 % g == 0) layouts.push_back({dev1 / g, (n - dev1) / g});
          }
          for (const auto& nodes : layouts) {
            std::vector<NicKind> kinds;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
              kinds.push_back(i % 2 ? NicKind::kRoCE : NicKind::kInfiniBand);
            }
            const auto topo = make_topo(nodes, kinds, g);
            const ParallelConfig cfg{t, p, d};
            REQUIRE_MESSAGE(validate(cfg, topo).empty(), "n=" << n << " t=" << t << " p=" << p);
            const GroupPlan plan = build_plan(cfg, topo);
            CHECK(is_partition(plan.tp.rows, n));
            CHECK(is_partition(plan.pp.rows, n));
            CHECK(is_partition(plan.dp.rows, n));
            CHECK(plan.tp.rows.size() == std::size_t(p * d));
            CHECK(plan.pp.rows.size() == std::size_t(t * d));
            CHECK(plan.dp.rows.size() == std::size_t(p * t));
            for (const auto& row : plan.tp.rows) {
              CHECK(row.size() == std::size_t(t));
              for (int r : row) CHECK((r - 1) / g == (row.front() - 1) / g);
            }
            for (const auto& row : plan.pp.rows) {
              CHECK(row.size() == std::size_t(p));
              for (int j = 0; j < p; ++j) CHECK((row[j] - 1) / (t * d) == j);
            }
            for (std::size_t i = 0; i < plan.dp.rows.size(); ++i) {
              const auto& row = plan.dp.rows[i];
              CHECK(row.size() == std::size_t(d));
              const int stage = static_cast<int>(i) / t;
              std::set<NicKind> row_kinds;
              for (int r : row) {
                CHECK((r - 1) / (t * d) == stage);
                // Owning cluster by prefix sums of device counts.
                int acc = 0;
                std::size_t c = 0;
                while (r > acc + nodes[c] * g) acc += nodes[c++] * g;
                row_kinds.insert(kinds[c]);
              }
              CHECK(row_kinds.size() == 1);
            }
            CHECK(check_plan(plan, cfg, topo).empty());
            ++checked;
          }
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("validate agrees with block arithmetic on random layouts") {
  // Enumerate small two-cluster layouts and compare against the direct rule.
  for (int g : {2, 4}) {
    for (int f1 = 1; f1 <= 4; ++f1) {
      for (int f2 = 1; f2 <= 4; ++f2) {
        const auto topo = make_topo({f1, f2}, {NicKind::kInfiniBand, NicKind::kRoCE}, g);
        const int n = (f1 + f2) * g;
        for (int t = 1; t <= g; ++t) {
          if (g % t) continue;
          for (int p = 1; p <= n / t; ++p) {
            if ((n / t) % p) continue;
            const int d = n / t / p;
            const bool ok = (f1 * g) % (t * d) == 0 && (f2 * g) % (t * d) == 0;
            CHECK(validate({t, p, d}, topo).empty() == ok);
          }
        }
      }
    }
  }
}

TEST_CASE("check_plan catches tampering") {
  const auto topo = two_cluster_topo();
  const ParallelConfig cfg{2, 4, 2};
  GroupPlan plan = build_plan(cfg, topo);
  std::swap(plan.dp.rows[0][1], plan.dp.rows[1][1]);
  CHECK_FALSE(check_plan(plan, cfg, topo).empty());
  GroupPlan short_plan = build_plan(cfg, topo);
  short_plan.pp.rows.pop_back();
  CHECK_FALSE(check_plan(short_plan, cfg, topo).empty());
}

TEST_CASE("stage_of_rank") {
  CHECK(stage_of_rank({2, 4, 2}, 1) == 1);
  CHECK(stage_of_rank({2, 4, 2}, 4) == 1);
  CHECK(stage_of_rank({2, 4, 2}, 5) == 2);
  CHECK(stage_of_rank({2, 4, 2}, 16) == 4);
}

TEST_CASE("builders are deterministic") {
  const auto topo = two_cluster_topo();
  CHECK(build_plan({2, 4, 2}, topo) == build_plan({2, 4, 2}, topo));
}
