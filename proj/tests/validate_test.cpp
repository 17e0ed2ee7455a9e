#include <gtest/gtest.h>

#include "ctr3/validate.hpp"
#include "support.hpp"

namespace ctr3 {
namespace {

Solution two_routes(const Instance& inst) {
  std::vector<Route> routes;
  for (std::vector<int> seq : {std::vector<int>{1}, std::vector<int>{2, 3, 4}}) {
    Route r;
    r.sequence = seq;
    r.cost = testing::ref_tour(inst, seq);
    r.load = testing::block_load(inst, seq);
    routes.push_back(r);
  }
  return make_solution(routes);
}

size_t count_kind(const std::vector<Violation>& v, ViolationKind k) {
  return static_cast<size_t>(
      std::count_if(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; }));
}

TEST(ValidateSolution, FeasibleIsClean) {
  const Instance inst = testing::four_customer_instance();
  EXPECT_TRUE(validate_solution(inst, two_routes(inst)).empty());
}

TEST(ValidateSolution, DuplicateCustomer) {
  const Instance inst = testing::four_customer_instance();
  Solution sol = two_routes(inst);
  sol.routes[0].sequence = {1, 2};
  sol.routes[0].cost = testing::ref_tour(inst, sol.routes[0].sequence);
  sol.routes[0].load = 7;
  sol.total_cost = sol.routes[0].cost + sol.routes[1].cost;
  const auto v = validate_solution(inst, sol);
  ASSERT_EQ(v.size(), 1u) << describe(v);
  EXPECT_EQ(v[0].kind, ViolationKind::kDuplicatedCustomer);
  EXPECT_EQ(v[0].id, 2);
}

TEST(ValidateSolution, CostOffByOne) {
  const Instance inst = testing::four_customer_instance();
  Solution sol = two_routes(inst);
  sol.total_cost += 1.0;
  const auto v = validate_solution(inst, sol);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::kCostMismatch);
  EXPECT_NEAR(v[0].magnitude, 1.0, 1e-12);
}

TEST(ValidateSolution, MissingCustomer) {
  const Instance inst = testing::four_customer_instance();
  Solution sol = two_routes(inst);
  sol.routes[1].sequence = {2, 3};
  sol.routes[1].cost = testing::ref_tour(inst, sol.routes[1].sequence);
  sol.routes[1].load = 2;
  sol.total_cost = sol.routes[0].cost + sol.routes[1].cost;
  const auto v = validate_solution(inst, sol);
  ASSERT_EQ(v.size(), 1u) << describe(v);
  EXPECT_EQ(v[0].kind, ViolationKind::kMissingCustomer);
  EXPECT_EQ(v[0].id, 4);
}

TEST(ValidateSolution, OverCapacity) {
  const Instance inst = testing::four_customer_instance();
  Route r;
  r.sequence = {1, 2, 3, 4};
  r.cost = testing::ref_tour(inst, r.sequence);
  r.load = 16;
  const auto v = validate_solution(inst, make_solution({r}));
  EXPECT_EQ(count_kind(v, ViolationKind::kCapacityExceeded), 1u);
}

TEST(ValidateSolution, EmptyRouteAndBadIds) {
  const Instance inst = testing::four_customer_instance();
  Solution sol = two_routes(inst);
  sol.routes.push_back(Route{});
  EXPECT_EQ(count_kind(validate_solution(inst, sol), ViolationKind::kBadDepotAnchor), 1u);
  sol = two_routes(inst);
  sol.routes[0].sequence = {0};
  EXPECT_GE(count_kind(validate_solution(inst, sol), ViolationKind::kBadDepotAnchor), 1u);
}

TEST(ValidateSolution, RoundedPolicyNeedsExactCost) {
  const Instance inst = testing::four_customer_instance().with_policy(
      DistancePolicy::kRoundedEuclidean);
  Solution sol = two_routes(inst);
  EXPECT_TRUE(validate_solution(inst, sol).empty());
  sol.routes[0].cost += 1e-7;
  sol.total_cost += 1e-7;
  EXPECT_FALSE(validate_solution(inst, sol).empty());
}

TEST(ValidateClusters, Clean) {
  const Instance inst = testing::four_customer_instance();
  const auto cs = make_cluster_solution(inst, {{1, 2}, {3, 4}}, false);
  EXPECT_TRUE(validate_clusters(inst, cs).empty());
  const auto with_depot = make_cluster_solution(inst, {{1, 2}, {3, 4}}, true);
  EXPECT_TRUE(validate_clusters(inst, with_depot).empty());
}

TEST(ValidateClusters, Hole) {
  const Instance inst = testing::four_customer_instance();
  auto cs = make_cluster_solution(inst, {{1, 2}, {3}}, false);
  const auto v = validate_clusters(inst, cs);
  EXPECT_EQ(count_kind(v, ViolationKind::kMissingCustomer), 1u) << describe(v);
}

TEST(ValidateClusters, Overfull) {
  const Instance inst = testing::four_customer_instance();
  const auto cs = make_cluster_solution(inst, {{1, 4}, {2, 3}}, false);
  const auto v = validate_clusters(inst, cs);
  EXPECT_EQ(count_kind(v, ViolationKind::kCapacityExceeded), 1u) << describe(v);
}

TEST(ValidateClusters, StaleCentroid) {
  const Instance inst = testing::four_customer_instance();
  auto cs = make_cluster_solution(inst, {{1, 2}, {3, 4}}, false);
  cs.centroids[0].x += 0.5;
  const auto v = validate_clusters(inst, cs);
  EXPECT_GE(count_kind(v, ViolationKind::kCostMismatch), 1u);
}

TEST(ValidateClusters, StaleWithinss) {
  const Instance inst = testing::four_customer_instance();
  auto cs = make_cluster_solution(inst, {{1, 2}, {3, 4}}, false);
  cs.withinss += 0.25;
  const auto v = validate_clusters(inst, cs);
  ASSERT_EQ(v.size(), 1u) << describe(v);
  EXPECT_EQ(v[0].kind, ViolationKind::kCostMismatch);
}

TEST(Describe, NamesKind) {
  const Instance inst = testing::four_customer_instance();
  Solution sol = two_routes(inst);
  sol.total_cost += 2;
  EXPECT_NE(describe(validate_solution(inst, sol)).find("cost-mismatch"),
            std::string::npos);
}

}  // namespace
}  // namespace ctr3
