#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ctr3/ccbc.hpp"
#include "ctr3/oracles.hpp"
#include "ctr3/validate.hpp"
#include "support.hpp"

namespace ctr3 {
namespace {

Instance with_demands(std::vector<double> demands, double capacity) {
  std::vector<Customer> nodes = {{0, 0, 0, 0}};
  for (size_t i = 0; i < demands.size(); ++i) {
    nodes.push_back({static_cast<int>(i + 1), static_cast<double>(i), 1.0, demands[i]});
  }
  return Instance::create("d", std::move(nodes), capacity,
                          DistancePolicy::kExactEuclidean);
}

using Clusters = std::vector<std::vector<int>>;

Clusters sorted_clusters(const ClusterSolution& cs) {
  Clusters c = cs.clusters;
  for (auto& b : c) std::sort(b.begin(), b.end());
  std::sort(c.begin(), c.end());
  return c;
}

TEST(LowerBoundK, Examples) {
  EXPECT_EQ(lower_bound_k(with_demands({6, 1, 1, 8}, 10)), 2);
  EXPECT_EQ(lower_bound_k(with_demands({10}, 10)), 1);
  EXPECT_EQ(lower_bound_k(with_demands({1, 1, 1, 1, 1, 1, 1}, 3)), 3);
  EXPECT_EQ(lower_bound_k(with_demands({0, 0}, 3)), 1);
}

TEST(AssignmentMetric, Examples) {
  EXPECT_DOUBLE_EQ(assignment_metric({1, 2, 0, 6}, {0, 0}), 3.0);
  EXPECT_DOUBLE_EQ(assignment_metric({1, 2, 0, 0}, {0, 0}), 0.0);
  EXPECT_EQ(assignment_metric({1, 2, 0, 4}, {2, 0}),
            std::numeric_limits<double>::infinity());
}

TEST(SingleStart, FavorableInitGivesPairs) {
  const Instance inst = testing::four_customer_instance();
  CcbcConfig cfg;
  const CentroidSet init = {{2.5, 3.0}, {1.5, 6.0}};
  const auto cs = ccbc_single_start(inst, 2, init, cfg);
  ASSERT_TRUE(cs);
  EXPECT_EQ(sorted_clusters(*cs), (Clusters{{1, 2}, {3, 4}}));
  EXPECT_TRUE(validate_clusters(inst, *cs).empty());
}

TEST(SingleStart, SingletonsHaveZeroWithinss) {
  const Instance inst = testing::four_customer_instance();
  CcbcConfig cfg;
  CentroidSet init;
  for (int i = 1; i <= 4; ++i) init.push_back({inst.node(i).x, inst.node(i).y});
  const auto cs = ccbc_single_start(inst, 4, init, cfg);
  ASSERT_TRUE(cs);
  EXPECT_EQ(cs->withinss, 0.0);
  EXPECT_EQ(cs->k(), 4);
}

TEST(SingleStart, NeverBeatsExactClustering) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance inst = generate_small_instance(6, seed);
    const int k = 2;
    ExactCcbcResult exact;
    try {
      exact = exact_ccbc(inst, k, false);
    } catch (const OracleInfeasible&) {
      continue;
    }
    CcbcConfig cfg;
    cfg.seed = seed;
    for (int s = 0; s < 10; ++s) {
      const auto cs = ccbc_single_start(inst, k, initial_centroids(inst, k, cfg, s), cfg);
      if (!cs) continue;
      EXPECT_GE(cs->withinss, exact.value - 1e-9) << "seed " << seed;
      EXPECT_TRUE(validate_clusters(inst, *cs).empty());
    }
  }
}

TEST(Multistart, ForcedSingletons) {
  // Every customer fills a vehicle, so only K = N works.
  const Instance inst = with_demands({5, 5, 5}, 5);
  CcbcConfig cfg;
  cfg.n_starts = 1;
  const auto ms = ccbc_multistart(inst, cfg);
  EXPECT_EQ(ms.k, 3);
  ASSERT_FALSE(ms.solutions.empty());
  EXPECT_EQ(sorted_clusters(ms.solutions.front()), (Clusters{{1}, {2}, {3}}));
}

TEST(Multistart, ReachesOptimumAndRunnerUp) {
  const Instance inst = testing::four_customer_instance();
  CcbcConfig cfg;
  cfg.n_starts = 50;
  cfg.seed = 1;
  const auto ms = ccbc_multistart(inst, cfg);
  EXPECT_EQ(ms.k, 2);
  bool pairs = false, three_one = false;
  for (const auto& cs : ms.solutions) {
    const auto c = sorted_clusters(cs);
    pairs |= c == Clusters{{1, 2}, {3, 4}};
    three_one |= c == Clusters{{1, 2, 3}, {4}};
    EXPECT_TRUE(validate_clusters(inst, cs).empty());
  }
  EXPECT_TRUE(pairs);
  EXPECT_TRUE(three_one);
}

TEST(Multistart, Deterministic) {
  const Instance inst = generate_small_instance(9, 5);
  CcbcConfig cfg;
  cfg.n_starts = 20;
  cfg.seed = 3;
  const auto a = ccbc_multistart(inst, cfg);
  cfg.threads = 3;
  const auto b = ccbc_multistart(inst, cfg);
  ASSERT_EQ(a.solutions.size(), b.solutions.size());
  EXPECT_EQ(a.start_indices, b.start_indices);
  for (size_t i = 0; i < a.solutions.size(); ++i) {
    EXPECT_EQ(a.solutions[i].assignment, b.solutions[i].assignment);
    EXPECT_EQ(a.solutions[i].withinss, b.solutions[i].withinss);
  }
}

TEST(Multistart, BestWithinssNonIncreasingInStarts) {
  const Instance inst = generate_small_instance(10, 17);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 2, 5, 10, 20, 40}) {
    CcbcConfig cfg;
    cfg.n_starts = n;
    cfg.seed = 4;
    const auto ms = ccbc_multistart(inst, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cs : ms.solutions) best = std::min(best, cs.withinss);
    EXPECT_LE(best, prev) << n;
    prev = best;
  }
}

TEST(Multistart, EveryInitializerAndMetricFeasible) {
  const Instance inst = generate_small_instance(10, 8);
  for (auto init : {Initializer::kRandomMultistart, Initializer::kKmeansPlusPlus,
                    Initializer::kNaiveSharding}) {
    for (auto metric : {AssignmentMetric::kCustomized, AssignmentMetric::kClassical}) {
      CcbcConfig cfg;
      cfg.initializer = init;
      cfg.metric = metric;
      cfg.n_starts = 5;
      const auto ms = ccbc_multistart(inst, cfg);
      ASSERT_FALSE(ms.solutions.empty());
      for (const auto& cs : ms.solutions) {
        EXPECT_TRUE(validate_clusters(inst, cs).empty())
            << to_string(init) << " " << to_string(metric);
      }
    }
  }
}

TEST(Parsing, NamesRoundTrip) {
  for (auto i : {Initializer::kRandomMultistart, Initializer::kKmeansPlusPlus,
                 Initializer::kNaiveSharding}) {
    EXPECT_EQ(parse_initializer(to_string(i)), i);
  }
  for (auto m : {AssignmentMetric::kCustomized, AssignmentMetric::kClassical}) {
    EXPECT_EQ(parse_metric(to_string(m)), m);
  }
  EXPECT_FALSE(parse_metric("other"));
}

TEST(Withinss, MatchesReference) {
  const Instance inst = testing::four_customer_instance();
  const Clusters c = {{1, 2}, {3, 4}};
  EXPECT_NEAR(partition_withinss(inst, c, false), 3.0, 1e-12);
  EXPECT_NEAR(partition_withinss(inst, c, true), 24.0, 1e-12);
  EXPECT_NEAR(partition_withinss(inst, {{1}, {2, 3, 4}}, true), 25.25, 1e-12);
}

}  // namespace
}  // namespace ctr3
