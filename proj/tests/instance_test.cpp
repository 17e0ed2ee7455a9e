#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ctr3/instance.hpp"
#include "support.hpp"

namespace ctr3 {
namespace {

const std::filesystem::path kData = CTR3_TEST_DATA_DIR;

constexpr const char* kTiny = R"(NAME : tiny-n2-k1
TYPE : CVRP
DIMENSION : 2
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 3 4
DEMAND_SECTION
1 0
2 0
DEPOT_SECTION
1
-1
EOF
)";

TEST(Parse, ReadsE22) {
  const Instance inst = load_cvrplib(kData / "instances/E-n22-k4.vrp");
  EXPECT_EQ(inst.name(), "E-n22-k4");
  EXPECT_EQ(inst.num_customers(), 21);
  EXPECT_EQ(inst.capacity(), 6000.0);
  EXPECT_EQ(inst.optimal_k(), 4);
  EXPECT_EQ(inst.distance_policy(), DistancePolicy::kRoundedEuclidean);
  EXPECT_EQ(inst.depot().demand, 0.0);
}

TEST(Parse, MinimalOneCustomer) {
  const Instance inst = parse_cvrplib(kTiny);
  EXPECT_EQ(inst.num_customers(), 1);
  EXPECT_EQ(inst.node(1).demand, 0.0);
  EXPECT_EQ(inst.optimal_k(), 1);
}

TEST(Parse, DemandAboveCapacityRejected) {
  std::string text = kTiny;
  text.replace(text.find("2 0\nDEPOT"), 3, "2 11");
  EXPECT_THROW(parse_cvrplib(text), InstanceError);
  try {
    parse_cvrplib(text);
  } catch (const ParseError&) {
    ADD_FAILURE() << "infeasible demand reported as a syntax error";
  } catch (const InstanceError&) {
  }
}

TEST(Parse, MissingSectionIsParseError) {
  std::string text = kTiny;
  text.erase(text.find("DEMAND_SECTION"));
  EXPECT_THROW(parse_cvrplib(text), ParseError);
}

TEST(Parse, RoundTripsEveryShippedInstance) {
  for (const auto& entry : std::filesystem::directory_iterator(kData / "instances")) {
    const Instance a = load_cvrplib(entry.path());
    const Instance b = parse_cvrplib(write_cvrplib(a));
    EXPECT_EQ(a, b) << entry.path();
  }
}

TEST(Parse, OptimalKFromName) {
  EXPECT_EQ(optimal_k_from_name("A-n32-k5"), 5);
  EXPECT_EQ(optimal_k_from_name("P-n101-k4"), 4);
  EXPECT_FALSE(optimal_k_from_name("nameless"));
}

TEST(Parse, SolutionFileSkipsComments) {
  const auto sol = parse_cvrplib_solution(
      "Route #1: 1 2\nRoute #2: 3\nCost 12\n# Route #1 load 4 / 10\n");
  ASSERT_EQ(sol.routes.size(), 2u);
  EXPECT_EQ(sol.routes[0], (std::vector<int>{1, 2}));
  EXPECT_EQ(sol.cost, 12.0);
}

TEST(Distance, ExactTriangle) {
  Customer a{0, 0, 0, 0}, b{1, 3, 4, 0};
  EXPECT_DOUBLE_EQ(node_distance(a, b, DistancePolicy::kExactEuclidean), 5.0);
}

TEST(Distance, RoundedDiagonal) {
  Customer a{0, 0, 0, 0}, b{1, 1, 1, 0};
  EXPECT_EQ(node_distance(a, b, DistancePolicy::kRoundedEuclidean), 1.0);
}

TEST(Distance, FourCustomerPair) {
  const Instance inst = testing::four_customer_instance();
  const DistanceMatrix dm(inst);
  EXPECT_NEAR(dm(1, 4), std::sqrt(17.0), 1e-12);
  EXPECT_NEAR(dm(1, 4), 4.1231, 1e-4);
}

TEST(Distance, MatrixIsSymmetricWithZeroDiagonal) {
  const Instance inst = load_cvrplib(kData / "instances/P-n20-k2.vrp");
  const DistanceMatrix dm(inst);
  for (int i = 0; i < inst.num_nodes(); ++i) {
    EXPECT_EQ(dm(i, i), 0.0);
    for (int j = 0; j < inst.num_nodes(); ++j) {
      EXPECT_EQ(dm(i, j), dm(j, i));
      EXPECT_EQ(dm(i, j), testing::ref_distance(inst, i, j));
    }
  }
}

TEST(Distance, NintRoundsHalfUp) {
  EXPECT_EQ(tsplib_nint(2.5), 3.0);
  EXPECT_EQ(tsplib_nint(2.49), 2.0);
}

TEST(Generator, RangesHold) {
  const Instance inst = generate_small_instance(5, 123);
  EXPECT_EQ(inst.num_customers(), 5);
  EXPECT_EQ(inst.capacity(), 10.0);
  EXPECT_EQ(inst.depot().demand, 0.0);
  for (const auto& c : inst.nodes()) {
    EXPECT_GE(c.x, 0.0);
    EXPECT_LE(c.x, 10.0);
    EXPECT_GE(c.y, 0.0);
    EXPECT_LE(c.y, 10.0);
    EXPECT_LE(c.demand, 10.0);
  }
}

TEST(Generator, SameSeedSameInstance) {
  EXPECT_EQ(generate_small_instance(6, 99), generate_small_instance(6, 99));
  EXPECT_NE(generate_small_instance(6, 99), generate_small_instance(6, 100));
}

TEST(Generator, DemandMeanNearFive) {
  double sum = 0.0;
  int count = 0;
  for (int s = 0; s < 500; ++s) {
    const Instance inst = generate_small_instance(7, static_cast<std::uint64_t>(s));
    for (int i = 1; i <= inst.num_customers(); ++i) {
      sum += inst.node(i).demand;
      ++count;
    }
  }
  const double mean = sum / count;
  EXPECT_GE(mean, 4.0);
  EXPECT_LE(mean, 6.0);
}

TEST(Generator, RejectsOutOfRange) {
  EXPECT_THROW(generate_small_instance(0, 1), std::invalid_argument);
  EXPECT_THROW(generate_small_instance(11, 1), std::invalid_argument);
}

TEST(Create, RejectsBadInput) {
  std::vector<Customer> nodes = {{0, 0, 0, 0}, {1, 1, 1, 3}};
  EXPECT_THROW(Instance::create("x", nodes, 0.0, DistancePolicy::kExactEuclidean),
               InstanceError);
  nodes[1].id = 2;
  EXPECT_THROW(Instance::create("x", nodes, 5.0, DistancePolicy::kExactEuclidean),
               InstanceError);
  nodes[1].id = 1;
  nodes[0].demand = 1;
  EXPECT_THROW(Instance::create("x", nodes, 5.0, DistancePolicy::kExactEuclidean),
               InstanceError);
}

}  // namespace
}  // namespace ctr3
