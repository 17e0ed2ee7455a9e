#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/routing.hpp"

namespace ctr3 {

inline constexpr int kOracleMaxCustomers = 10;

template <class Witness>
struct ExactResult {
  double value = 0.0;
  Witness witness;
  /// Number of complete feasible partitions evaluated.
  std::uint64_t enumerated = 0;
};

using ExactCvrpResult = ExactResult<Solution>;
using ExactCcbcResult = ExactResult<ClusterSolution>;

class OracleInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block of customers as a bitmask: bit i set for customer i (i >= 1).
using BlockMask = std::uint32_t;

std::vector<int> mask_customers(BlockMask mask);

/// Visits every partition of the customers into capacity-feasible blocks, in
/// restricted-growth order (blocks numbered by their smallest customer). When
/// `k` is set only partitions with exactly k blocks are visited.
void for_each_partition(const Instance& inst, std::optional<int> k,
                        const std::function<void(std::span<const BlockMask>)>& fn);

/// Optimal depot-anchored tour through `block` by trying every order.
/// The lexicographically first optimal order is returned.
Route price_route(std::span<const int> block, const Instance& inst,
                  const DistanceMatrix& dm);

/// Exact CVRP optimum by partition enumeration. Ties keep the partition that
/// comes first in restricted-growth order.
ExactCvrpResult exact_cvrp(const Instance& inst,
                           std::optional<int> k = std::nullopt);

/// Minimum-withinss partition into exactly k capacity-feasible blocks.
ExactCcbcResult exact_ccbc(const Instance& inst, int k, bool include_depot);

}  // namespace ctr3
