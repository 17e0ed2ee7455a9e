#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/routing.hpp"

namespace ctr3 {

enum class ViolationKind {
  kMissingCustomer,
  kDuplicatedCustomer,
  kCapacityExceeded,
  kCostMismatch,
  kBadDepotAnchor,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  /// Customer id or route/cluster index the fault is attached to (-1 when the
  /// violation concerns the whole solution).
  int id = -1;
  /// Offending magnitude: overload, cost difference, occurrence count.
  double magnitude = 0.0;
  std::string detail;
};

/// Recomputes coverage, loads and costs from the raw instance data. Empty
/// result means feasible. Costs are compared with an absolute tolerance of
/// 1e-6 under exact-euclidean distances and exactly under rounded ones.
std::vector<Violation> validate_solution(const Instance& inst,
                                         const Solution& sol);

/// Partition, capacity, centroid and withinss checks for a clustering.
std::vector<Violation> validate_clusters(const Instance& inst,
                                         const ClusterSolution& cs);

std::string describe(const std::vector<Violation>& violations);

}  // namespace ctr3
