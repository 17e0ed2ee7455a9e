#pragma once

#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"

namespace ctr3 {

/// Depot-anchored route; the depot is implicit at both ends of `sequence`.
struct Route {
  std::vector<int> sequence;
  double cost = 0.0;
  double load = 0.0;

  friend bool operator==(const Route&, const Route&) = default;
};

struct Solution {
  std::vector<Route> routes;
  double total_cost = 0.0;

  int k() const { return static_cast<int>(routes.size()); }
};

inline constexpr int kDefaultExactThreshold = 14;

/// d(0,s1) + sum d(si,si+1) + d(sm,0).
double tour_cost(std::span<const int> sequence, const DistanceMatrix& dm);

/// Optimal depot-anchored tour by Held-Karp for |cluster| <= exact_threshold,
/// otherwise a nearest-neighbour tour polished by first-improvement 2-opt.
Route solve_tsp(std::span<const int> cluster, const Instance& inst,
                const DistanceMatrix& dm,
                int exact_threshold = kDefaultExactThreshold);

/// Held-Karp over depot + cluster. Ties resolve to the lexicographically
/// first predecessor, so the result is deterministic.
std::vector<int> held_karp_tour(std::span<const int> cluster,
                                const DistanceMatrix& dm);

std::vector<int> nearest_neighbor_tour(std::span<const int> cluster,
                                       const DistanceMatrix& dm);

/// Improves `tour` in place with 2-opt moves (i < j scanned ascending, first
/// improvement) until no move shortens it.
void two_opt(std::vector<int>& tour, const DistanceMatrix& dm);

/// Memo of routed clusters keyed by their sorted customer set. Thread-safe.
class TspCache {
 public:
  Route solve(std::span<const int> cluster, const Instance& inst,
              const DistanceMatrix& dm, int exact_threshold);
  size_t size() const;

 private:
  struct VecHash {
    size_t operator()(const std::vector<int>& v) const noexcept;
  };
  mutable std::mutex mutex_;
  std::unordered_map<std::vector<int>, Route, VecHash> cache_;
};

/// Routes every cluster of a clustering. Clusters must be non-empty.
Solution route_all(const ClusterSolution& clusters, const Instance& inst,
                   const DistanceMatrix& dm,
                   int exact_threshold = kDefaultExactThreshold,
                   TspCache* cache = nullptr);

Solution make_solution(std::vector<Route> routes);

}  // namespace ctr3
