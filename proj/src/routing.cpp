#include "ctr3/routing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ctr3 {

double tour_cost(std::span<const int> sequence, const DistanceMatrix& dm) {
  if (sequence.empty()) return 0.0;
  double cost = dm(0, sequence.front());
  for (size_t i = 1; i < sequence.size(); ++i) {
    cost += dm(sequence[i - 1], sequence[i]);
  }
  return cost + dm(sequence.back(), 0);
}

std::vector<int> held_karp_tour(std::span<const int> cluster,
                                const DistanceMatrix& dm) {
  const int m = static_cast<int>(cluster.size());
  if (m == 0) return {};
  if (m > 24) {
    throw std::invalid_argument(
        fmt::format("held_karp_tour: {} customers is too many", m));
  }
  if (m == 1) return {cluster[0]};
  const size_t full = (size_t{1} << m);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(full * static_cast<size_t>(m), kInf);
  std::vector<std::int8_t> parent(full * static_cast<size_t>(m), -1);
  auto at = [m](size_t mask, int j) {
    return mask * static_cast<size_t>(m) + static_cast<size_t>(j);
  };
  for (int j = 0; j < m; ++j) dp[at(size_t{1} << j, j)] = dm(0, cluster[j]);

  for (size_t mask = 1; mask < full; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (size_t{1} << j))) continue;
      const double base = dp[at(mask, j)];
      if (base == kInf) continue;
      for (int nxt = 0; nxt < m; ++nxt) {
        if (mask & (size_t{1} << nxt)) continue;
        const size_t next_mask = mask | (size_t{1} << nxt);
        const double cand = base + dm(cluster[j], cluster[nxt]);
        if (cand < dp[at(next_mask, nxt)]) {
          dp[at(next_mask, nxt)] = cand;
          parent[at(next_mask, nxt)] = static_cast<std::int8_t>(j);
        }
      }
    }
  }

  const size_t all = full - 1;
  int last = 0;
  double best = kInf;
  for (int j = 0; j < m; ++j) {
    const double cand = dp[at(all, j)] + dm(cluster[j], 0);
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  std::vector<int> order;
  order.reserve(cluster.size());
  size_t mask = all;
  int cur = last;
  while (cur >= 0) {
    order.push_back(cluster[cur]);
    const int prev = parent[at(mask, cur)];
    mask &= ~(size_t{1} << cur);
    cur = prev;
  }
  std::reverse(order.begin(), order.end());
  return order;
}

std::vector<int> nearest_neighbor_tour(std::span<const int> cluster,
                                       const DistanceMatrix& dm) {
  std::vector<int> remaining(cluster.begin(), cluster.end());
  std::vector<int> tour;
  tour.reserve(remaining.size());
  int current = 0;
  while (!remaining.empty()) {
    size_t best = 0;
    for (size_t i = 1; i < remaining.size(); ++i) {
      if (dm(current, remaining[i]) < dm(current, remaining[best])) best = i;
    }
    current = remaining[best];
    tour.push_back(current);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return tour;
}

void two_opt(std::vector<int>& tour, const DistanceMatrix& dm) {
  const size_t m = tour.size();
  if (m < 2) return;
  auto node = [&](size_t pos) -> int {
    // Positions 0 and m + 1 are the depot.
    return (pos == 0 || pos == m + 1) ? 0 : tour[pos - 1];
  };
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t i = 1; i < m; ++i) {
      for (size_t j = i + 1; j <= m; ++j) {
        const int a = node(i - 1);
        const int b = node(i);
        const int c = node(j);
        const int e = node(j + 1);
        const double delta = dm(a, c) + dm(b, e) - dm(a, b) - dm(c, e);
        if (delta < -1e-10) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i - 1),
                       tour.begin() + static_cast<std::ptrdiff_t>(j));
          improved = true;
        }
      }
    }
  }
}

Route solve_tsp(std::span<const int> cluster, const Instance& inst,
                const DistanceMatrix& dm, int exact_threshold) {
  if (cluster.empty()) {
    throw std::invalid_argument("solve_tsp: empty cluster");
  }
  Route route;
  for (int id : cluster) {
    if (id <= 0 || id > inst.num_customers()) {
      throw std::invalid_argument(
          fmt::format("solve_tsp: {} is not a customer id", id));
    }
    route.load += inst.node(id).demand;
  }
  std::vector<int> sorted(cluster.begin(), cluster.end());
  std::sort(sorted.begin(), sorted.end());
  if (static_cast<int>(sorted.size()) <= exact_threshold) {
    route.sequence = held_karp_tour(sorted, dm);
  } else {
    route.sequence = nearest_neighbor_tour(sorted, dm);
    two_opt(route.sequence, dm);
  }
  route.cost = tour_cost(route.sequence, dm);
  return route;
}

size_t TspCache::VecHash::operator()(const std::vector<int>& v) const noexcept {
  size_t h = 1469598103934665603ull;
  for (int x : v) {
    h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

Route TspCache::solve(std::span<const int> cluster, const Instance& inst,
                      const DistanceMatrix& dm, int exact_threshold) {
  std::vector<int> key(cluster.begin(), cluster.end());
  std::sort(key.begin(), key.end());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Route route = solve_tsp(key, inst, dm, exact_threshold);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(route)).first->second;
}

size_t TspCache::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

Solution make_solution(std::vector<Route> routes) {
  Solution sol;
  sol.routes = std::move(routes);
  for (const auto& r : sol.routes) sol.total_cost += r.cost;
  return sol;
}

Solution route_all(const ClusterSolution& clusters, const Instance& inst,
                   const DistanceMatrix& dm, int exact_threshold,
                   TspCache* cache) {
  std::vector<Route> routes;
  routes.reserve(clusters.clusters.size());
  for (const auto& block : clusters.clusters) {
    if (block.empty()) {
      throw std::invalid_argument("route_all: empty cluster");
    }
    routes.push_back(cache ? cache->solve(block, inst, dm, exact_threshold)
                           : solve_tsp(block, inst, dm, exact_threshold));
  }
  return make_solution(std::move(routes));
}

}  // namespace ctr3
