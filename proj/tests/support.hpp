#pragma once

// Reference computations for tests. Nothing here calls into the library's
// distance, routing or enumeration code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ctr3/instance.hpp"
#include "ctr3/ruin_recreate.hpp"

namespace ctr3::testing {

// Four customers around a depot at (1,1); demands 6,1,1,8 and Q = 10.
inline Instance four_customer_instance() {
  std::vector<Customer> nodes = {
      {0, 1, 1, 0}, {1, 2, 3, 6}, {2, 3, 3, 1}, {3, 2, 5, 1}, {4, 1, 7, 8},
  };
  return Instance::create("four", std::move(nodes), 10.0,
                          DistancePolicy::kExactEuclidean);
}

inline double ref_distance(const Instance& inst, int a, int b) {
  const auto& p = inst.node(a);
  const auto& q = inst.node(b);
  const double d = std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
  if (inst.distance_policy() == DistancePolicy::kRoundedEuclidean) {
    return std::floor(d + 0.5);
  }
  return d;
}

inline double ref_tour(const Instance& inst, const std::vector<int>& seq) {
  if (seq.empty()) return 0.0;
  double c = ref_distance(inst, 0, seq.front()) + ref_distance(inst, seq.back(), 0);
  for (size_t i = 1; i < seq.size(); ++i) c += ref_distance(inst, seq[i - 1], seq[i]);
  return c;
}

// Minimum over all visiting orders.
inline double brute_tsp(const Instance& inst, std::vector<int> block) {
  if (block.empty()) return 0.0;
  std::sort(block.begin(), block.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, ref_tour(inst, block));
  } while (std::next_permutation(block.begin(), block.end()));
  return best;
}

inline double block_load(const Instance& inst, const std::vector<int>& block) {
  double q = 0.0;
  for (int id : block) q += inst.node(id).demand;
  return q;
}

// Every set partition of the customers, as lists of blocks.
inline void for_each_set_partition(
    int n, const std::function<void(const std::vector<std::vector<int>>&)>& fn) {
  std::vector<std::vector<int>> blocks;
  std::function<void(int)> rec = [&](int i) {
    if (i > n) {
      fn(blocks);
      return;
    }
    for (size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].push_back(i);
      rec(i + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({i});
    rec(i + 1);
    blocks.pop_back();
  };
  rec(1);
}

inline double ref_withinss(const Instance& inst, const std::vector<int>& block,
                           bool with_depot) {
  std::vector<int> ids = block;
  if (with_depot) ids.push_back(0);
  double mx = 0.0, my = 0.0;
  for (int id : ids) {
    mx += inst.node(id).x;
    my += inst.node(id).y;
  }
  mx /= static_cast<double>(ids.size());
  my /= static_cast<double>(ids.size());
  double w = 0.0;
  for (int id : ids) {
    const double dx = inst.node(id).x - mx, dy = inst.node(id).y - my;
    w += dx * dx + dy * dy;
  }
  return w;
}

// Capacity-feasible CVRP optimum by enumerating partitions and orders.
inline double brute_cvrp(const Instance& inst) {
  double best = std::numeric_limits<double>::infinity();
  for_each_set_partition(inst.num_customers(), [&](const auto& blocks) {
    double v = 0.0;
    for (const auto& b : blocks) {
      if (block_load(inst, b) > inst.capacity()) return;
      v += brute_tsp(inst, b);
    }
    best = std::min(best, v);
  });
  return best;
}

struct SubsetOptimum {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> chosen;
};

// Cheapest set of candidates covering every customer exactly once, by
// walking all subsets (overlapping branches are cut as soon as they clash).
inline SubsetOptimum enumerate_subsets(const RelinkModel& model) {
  SubsetOptimum best;
  const int n = model.num_customers;
  std::vector<int> cover(static_cast<size_t>(n + 1), 0);
  std::vector<int> pick;
  std::function<void(size_t, double)> rec = [&](size_t c, double cost) {
    if (c == model.candidates.size()) {
      for (int i = 1; i <= n; ++i) {
        if (cover[static_cast<size_t>(i)] != 1) return;
      }
      if (cost < best.value - 1e-9) {
        best.feasible = true;
        best.value = cost;
        best.chosen = pick;
      }
      return;
    }
    rec(c + 1, cost);
    const auto& cand = model.candidates[c];
    bool clash = false;
    for (int id : cand.customers) clash |= cover[static_cast<size_t>(id)] != 0;
    if (clash) return;
    for (int id : cand.customers) ++cover[static_cast<size_t>(id)];
    pick.push_back(static_cast<int>(c));
    rec(c + 1, cost + cand.delta);
    pick.pop_back();
    for (int id : cand.customers) --cover[static_cast<size_t>(id)];
  };
  rec(0, 0.0);
  return best;
}

// Routed solutions built from random capacity-feasible blocks in random
// visiting order.
inline std::vector<Solution> random_solutions(const Instance& inst, int count,
                                              std::mt19937_64& rng) {
  std::vector<Solution> out;
  for (int s = 0; s < count; ++s) {
    std::vector<int> ids;
    for (int i = 1; i <= inst.num_customers(); ++i) ids.push_back(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<Route> routes;
    Route cur;
    for (int id : ids) {
      const double q = inst.node(id).demand;
      if (!cur.sequence.empty() &&
          (cur.load + q > inst.capacity() || rng() % 3 == 0)) {
        routes.push_back(cur);
        cur = Route{};
      }
      cur.sequence.push_back(id);
      cur.load += q;
    }
    routes.push_back(cur);
    for (auto& r : routes) r.cost = ref_tour(inst, r.sequence);
    out.push_back(make_solution(routes));
  }
  return out;
}

// Relink model from random solutions of a random instance, thinned to at
// most `max_candidates` joins.
inline RelinkModel random_relink_model(std::uint64_t seed, size_t max_candidates,
                                       Instance* instance_out = nullptr) {
  std::mt19937_64 rng(seed);
  const int n = 4 + static_cast<int>(rng() % 4);
  const Instance inst = generate_small_instance(n, rng());
  const DistanceMatrix dm(inst);
  const auto sols = random_solutions(inst, 1 + static_cast<int>(rng() % 3), rng);
  int vehicles = 0;
  for (const auto& s : sols) vehicles = std::max(vehicles, s.k());
  RelinkModel model = prune_joins(cut_routes(sols, inst, dm), dm, inst.capacity(),
                                  vehicles, inst.total_demand(), n);
  if (model.candidates.size() > max_candidates) {
    std::vector<size_t> idx(model.candidates.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_candidates);
    std::sort(idx.begin(), idx.end());
    std::vector<JoinCandidate> kept;
    for (size_t i : idx) kept.push_back(model.candidates[i]);
    model.candidates = std::move(kept);
  }
  if (instance_out) *instance_out = inst;
  return model;
}

}  // namespace ctr3::testing
