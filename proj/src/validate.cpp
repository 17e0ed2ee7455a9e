#include "ctr3/validate.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ctr3 {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kMissingCustomer:
      return "missing-customer";
    case ViolationKind::kDuplicatedCustomer:
      return "duplicated-customer";
    case ViolationKind::kCapacityExceeded:
      return "capacity-exceeded";
    case ViolationKind::kCostMismatch:
      return "cost-mismatch";
    case ViolationKind::kBadDepotAnchor:
      return "bad-depot-anchor";
  }
  return "unknown";
}

namespace {

// Deliberately independent of DistanceMatrix / tour_cost.
double raw_distance(const Instance& inst, int a, int b) {
  const Customer& p = inst.nodes()[static_cast<size_t>(a)];
  const Customer& q = inst.nodes()[static_cast<size_t>(b)];
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double d = std::sqrt(dx * dx + dy * dy);
  if (inst.distance_policy() == DistancePolicy::kRoundedEuclidean) {
    return std::floor(d + 0.5);
  }
  return d;
}

bool costs_differ(const Instance& inst, double stored, double recomputed) {
  if (inst.distance_policy() == DistancePolicy::kRoundedEuclidean) {
    return stored != recomputed;
  }
  return std::fabs(stored - recomputed) > 1e-6;
}

bool over_capacity(const Instance& inst, double load) {
  return load > inst.capacity() * (1.0 + 1e-12);
}

void check_coverage(const Instance& inst, const std::vector<int>& count,
                    std::vector<Violation>& out) {
  for (int i = 1; i <= inst.num_customers(); ++i) {
    const int c = count[static_cast<size_t>(i)];
    if (c == 0) {
      out.push_back({ViolationKind::kMissingCustomer, i, 0.0,
                     fmt::format("customer {} is not served", i)});
    } else if (c > 1) {
      out.push_back({ViolationKind::kDuplicatedCustomer, i,
                     static_cast<double>(c),
                     fmt::format("customer {} appears {} times", i, c)});
    }
  }
}

}  // namespace

std::vector<Violation> validate_solution(const Instance& inst,
                                         const Solution& sol) {
  std::vector<Violation> out;
  std::vector<int> count(static_cast<size_t>(inst.num_nodes()), 0);
  double total = 0.0;
  for (size_t r = 0; r < sol.routes.size(); ++r) {
    const Route& route = sol.routes[r];
    const int rid = static_cast<int>(r);
    if (route.sequence.empty()) {
      out.push_back({ViolationKind::kBadDepotAnchor, rid, 0.0,
                     fmt::format("route {} is empty", r)});
      continue;
    }
    bool anchored = true;
    for (int id : route.sequence) {
      if (id <= 0 || id > inst.num_customers()) {
        out.push_back({ViolationKind::kBadDepotAnchor, rid,
                       static_cast<double>(id),
                       fmt::format("route {} visits invalid node {}", r, id)});
        anchored = false;
      }
    }
    if (!anchored) continue;

    double load = 0.0;
    double cost = raw_distance(inst, 0, route.sequence.front()) +
                  raw_distance(inst, route.sequence.back(), 0);
    for (size_t i = 0; i < route.sequence.size(); ++i) {
      const int id = route.sequence[i];
      ++count[static_cast<size_t>(id)];
      load += inst.nodes()[static_cast<size_t>(id)].demand;
      if (i > 0) cost += raw_distance(inst, route.sequence[i - 1], id);
    }
    total += cost;
    if (over_capacity(inst, load)) {
      out.push_back({ViolationKind::kCapacityExceeded, rid,
                     load - inst.capacity(),
                     fmt::format("route {} load {} exceeds capacity {}", r,
                                 load, inst.capacity())});
    }
    if (costs_differ(inst, route.cost, cost)) {
      out.push_back({ViolationKind::kCostMismatch, rid,
                     std::fabs(route.cost - cost),
                     fmt::format("route {} stores cost {} but travels {}", r,
                                 route.cost, cost)});
    }
    if (std::fabs(route.load - load) > 1e-9 * std::max(1.0, load)) {
      out.push_back({ViolationKind::kCostMismatch, rid,
                     std::fabs(route.load - load),
                     fmt::format("route {} stores load {} but carries {}", r,
                                 route.load, load)});
    }
  }
  check_coverage(inst, count, out);
  if (costs_differ(inst, sol.total_cost, total)) {
    out.push_back({ViolationKind::kCostMismatch, -1,
                   std::fabs(sol.total_cost - total),
                   fmt::format("total cost {} but routes sum to {}",
                               sol.total_cost, total)});
  }
  return out;
}

std::vector<Violation> validate_clusters(const Instance& inst,
                                         const ClusterSolution& cs) {
  std::vector<Violation> out;
  std::vector<int> count(static_cast<size_t>(inst.num_nodes()), 0);
  if (cs.centroids.size() != cs.clusters.size() ||
      cs.loads.size() != cs.clusters.size()) {
    out.push_back({ViolationKind::kCostMismatch, -1, 0.0,
                   "centroid/load arrays do not match the cluster count"});
    return out;
  }
  const auto& nodes = inst.nodes();
  double withinss = 0.0;
  for (size_t k = 0; k < cs.clusters.size(); ++k) {
    const auto& block = cs.clusters[k];
    const int kid = static_cast<int>(k);
    if (block.empty()) {
      out.push_back({ViolationKind::kMissingCustomer, kid, 0.0,
                     fmt::format("cluster {} is empty", k)});
      continue;
    }
    double load = 0.0;
    double sx = cs.depot_in_clusters ? nodes[0].x : 0.0;
    double sy = cs.depot_in_clusters ? nodes[0].y : 0.0;
    double members = cs.depot_in_clusters ? 1.0 : 0.0;
    bool valid = true;
    for (int id : block) {
      if (id <= 0 || id > inst.num_customers()) {
        out.push_back({ViolationKind::kBadDepotAnchor, kid,
                       static_cast<double>(id),
                       fmt::format("cluster {} holds invalid node {}", k, id)});
        valid = false;
        continue;
      }
      ++count[static_cast<size_t>(id)];
      const Customer& c = nodes[static_cast<size_t>(id)];
      load += c.demand;
      sx += c.x;
      sy += c.y;
      members += 1.0;
      if (static_cast<size_t>(id) < cs.assignment.size() &&
          cs.assignment[static_cast<size_t>(id)] != kid) {
        out.push_back({ViolationKind::kDuplicatedCustomer, id, 0.0,
                       fmt::format("assignment of customer {} says {}, "
                                   "cluster list says {}",
                                   id, cs.assignment[static_cast<size_t>(id)],
                                   k)});
      }
    }
    if (!valid) continue;
    if (over_capacity(inst, load)) {
      out.push_back({ViolationKind::kCapacityExceeded, kid,
                     load - inst.capacity(),
                     fmt::format("cluster {} load {} exceeds capacity {}", k,
                                 load, inst.capacity())});
    }
    if (std::fabs(cs.loads[k] - load) > 1e-9 * std::max(1.0, load)) {
      out.push_back({ViolationKind::kCostMismatch, kid,
                     std::fabs(cs.loads[k] - load),
                     fmt::format("cluster {} stores load {} but holds {}", k,
                                 cs.loads[k], load)});
    }
    const double mx = sx / members;
    const double my = sy / members;
    const double drift =
        std::hypot(cs.centroids[k].x - mx, cs.centroids[k].y - my);
    if (drift > 1e-9 * std::max(1.0, std::hypot(mx, my))) {
      out.push_back({ViolationKind::kCostMismatch, kid, drift,
                     fmt::format("cluster {} centroid is off its mean by {}",
                                 k, drift)});
    }
    auto sq = [&](double x, double y) {
      return (x - mx) * (x - mx) + (y - my) * (y - my);
    };
    if (cs.depot_in_clusters) withinss += sq(nodes[0].x, nodes[0].y);
    for (int id : block) {
      withinss += sq(nodes[static_cast<size_t>(id)].x,
                     nodes[static_cast<size_t>(id)].y);
    }
  }
  check_coverage(inst, count, out);
  if (std::fabs(cs.withinss - withinss) > 1e-9 * std::max(1.0, withinss)) {
    out.push_back({ViolationKind::kCostMismatch, -1,
                   std::fabs(cs.withinss - withinss),
                   fmt::format("withinss {} but recomputes to {}", cs.withinss,
                               withinss)});
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("[{}] {}\n", to_string(v.kind), v.detail);
  }
  return out;
}

}  // namespace ctr3
