#include "ctr3/ccbc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ctr3/parallel.hpp"

namespace ctr3 {

std::string_view to_string(Initializer init) {
  switch (init) {
    case Initializer::kRandomMultistart:
      return "multistart";
    case Initializer::kKmeansPlusPlus:
      return "kmeanspp";
    case Initializer::kNaiveSharding:
      return "sharding";
  }
  return "unknown";
}

std::string_view to_string(AssignmentMetric metric) {
  switch (metric) {
    case AssignmentMetric::kCustomized:
      return "customized";
    case AssignmentMetric::kClassical:
      return "classical";
  }
  return "unknown";
}

std::optional<Initializer> parse_initializer(std::string_view text) {
  if (text == "multistart") return Initializer::kRandomMultistart;
  if (text == "kmeanspp") return Initializer::kKmeansPlusPlus;
  if (text == "sharding") return Initializer::kNaiveSharding;
  return std::nullopt;
}

std::optional<AssignmentMetric> parse_metric(std::string_view text) {
  if (text == "customized") return AssignmentMetric::kCustomized;
  if (text == "classical") return AssignmentMetric::kClassical;
  return std::nullopt;
}

int lower_bound_k(const Instance& inst) {
  const double ratio = inst.total_demand() / inst.capacity();
  // Guard against 16/10*10 style round-off pushing an exact fit up by one.
  const int k = static_cast<int>(std::ceil(ratio - 1e-12));
  return std::max(k, 1);
}

double assignment_metric(const Customer& c, const Point& centroid) {
  const double d = euclidean(c.x, c.y, centroid.x, centroid.y);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return c.demand / d;
}

namespace {

double squared_distance(const Customer& c, const Point& p) {
  const double dx = c.x - p.x;
  const double dy = c.y - p.y;
  return dx * dx + dy * dy;
}

bool fits(double load, double demand, double capacity) {
  return load + demand <= capacity * (1.0 + 1e-12);
}

std::mt19937_64 start_rng(std::uint64_t seed, int start_index, int k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start_index),
                    static_cast<std::uint32_t>(k)};
  return std::mt19937_64(seq);
}

CentroidSet random_customers(const Instance& inst, int k,
                             std::mt19937_64& rng) {
  std::vector<int> ids(static_cast<size_t>(inst.num_customers()));
  std::iota(ids.begin(), ids.end(), 1);
  CentroidSet out;
  out.reserve(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(static_cast<size_t>(i),
                                               ids.size() - 1);
    std::swap(ids[static_cast<size_t>(i)], ids[pick(rng)]);
    const Customer& c = inst.node(ids[static_cast<size_t>(i)]);
    out.push_back({c.x, c.y});
  }
  return out;
}

CentroidSet kmeans_plus_plus(const Instance& inst, int k,
                             std::mt19937_64& rng) {
  const int n = inst.num_customers();
  std::vector<bool> chosen(static_cast<size_t>(n + 1), false);
  std::vector<double> best(static_cast<size_t>(n + 1),
                           std::numeric_limits<double>::infinity());
  CentroidSet out;
  std::uniform_int_distribution<int> first(1, n);
  int pick = first(rng);
  for (int c = 0; c < k; ++c) {
    chosen[static_cast<size_t>(pick)] = true;
    const Customer& p = inst.node(pick);
    out.push_back({p.x, p.y});
    if (c + 1 == k) break;
    double total = 0.0;
    for (int i = 1; i <= n; ++i) {
      const auto idx = static_cast<size_t>(i);
      best[idx] = std::min(best[idx], squared_distance(inst.node(i), out.back()));
      if (!chosen[idx]) total += best[idx];
    }
    if (total <= 0.0) {
      // Every remaining customer coincides with a centroid: pick uniformly.
      std::vector<int> rest;
      for (int i = 1; i <= n; ++i) {
        if (!chosen[static_cast<size_t>(i)]) rest.push_back(i);
      }
      std::uniform_int_distribution<size_t> u(0, rest.size() - 1);
      pick = rest[u(rng)];
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    pick = -1;
    for (int i = 1; i <= n; ++i) {
      const auto idx = static_cast<size_t>(i);
      if (chosen[idx]) continue;
      pick = i;
      target -= best[idx];
      if (target < 0.0) break;
    }
  }
  return out;
}

CentroidSet naive_sharding(const Instance& inst, int k) {
  const int n = inst.num_customers();
  std::vector<int> ids(static_cast<size_t>(n));
  std::iota(ids.begin(), ids.end(), 1);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    const Customer& ca = inst.node(a);
    const Customer& cb = inst.node(b);
    return ca.x + ca.y < cb.x + cb.y;
  });
  CentroidSet out;
  for (int s = 0; s < k; ++s) {
    const size_t lo = static_cast<size_t>(s) * ids.size() / static_cast<size_t>(k);
    const size_t hi =
        static_cast<size_t>(s + 1) * ids.size() / static_cast<size_t>(k);
    Point p;
    for (size_t i = lo; i < hi; ++i) {
      p.x += inst.node(ids[i]).x;
      p.y += inst.node(ids[i]).y;
    }
    const double m = static_cast<double>(hi - lo);
    out.push_back({p.x / m, p.y / m});
  }
  return out;
}

// Assigns every customer given fixed centroids. Returns false when some
// customer cannot be placed in any cluster.
bool assign_customers(const Instance& inst, const CentroidSet& centroids,
                      AssignmentMetric metric,
                      std::vector<std::vector<int>>& members,
                      std::vector<double>& loads) {
  const int n = inst.num_customers();
  const int k = static_cast<int>(centroids.size());
  const double cap = inst.capacity();

  // Per-customer cluster ranking by distance, ties by cluster index.
  std::vector<std::vector<int>> ranking(static_cast<size_t>(n + 1));
  std::vector<double> dist(static_cast<size_t>((n + 1) * k));
  auto d = [&](int i, int c) -> double& {
    return dist[static_cast<size_t>(i * k + c)];
  };
  for (int i = 1; i <= n; ++i) {
    const Customer& cust = inst.node(i);
    for (int c = 0; c < k; ++c) {
      const Point& mu = centroids[static_cast<size_t>(c)];
      d(i, c) = euclidean(cust.x, cust.y, mu.x, mu.y);
    }
    auto& r = ranking[static_cast<size_t>(i)];
    r.resize(static_cast<size_t>(k));
    std::iota(r.begin(), r.end(), 0);
    std::stable_sort(r.begin(), r.end(),
                     [&](int a, int b) { return d(i, a) < d(i, b); });
  }

  std::vector<std::vector<int>> candidates(static_cast<size_t>(k));
  for (int i = 1; i <= n; ++i) {
    candidates[static_cast<size_t>(ranking[static_cast<size_t>(i)][0])]
        .push_back(i);
  }
  std::vector<size_t> rank_pos(static_cast<size_t>(n + 1), 0);
  std::vector<bool> processed(static_cast<size_t>(k), false);
  members.assign(static_cast<size_t>(k), {});
  loads.assign(static_cast<size_t>(k), 0.0);

  auto place = [&](int c, int i) {
    members[static_cast<size_t>(c)].push_back(i);
    loads[static_cast<size_t>(c)] += inst.node(i).demand;
  };

  // Move a rejected customer down its distance ranking.
  auto spill = [&](int i) -> bool {
    auto& pos = rank_pos[static_cast<size_t>(i)];
    const auto& r = ranking[static_cast<size_t>(i)];
    for (++pos; pos < r.size(); ++pos) {
      const int c = r[pos];
      if (!processed[static_cast<size_t>(c)]) {
        candidates[static_cast<size_t>(c)].push_back(i);
        return true;
      }
      if (fits(loads[static_cast<size_t>(c)], inst.node(i).demand, cap)) {
        place(c, i);
        return true;
      }
    }
    return false;
  };

  for (int c = 0; c < k; ++c) {
    auto& list = candidates[static_cast<size_t>(c)];
    std::vector<std::pair<double, int>> order;
    order.reserve(list.size());
    for (int i : list) {
      const double priority =
          metric == AssignmentMetric::kCustomized
              ? assignment_metric(inst.node(i), centroids[static_cast<size_t>(c)])
              : -d(i, c);
      order.emplace_back(priority, i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) {
                       if (a.first != b.first) return a.first > b.first;
                       return a.second < b.second;
                     });
    processed[static_cast<size_t>(c)] = true;
    for (const auto& [priority, i] : order) {
      if (fits(loads[static_cast<size_t>(c)], inst.node(i).demand, cap)) {
        place(c, i);
      } else if (!spill(i)) {
        return false;
      }
    }
  }
  for (auto& m : members) std::sort(m.begin(), m.end());
  return true;
}

Point mean_point(const Instance& inst, const std::vector<int>& block,
                 bool include_depot) {
  Point p;
  double count = 0.0;
  if (include_depot) {
    p.x += inst.depot().x;
    p.y += inst.depot().y;
    count += 1.0;
  }
  for (int i : block) {
    p.x += inst.node(i).x;
    p.y += inst.node(i).y;
    count += 1.0;
  }
  return {p.x / count, p.y / count};
}

double block_withinss(const Instance& inst, const std::vector<int>& block,
                      const Point& mu, bool include_depot) {
  double w = include_depot ? squared_distance(inst.depot(), mu) : 0.0;
  for (int i : block) w += squared_distance(inst.node(i), mu);
  return w;
}

}  // namespace

double partition_withinss(const Instance& inst,
                          const std::vector<std::vector<int>>& clusters,
                          bool include_depot) {
  double w = 0.0;
  for (const auto& block : clusters) {
    if (block.empty()) continue;
    w += block_withinss(inst, block, mean_point(inst, block, include_depot),
                        include_depot);
  }
  return w;
}

ClusterSolution make_cluster_solution(const Instance& inst,
                                      std::vector<std::vector<int>> clusters,
                                      bool include_depot) {
  ClusterSolution cs;
  cs.depot_in_clusters = include_depot;
  cs.assignment.assign(static_cast<size_t>(inst.num_nodes()), -1);
  for (auto& block : clusters) {
    if (block.empty()) continue;
    std::sort(block.begin(), block.end());
    const int k = static_cast<int>(cs.clusters.size());
    double load = 0.0;
    for (int i : block) {
      cs.assignment[static_cast<size_t>(i)] = k;
      load += inst.node(i).demand;
    }
    const Point mu = mean_point(inst, block, include_depot);
    cs.withinss += block_withinss(inst, block, mu, include_depot);
    cs.centroids.push_back(mu);
    cs.loads.push_back(load);
    cs.clusters.push_back(std::move(block));
  }
  return cs;
}

CentroidSet initial_centroids(const Instance& inst, int k,
                              const CcbcConfig& cfg, int start_index) {
  if (k < 1 || k > inst.num_customers()) {
    throw std::invalid_argument(
        fmt::format("initial_centroids: k={} outside [1, {}]", k,
                    inst.num_customers()));
  }
  auto rng = start_rng(cfg.seed, start_index, k);
  switch (cfg.initializer) {
    case Initializer::kRandomMultistart:
      return random_customers(inst, k, rng);
    case Initializer::kKmeansPlusPlus:
      return kmeans_plus_plus(inst, k, rng);
    case Initializer::kNaiveSharding:
      return naive_sharding(inst, k);
  }
  return {};
}

StartResult ccbc_single_start_traced(const Instance& inst, int k,
                                     const CentroidSet& init,
                                     const CcbcConfig& cfg, int start_index) {
  if (static_cast<int>(init.size()) != k || k < 1) {
    throw std::invalid_argument(fmt::format(
        "ccbc_single_start: {} initial centroids for k={}", init.size(), k));
  }
  StartResult result;
  CentroidSet centroids = init;
  std::vector<std::vector<int>> members;
  std::vector<double> loads;
  double previous = std::numeric_limits<double>::infinity();
  const int max_iter = std::max(cfg.max_inner_iterations, 1);

  for (int iter = 1; iter <= max_iter; ++iter) {
    result.iterations = iter;
    if (!assign_customers(inst, centroids, cfg.metric, members, loads)) {
      return result;
    }
    double w = 0.0;
    for (size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) continue;  // keep the previous centroid
      centroids[c] = mean_point(inst, members[c], false);
      w += block_withinss(inst, members[c], centroids[c], false);
    }
    if (cfg.record_trace) {
      result.trace.push_back({start_index, k, iter, w});
    }
    const double gap = std::fabs(previous - w) / std::max(w, 1.0);
    previous = w;
    if (gap < cfg.gap_limit) break;
  }
  result.solution = make_cluster_solution(inst, std::move(members), false);
  return result;
}

std::optional<ClusterSolution> ccbc_single_start(const Instance& inst, int k,
                                                 const CentroidSet& init,
                                                 const CcbcConfig& cfg) {
  return ccbc_single_start_traced(inst, k, init, cfg, 0).solution;
}

MultistartResult ccbc_multistart(const Instance& inst, const CcbcConfig& cfg) {
  if (cfg.n_starts < 1) {
    throw std::invalid_argument("ccbc_multistart: n_starts must be >= 1");
  }
  if (!(cfg.gap_limit > 0.0)) {
    throw std::invalid_argument("ccbc_multistart: gap_limit must be > 0");
  }
  const int n = inst.num_customers();
  MultistartResult out;
  for (int k = lower_bound_k(inst); k <= n; ++k) {
    std::vector<StartResult> runs(static_cast<size_t>(cfg.n_starts));
    parallel_for(runs.size(), cfg.threads, [&](size_t s) {
      const int start = static_cast<int>(s);
      runs[s] = ccbc_single_start_traced(
          inst, k, initial_centroids(inst, k, cfg, start), cfg, start);
    });
    for (size_t s = 0; s < runs.size(); ++s) {
      out.trace.insert(out.trace.end(), runs[s].trace.begin(),
                       runs[s].trace.end());
      if (runs[s].solution) {
        out.solutions.push_back(std::move(*runs[s].solution));
        out.start_indices.push_back(static_cast<int>(s));
      }
    }
    if (!out.solutions.empty()) {
      out.k = k;
      return out;
    }
  }
  // Unreachable with demands <= Q: K = N seeds every customer as a centroid.
  std::vector<std::vector<int>> singletons;
  for (int i = 1; i <= n; ++i) singletons.push_back({i});
  out.solutions.push_back(make_cluster_solution(inst, std::move(singletons), false));
  out.start_indices.push_back(0);
  out.k = n;
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "start,k,iteration,withinss\n";
  for (const auto& row : trace) {
    out << fmt::format("{},{},{},{:.10g}\n", row.start, row.k, row.iteration,
                       row.withinss);
  }
}

}  // namespace ctr3
