#include "ctr3/ruin_recreate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "ctr3/parallel.hpp"
#include "ctr3/validate.hpp"

namespace ctr3 {

std::string_view to_string(PieceSide side) {
  return side == PieceSide::kLeft ? "left" : "right";
}

namespace {

struct SeqHash {
  size_t operator()(const std::vector<int>& v) const noexcept {
    size_t h = 0xcbf29ce484222325ull;
    for (int x : v) {
      h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct WordsHash {
  size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
    size_t h = 0x84222325cbf29ce4ull;
    for (auto x : v) {
      h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

size_t words_for(int num_nodes) {
  return static_cast<size_t>((num_nodes + 63) / 64);
}

void set_bit(std::vector<std::uint64_t>& bits, int i) {
  bits[static_cast<size_t>(i) / 64] |= std::uint64_t{1} << (i % 64);
}

bool intersects(const std::vector<std::uint64_t>& a,
                const std::vector<std::uint64_t>& b) {
  for (size_t w = 0; w < a.size(); ++w) {
    if (a[w] & b[w]) return true;
  }
  return false;
}

RoutePiece make_piece(PieceSide side, std::vector<int> seq,
                      const Instance& inst, const DistanceMatrix& dm,
                      size_t words, PieceOrigin origin) {
  RoutePiece p;
  p.side = side;
  p.customer_set.assign(words, 0);
  p.origin = origin;
  if (!seq.empty()) {
    double c = side == PieceSide::kLeft ? dm(0, seq.front())
                                        : dm(seq.back(), 0);
    for (size_t i = 1; i < seq.size(); ++i) c += dm(seq[i - 1], seq[i]);
    p.internal_cost = c;
    for (int id : seq) {
      set_bit(p.customer_set, id);
      p.load += inst.node(id).demand;
    }
  }
  p.sequence = std::move(seq);
  return p;
}

}  // namespace

PiecePool cut_routes(const std::vector<Solution>& solutions,
                     const Instance& inst, const DistanceMatrix& dm) {
  PiecePool pool;
  const size_t words = words_for(static_cast<int>(dm.size()));
  std::unordered_map<std::vector<int>, int, SeqHash> seen_left;
  std::unordered_map<std::vector<int>, int, SeqHash> seen_right;
  for (size_t s = 0; s < solutions.size(); ++s) {
    const auto& routes = solutions[s].routes;
    for (size_t r = 0; r < routes.size(); ++r) {
      const auto& seq = routes[r].sequence;
      for (size_t cut = 0; cut <= seq.size(); ++cut) {
        const PieceOrigin origin{static_cast<int>(s), static_cast<int>(r),
                                 static_cast<int>(cut)};
        std::vector<int> left(seq.begin(),
                              seq.begin() + static_cast<std::ptrdiff_t>(cut));
        std::vector<int> right(seq.begin() + static_cast<std::ptrdiff_t>(cut),
                               seq.end());
        if (!seen_left.contains(left)) {
          seen_left.emplace(left, static_cast<int>(pool.left.size()));
          pool.left.push_back(
              make_piece(PieceSide::kLeft, std::move(left), inst, dm, words, origin));
        }
        if (!seen_right.contains(right)) {
          seen_right.emplace(right, static_cast<int>(pool.right.size()));
          pool.right.push_back(make_piece(PieceSide::kRight, std::move(right),
                                          inst, dm, words, origin));
        }
      }
    }
  }
  return pool;
}

RelinkModel prune_joins(PiecePool pieces, const DistanceMatrix& dm,
                        double capacity, int vehicles, double total_demand,
                        int num_customers, const PruneOptions& opts) {
  RelinkModel model;
  model.num_customers = num_customers;
  model.capacity = capacity;
  model.vehicles = vehicles;
  model.cg_glob = vehicles * capacity - total_demand;
  model.pieces = std::move(pieces);
  const auto& left = model.pieces.left;
  const auto& right = model.pieces.right;

  struct Local {
    std::vector<JoinCandidate> joins;
    PruneStats stats;
  };
  std::vector<Local> per_left(left.size());
  const double cap_tol = capacity * 1e-12;
  parallel_for(left.size(), opts.threads, [&](size_t oi) {
    const RoutePiece& o = left[oi];
    Local& local = per_left[oi];
    for (size_t ti = 0; ti < right.size(); ++ti) {
      const RoutePiece& t = right[ti];
      ++local.stats.pairs;
      if (o.empty() && t.empty()) {
        ++local.stats.empty_pair;
        continue;
      }
      if (intersects(o.customer_set, t.customer_set)) {
        ++local.stats.shared_customer;
        continue;
      }
      const double tau = o.load + t.load;
      if (tau > capacity + cap_tol) {
        ++local.stats.over_capacity;
        continue;
      }
      if (opts.global_gap_rule && capacity - tau > model.cg_glob + 1e-9) {
        ++local.stats.global_gap;
        continue;
      }
      JoinCandidate j;
      j.o = static_cast<int>(oi);
      j.t = static_cast<int>(ti);
      const int a = o.empty() ? 0 : o.sequence.back();
      const int b = t.empty() ? 0 : t.sequence.front();
      // An empty side stands for the depot.
      j.delta = o.internal_cost + t.internal_cost + dm(a, b);
      j.tau = tau;
      j.customers.reserve(o.sequence.size() + t.sequence.size());
      j.customers.insert(j.customers.end(), o.sequence.begin(),
                         o.sequence.end());
      j.customers.insert(j.customers.end(), t.sequence.begin(),
                         t.sequence.end());
      std::sort(j.customers.begin(), j.customers.end());
      local.joins.push_back(std::move(j));
    }
  });

  // Ordered merge keeps the model identical for any thread count.
  std::unordered_map<std::vector<std::uint64_t>, size_t, WordsHash> by_set;
  const size_t words = words_for(static_cast<int>(dm.size()));
  for (auto& local : per_left) {
    model.stats.pairs += local.stats.pairs;
    model.stats.empty_pair += local.stats.empty_pair;
    model.stats.shared_customer += local.stats.shared_customer;
    model.stats.over_capacity += local.stats.over_capacity;
    model.stats.global_gap += local.stats.global_gap;
    for (auto& j : local.joins) {
      std::vector<std::uint64_t> key(words, 0);
      for (int id : j.customers) set_bit(key, id);
      auto [it, inserted] = by_set.emplace(std::move(key),
                                           model.candidates.size());
      if (inserted) {
        model.candidates.push_back(std::move(j));
        if (opts.max_candidates != 0 &&
            model.candidates.size() > opts.max_candidates) {
          model.stats.overflow = true;
          return model;
        }
        continue;
      }
      ++model.stats.duplicate_set;
      if (j.delta < model.candidates[it->second].delta) {
        model.candidates[it->second] = std::move(j);
      }
    }
    local.joins.clear();
    local.joins.shrink_to_fit();
  }
  return model;
}

std::optional<int> uncovered_customer(const RelinkModel& model) {
  std::vector<bool> covered(static_cast<size_t>(model.num_customers + 1),
                            false);
  for (const auto& c : model.candidates) {
    for (int id : c.customers) covered[static_cast<size_t>(id)] = true;
  }
  for (int i = 1; i <= model.num_customers; ++i) {
    if (!covered[static_cast<size_t>(i)]) return i;
  }
  return std::nullopt;
}

RelinkInfeasible::RelinkInfeasible(int customer)
    : std::runtime_error(
          fmt::format("relink model has no join covering customer {}",
                      customer)),
      customer_(customer) {}

namespace {

class RelinkSearch {
 public:
  RelinkSearch(const RelinkModel& model, const RelinkOptions& opts)
      : model_(model), opts_(opts) {
    n_ = model.num_customers;
    words_ = words_for(n_ + 1);
    best_ = opts.upper_bound.value_or(std::numeric_limits<double>::infinity());
    lambda_.assign(static_cast<size_t>(n_ + 1), 0.0);
    std::vector<int> all(model.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    compute_duals(all);
    build_index();
  }

  void run() {
    // Every improvement tightens reduced-cost fixing, so the search restarts
    // on the smaller candidate set.
    while (dual_bound_ < best_ - kEps) {
      restart_ = false;
      dfs(0, 0.0);
      if (!restart_ || aborted_) break;
      build_index();
    }
  }

  bool found() const { return found_; }
  bool aborted() const { return aborted_; }
  std::uint64_t nodes() const { return nodes_; }
  const std::vector<int>& best_choice() const { return best_choice_; }

 private:
  static constexpr double kEps = 1e-9;

  double reduced(int c) const {
    const auto& cand = model_.candidates[static_cast<size_t>(c)];
    double r = cand.delta;
    for (int id : cand.customers) r -= lambda_[static_cast<size_t>(id)];
    return r;
  }

  // Subgradient ascent on the Lagrangian of the coverage rows. Starts from
  // the amortized shares, which are already dual feasible.
  void compute_duals(const std::vector<int>& cands) {
    const auto& cs = model_.candidates;
    std::vector<double> share(static_cast<size_t>(n_ + 1),
                              std::numeric_limits<double>::infinity());
    for (int c : cands) {
      const auto& cand = cs[static_cast<size_t>(c)];
      const double s = cand.delta / static_cast<double>(cand.customers.size());
      for (int id : cand.customers) {
        share[static_cast<size_t>(id)] =
            std::min(share[static_cast<size_t>(id)], s);
      }
    }
    double base = 0.0;
    for (int i = 1; i <= n_; ++i) {
      const double s = share[static_cast<size_t>(i)];
      lambda_[static_cast<size_t>(i)] = std::isfinite(s) ? s : 0.0;
      base += lambda_[static_cast<size_t>(i)];
    }
    dual_bound_ = base;
    if (cands.empty()) return;

    std::vector<double> lam = lambda_;
    std::vector<double> grad(static_cast<size_t>(n_ + 1));
    double theta = 1.0;
    int stale = 0;
    for (int it = 0; it < 600 && theta > 1e-4; ++it) {
      double value = 0.0;
      for (int i = 1; i <= n_; ++i) {
        value += lam[static_cast<size_t>(i)];
        grad[static_cast<size_t>(i)] = 1.0;
      }
      for (int c : cands) {
        const auto& cand = cs[static_cast<size_t>(c)];
        double r = cand.delta;
        for (int id : cand.customers) r -= lam[static_cast<size_t>(id)];
        if (r < 0.0) {
          value += r;
          for (int id : cand.customers) grad[static_cast<size_t>(id)] -= 1.0;
        }
      }
      if (value > dual_bound_ + 1e-12) {
        dual_bound_ = value;
        lambda_ = lam;
        stale = 0;
      } else if (++stale >= 20) {
        theta *= 0.5;
        stale = 0;
      }
      double norm = 0.0;
      for (int i = 1; i <= n_; ++i) {
        norm += grad[static_cast<size_t>(i)] * grad[static_cast<size_t>(i)];
      }
      if (norm == 0.0) break;  // relaxation solved by an integral point
      const double target = std::isfinite(best_)
                                ? best_
                                : dual_bound_ * 1.05 + 1.0;
      const double gap = std::max(target - value, 1e-6 * (1.0 + std::fabs(value)));
      const double step = theta * gap / norm;
      for (int i = 1; i <= n_; ++i) {
        lam[static_cast<size_t>(i)] += step * grad[static_cast<size_t>(i)];
      }
    }
  }

  // Keeps the joins that can still be part of a solution cheaper than best_
  // and lays out the search structures for them.
  void build_index() {
    const auto& cs = model_.candidates;
    active_.clear();
    reduced_.clear();
    for (size_t c = 0; c < cs.size(); ++c) {
      const double r = reduced(static_cast<int>(c));
      if (dual_bound_ + std::max(0.0, r) < best_ - kEps) {
        active_.push_back(static_cast<int>(c));
        reduced_.push_back(r);
      }
    }
    bits_.assign(active_.size() * words_, 0);
    std::vector<int> count(static_cast<size_t>(n_ + 1), 0);
    negative_.clear();
    for (size_t a = 0; a < active_.size(); ++a) {
      for (int id : cs[static_cast<size_t>(active_[a])].customers) {
        bits_[a * words_ + static_cast<size_t>(id) / 64] |=
            std::uint64_t{1} << (id % 64);
        ++count[static_cast<size_t>(id)];
      }
      if (reduced_[a] < 0.0) negative_.push_back(static_cast<int>(a));
    }
    // Branch on scarce customers first.
    order_.resize(static_cast<size_t>(n_));
    std::iota(order_.begin(), order_.end(), 1);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return count[static_cast<size_t>(a)] < count[static_cast<size_t>(b)];
    });
    std::vector<int> rank(static_cast<size_t>(n_ + 1), 0);
    for (int r = 0; r < n_; ++r) rank[static_cast<size_t>(order_[r])] = r;

    group_.assign(static_cast<size_t>(n_), {});
    share_.assign(static_cast<size_t>(n_ + 1), {});
    for (size_t a = 0; a < active_.size(); ++a) {
      const auto& cand = cs[static_cast<size_t>(active_[a])];
      const double r = reduced_[a] / static_cast<double>(cand.customers.size());
      int first = n_;
      for (int id : cand.customers) {
        first = std::min(first, rank[static_cast<size_t>(id)]);
        share_[static_cast<size_t>(id)].push_back(
            {lambda_[static_cast<size_t>(id)] + r, static_cast<int>(a)});
      }
      group_[static_cast<size_t>(first)].push_back(static_cast<int>(a));
    }
    // Most promising joins first: lowest reduced cost, then lowest cost.
    for (auto& g : group_) {
      std::stable_sort(g.begin(), g.end(), [&](int a, int b) {
        if (reduced_[static_cast<size_t>(a)] != reduced_[static_cast<size_t>(b)]) {
          return reduced_[static_cast<size_t>(a)] < reduced_[static_cast<size_t>(b)];
        }
        return delta(a) < delta(b);
      });
    }
    for (auto& list : share_) {
      std::stable_sort(list.begin(), list.end(),
                       [](const auto& a, const auto& b) {
                         return a.first < b.first;
                       });
    }
    covered_.assign(words_, 0);
    chosen_.clear();
  }

  double delta(int a) const {
    return model_.candidates[static_cast<size_t>(active_[static_cast<size_t>(a)])]
        .delta;
  }

  bool is_covered(int id) const {
    return (covered_[static_cast<size_t>(id) / 64] >> (id % 64)) & 1u;
  }

  bool compatible(int a) const {
    const std::uint64_t* b = &bits_[static_cast<size_t>(a) * words_];
    for (size_t w = 0; w < words_; ++w) {
      if (b[w] & covered_[w]) return false;
    }
    return true;
  }

  void toggle(int a) {
    const std::uint64_t* b = &bits_[static_cast<size_t>(a) * words_];
    for (size_t w = 0; w < words_; ++w) covered_[w] ^= b[w];
  }

  // Two lower bounds on completing the partial solution, both derived from
  // the duals: each uncovered customer pays its cheapest compatible share
  // lambda_i + r/|c|, or the Lagrangian of the remaining rows.
  bool can_improve(size_t pos, double cost) const {
    double share_bound = cost;
    double lagrange = cost;
    for (size_t r = pos; r < order_.size(); ++r) {
      const int id = order_[r];
      if (is_covered(id)) continue;
      lagrange += lambda_[static_cast<size_t>(id)];
      bool any = false;
      for (const auto& [share, a] : share_[static_cast<size_t>(id)]) {
        if (compatible(a)) {
          share_bound += share;
          any = true;
          break;
        }
      }
      if (!any) return false;
      if (share_bound >= best_ - kEps) return false;
    }
    for (int a : negative_) {
      if (compatible(a)) lagrange += reduced_[static_cast<size_t>(a)];
    }
    return lagrange < best_ - kEps;
  }

  void dfs(size_t pos, double cost) {
    ++nodes_;
    if (opts_.max_nodes != 0 && nodes_ > opts_.max_nodes) {
      aborted_ = true;
      return;
    }
    while (pos < order_.size() && is_covered(order_[pos])) ++pos;
    if (pos == order_.size()) {
      if (cost < best_ - kEps) {
        best_ = cost;
        best_choice_.clear();
        for (int a : chosen_) best_choice_.push_back(active_[static_cast<size_t>(a)]);
        found_ = true;
        restart_ = true;
      }
      return;
    }
    if (!can_improve(pos, cost)) return;
    for (int a : group_[pos]) {
      const double next = cost + delta(a);
      if (next >= best_ - kEps) continue;
      if (!compatible(a)) continue;
      toggle(a);
      chosen_.push_back(a);
      dfs(pos + 1, next);
      chosen_.pop_back();
      toggle(a);
      if (aborted_ || restart_) return;
    }
  }

  const RelinkModel& model_;
  const RelinkOptions& opts_;
  int n_ = 0;
  size_t words_ = 0;
  std::vector<double> lambda_;
  double dual_bound_ = 0.0;
  std::vector<int> active_;
  std::vector<double> reduced_;
  std::vector<int> negative_;
  std::vector<std::uint64_t> bits_;
  std::vector<int> order_;
  std::vector<std::vector<int>> group_;
  std::vector<std::vector<std::pair<double, int>>> share_;
  std::vector<std::uint64_t> covered_;
  std::vector<int> chosen_;
  std::vector<int> best_choice_;
  double best_ = 0.0;
  bool found_ = false;
  bool aborted_ = false;
  bool restart_ = false;
  std::uint64_t nodes_ = 0;
};

}  // namespace

RelinkResult solve_relink(const RelinkModel& model, const DistanceMatrix& dm,
                          const RelinkOptions& opts) {
  if (auto hole = uncovered_customer(model)) throw RelinkInfeasible(*hole);
  RelinkSearch search(model, opts);
  search.run();
  RelinkResult result;
  result.nodes = search.nodes();
  result.proven_optimal = !search.aborted();
  if (!search.found()) return result;
  result.chosen = search.best_choice();
  std::vector<Route> routes;
  for (int c : result.chosen) {
    const auto& cand = model.candidates[static_cast<size_t>(c)];
    const auto& o = model.pieces.left[static_cast<size_t>(cand.o)];
    const auto& t = model.pieces.right[static_cast<size_t>(cand.t)];
    Route route;
    route.sequence = o.sequence;
    route.sequence.insert(route.sequence.end(), t.sequence.begin(),
                          t.sequence.end());
    route.cost = tour_cost(route.sequence, dm);
    route.load = cand.tau;
    routes.push_back(std::move(route));
  }
  result.solution = make_solution(std::move(routes));
  return result;
}

void write_relink_model(std::ostream& out, const RelinkModel& model) {
  out << fmt::format("# customers {} candidates {} Q {} K {} CG_glob {}\n",
                     model.num_customers, model.candidates.size(),
                     model.capacity, model.vehicles, model.cg_glob);
  for (size_t c = 0; c < model.candidates.size(); ++c) {
    const auto& j = model.candidates[c];
    out << fmt::format("z{} {} {} {} {}\n", c, j.o, j.t, j.delta, j.tau);
  }
  std::vector<std::vector<size_t>> rows(
      static_cast<size_t>(model.num_customers + 1));
  for (size_t c = 0; c < model.candidates.size(); ++c) {
    for (int id : model.candidates[c].customers) {
      rows[static_cast<size_t>(id)].push_back(c);
    }
  }
  for (int i = 1; i <= model.num_customers; ++i) {
    out << "cover " << i << ":";
    for (size_t c : rows[static_cast<size_t>(i)]) out << " z" << c;
    out << " = 1\n";
  }
}

Ctr3Result ctr3_solve(const Instance& inst, const CcbcConfig& cfg,
                      const Ctr3Options& opts) {
  const DistanceMatrix dm(inst);
  const MultistartResult clustering = ccbc_multistart(inst, cfg);

  TspCache cache;
  std::vector<Solution> routed(clustering.solutions.size());
  parallel_for(routed.size(), cfg.threads, [&](size_t s) {
    routed[s] = route_all(clustering.solutions[s], inst, dm,
                          opts.exact_threshold, &cache);
  });

  Ctr3Result result;
  result.clusters_k = clustering.k;
  result.feasible_starts = static_cast<int>(routed.size());
  size_t best = 0;
  for (size_t s = 1; s < routed.size(); ++s) {
    if (routed[s].total_cost < routed[best].total_cost) best = s;
  }
  result.two_step = routed[best];
  result.best = routed[best];
  result.best_start = clustering.start_indices.empty()
                          ? 0
                          : clustering.start_indices[best];
  if (opts.skip_relink) return result;

  PruneOptions prune;
  prune.global_gap_rule = opts.global_gap_rule;
  prune.max_candidates = opts.max_candidates;
  prune.threads = cfg.threads;
  const int vehicles = result.two_step.k();
  RelinkModel model =
      prune_joins(cut_routes(routed, inst, dm), dm, inst.capacity(), vehicles,
                  inst.total_demand(), inst.num_customers(), prune);
  if (model.stats.overflow) {
    std::vector<size_t> idx(routed.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return routed[a].total_cost < routed[b].total_cost;
    });
    idx.resize(std::min(idx.size(),
                        static_cast<size_t>(std::max(opts.trim_to, 1))));
    std::vector<Solution> kept;
    for (size_t i : idx) kept.push_back(routed[i]);
    prune.max_candidates = 0;
    model = prune_joins(cut_routes(kept, inst, dm), dm, inst.capacity(), vehicles,
                        inst.total_demand(), inst.num_customers(), prune);
    result.pool_trimmed = true;
  }
  result.candidates = model.candidates.size();
  if (auto hole = uncovered_customer(model)) {
    result.relink_uncovered = hole;
    return result;
  }

  RelinkOptions relink;
  relink.upper_bound = result.two_step.total_cost;
  relink.max_nodes = opts.max_nodes;
  RelinkResult rr = solve_relink(model, dm, relink);
  result.relink_nodes = rr.nodes;
  result.relink_proven = rr.proven_optimal;
  if (rr.solution && rr.solution->total_cost < result.two_step.total_cost) {
    if (auto v = validate_solution(inst, *rr.solution); !v.empty()) {
      throw std::logic_error("relinked solution is infeasible:\n" +
                             describe(v));
    }
    result.best = std::move(*rr.solution);
    result.relink_improved = true;
  }
  return result;
}

}  // namespace ctr3
