#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/routing.hpp"

namespace ctr3 {

enum class PieceSide { kLeft, kRight };

std::string_view to_string(PieceSide side);

struct PieceOrigin {
  int solution = 0;
  int route = 0;
  int cut = 0;
};

/// Half of a route. Left pieces start at the depot, right pieces end there;
/// the cost includes that single depot leg. Empty pieces have cost 0.
struct RoutePiece {
  PieceSide side = PieceSide::kLeft;
  std::vector<int> sequence;
  double internal_cost = 0.0;
  double load = 0.0;
  /// Bit i set when customer i is in the piece.
  std::vector<std::uint64_t> customer_set;
  PieceOrigin origin;

  bool empty() const { return sequence.empty(); }
};

struct PiecePool {
  std::vector<RoutePiece> left;
  std::vector<RoutePiece> right;
};

/// Cuts every route at each of its m+1 positions. Pieces are deduplicated
/// by (side, sequence); the first origin seen is kept.
PiecePool cut_routes(const std::vector<Solution>& solutions,
                     const Instance& inst, const DistanceMatrix& dm);

struct JoinCandidate {
  int o = 0;  // index into left pieces
  int t = 0;  // index into right pieces
  double delta = 0.0;
  double tau = 0.0;
  std::vector<int> customers;  // sorted
};

struct PruneOptions {
  /// Drop joins whose spare capacity exceeds the global spare capacity.
  bool global_gap_rule = true;
  /// Stop enumerating once this many joins survive (0 = no limit).
  std::size_t max_candidates = 0;
  int threads = 1;
};

struct PruneStats {
  std::size_t pairs = 0;
  std::size_t shared_customer = 0;
  std::size_t over_capacity = 0;
  std::size_t global_gap = 0;
  std::size_t empty_pair = 0;
  /// Same customer set as a cheaper (or earlier) join.
  std::size_t duplicate_set = 0;
  bool overflow = false;
};

struct RelinkModel {
  PiecePool pieces;
  std::vector<JoinCandidate> candidates;
  int num_customers = 0;
  double capacity = 0.0;
  int vehicles = 0;
  double cg_glob = 0.0;
  PruneStats stats;
};

/// Enumerates all (left, right) joins and keeps those that share no customer,
/// fit in a vehicle and (optionally) leave no more spare room than
/// K*Q - total_demand. Joins covering the same customer set collapse to the
/// cheapest one.
RelinkModel prune_joins(PiecePool pieces, const DistanceMatrix& dm,
                        double capacity, int vehicles, double total_demand,
                        int num_customers, const PruneOptions& opts = {});

/// First customer that no candidate covers, if any.
std::optional<int> uncovered_customer(const RelinkModel& model);

class RelinkInfeasible : public std::runtime_error {
 public:
  explicit RelinkInfeasible(int customer);
  int customer() const { return customer_; }

 private:
  int customer_;
};

struct RelinkOptions {
  /// Only solutions strictly cheaper than this are accepted.
  std::optional<double> upper_bound;
  /// Search node budget (0 = unlimited).
  std::uint64_t max_nodes = 0;
};

struct RelinkResult {
  std::optional<Solution> solution;
  std::vector<int> chosen;  // candidate indices
  std::uint64_t nodes = 0;
  bool proven_optimal = true;
};

/// Exact set partitioning over the join candidates by depth-first
/// branch-and-bound. Throws RelinkInfeasible when some customer has no
/// candidate at all.
RelinkResult solve_relink(const RelinkModel& model, const DistanceMatrix& dm,
                          const RelinkOptions& opts = {});

/// Plain-text listing: "z o t delta tau" per candidate, then one coverage
/// row per customer.
void write_relink_model(std::ostream& out, const RelinkModel& model);

struct Ctr3Options {
  int exact_threshold = kDefaultExactThreshold;
  bool skip_relink = false;
  bool global_gap_rule = true;
  std::size_t max_candidates = 200000;
  int trim_to = 25;
  /// Relink search budget (0 = unlimited). Past it the best cover found so
  /// far is kept and relink_proven is false.
  std::uint64_t max_nodes = 500000;
};

struct Ctr3Result {
  Solution best;
  /// Best routed clustering before relinking.
  Solution two_step;
  int best_start = 0;
  int clusters_k = 0;
  int feasible_starts = 0;
  std::size_t candidates = 0;
  std::uint64_t relink_nodes = 0;
  bool relink_proven = true;
  bool relink_improved = false;
  bool pool_trimmed = false;
  /// Set when the relink model left some customer uncovered.
  std::optional<int> relink_uncovered;
};

/// Cluster, route every start, then relink pieces pooled across all starts.
Ctr3Result ctr3_solve(const Instance& inst, const CcbcConfig& cfg,
                      const Ctr3Options& opts = {});

}  // namespace ctr3
