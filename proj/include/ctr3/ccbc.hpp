#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "ctr3/instance.hpp"

namespace ctr3 {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using CentroidSet = std::vector<Point>;

/// A capacity-feasible partition of the customers into K clusters.
///
/// `clusters[k]` lists customer ids in ascending order; `assignment[i]` is the
/// cluster of customer i (index 0, the depot, holds -1). When
/// `depot_in_clusters` is set, the depot is counted as a member of every
/// cluster for centroid and withinss purposes (connection-study oracle only).
struct ClusterSolution {
  std::vector<int> assignment;
  std::vector<std::vector<int>> clusters;
  CentroidSet centroids;
  std::vector<double> loads;
  double withinss = 0.0;
  bool depot_in_clusters = false;

  int k() const { return static_cast<int>(clusters.size()); }
};

enum class Initializer { kRandomMultistart, kKmeansPlusPlus, kNaiveSharding };
enum class AssignmentMetric { kCustomized, kClassical };

std::string_view to_string(Initializer init);
std::string_view to_string(AssignmentMetric metric);
std::optional<Initializer> parse_initializer(std::string_view text);
std::optional<AssignmentMetric> parse_metric(std::string_view text);

struct CcbcConfig {
  int n_starts = 100;
  double gap_limit = 1e-4;
  int max_inner_iterations = 100;
  std::uint64_t seed = 0;
  Initializer initializer = Initializer::kRandomMultistart;
  AssignmentMetric metric = AssignmentMetric::kCustomized;
  int threads = 1;
  bool record_trace = false;
};

/// ceil(total demand / Q), at least 1.
int lower_bound_k(const Instance& inst);

/// Priority q / d(c, mu) of putting a customer into a cluster; +inf when the
/// customer sits on the centroid.
double assignment_metric(const Customer& c, const Point& centroid);

struct TraceRow {
  int start = 0;
  int k = 0;
  int iteration = 0;
  double withinss = 0.0;
};

struct StartResult {
  std::optional<ClusterSolution> solution;
  std::vector<TraceRow> trace;
  int iterations = 0;
};

/// One run of the capacity-guarded clustering from a fixed set of initial
/// centroids. Returns an empty solution when some customer cannot be placed.
std::optional<ClusterSolution> ccbc_single_start(const Instance& inst, int k,
                                                 const CentroidSet& init,
                                                 const CcbcConfig& cfg);

/// Same as `ccbc_single_start` but keeps the per-iteration withinss.
StartResult ccbc_single_start_traced(const Instance& inst, int k,
                                     const CentroidSet& init,
                                     const CcbcConfig& cfg, int start_index);

/// Initial centroids for start `start_index` at cluster count `k`. Random
/// streams are derived from (cfg.seed, start_index, k) only.
CentroidSet initial_centroids(const Instance& inst, int k,
                              const CcbcConfig& cfg, int start_index);

struct MultistartResult {
  /// Feasible solutions in start order, all run at `k` (a solution holds
  /// fewer clusters when one of them emptied out).
  std::vector<ClusterSolution> solutions;
  std::vector<int> start_indices;
  int k = 0;
  std::vector<TraceRow> trace;
};

/// Runs cfg.n_starts starts at K = lower_bound_k; if no start is feasible the
/// whole round is repeated with K + 1, up to K = N.
MultistartResult ccbc_multistart(const Instance& inst, const CcbcConfig& cfg);

/// Withinss of a partition with mean centroids. The depot is added to every
/// block when `include_depot` is set.
double partition_withinss(const Instance& inst,
                          const std::vector<std::vector<int>>& clusters,
                          bool include_depot);

/// Builds a ClusterSolution (mean centroids, loads, withinss) for a partition.
ClusterSolution make_cluster_solution(
    const Instance& inst, std::vector<std::vector<int>> clusters,
    bool include_depot);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace ctr3
