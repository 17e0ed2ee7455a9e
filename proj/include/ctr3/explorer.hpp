#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/oracles.hpp"
#include "ctr3/routing.hpp"

namespace ctr3 {

using Partition = std::vector<std::vector<int>>;

enum class InstanceClass { kI1, kI2 };

std::string_view to_string(InstanceClass c);

struct Classification {
  InstanceClass cls = InstanceClass::kI1;
  /// Cluster count of the clustering oracle: the demand lower bound, raised
  /// until a capacity-feasible partition exists.
  int k = 0;
  double cvrp_cost = 0.0;
  /// Cost of the optimal clustering once every cluster is routed optimally.
  double ccbc_routed_cost = 0.0;
  double withinss_c = 0.0;
  /// Smallest withinss among partitions that attain the CVRP optimum (I2).
  std::optional<double> withinss_v;
  std::optional<double> gap_pct;
  ClusterSolution ccbc_witness;
  Solution cvrp_witness;
};

/// Compares the optimal depot-anchored clustering with the CVRP optimum.
Classification classify_instance(const Instance& inst);

struct ConnectionStats {
  int n = 0;
  int count_i1 = 0;
  int count_i2 = 0;
  double mean_gap_withinss = 0.0;  // over I2 instances, percent
};

struct StudyRow {
  int index = 0;
  std::uint64_t seed = 0;
  Classification result;
};

struct StudyResult {
  ConnectionStats stats;
  std::vector<StudyRow> rows;
};

/// Seed of the i-th generated instance of a study.
std::uint64_t study_instance_seed(std::uint64_t seed, int index);

/// Generates `count` instances with `n` customers and classifies each.
StudyResult connection_study(int n, int count, std::uint64_t seed,
                             int threads = 1);

void write_study_csv(std::ostream& out, const StudyResult& study);
void write_stats_csv(std::ostream& out, const std::vector<ConnectionStats>& s);

/// Assignment induced by nearest centroids (ties to the lower index);
/// entry 0 (depot) is -1.
std::vector<int> nearest_assignment(const Instance& inst,
                                    const CentroidSet& centroids);

/// Smallest d(c, mu_other) - d(c, mu_own) over all customers of the
/// partition and all competing centroids. Negative when infeasible.
double partition_margin(const Instance& inst, const Partition& s,
                        const CentroidSet& centroids);

struct QpOptions {
  /// Required distance margin between own and competing centroids.
  double margin = 0.0;
  int random_starts = 8;
  std::uint64_t seed = 0;
  int outer_iterations = 40;
  int inner_iterations = 400;
  /// Grid fallback when every start fails (only tried for K <= 2).
  bool grid_fallback = true;
  double grid_half_width = 2.0;
  double grid_step = 0.1;
};

struct QpResult {
  bool feasible = false;
  CentroidSet centroids;
  double objective = 0.0;
  double min_margin = 0.0;
  bool from_grid = false;
};

/// Closest centroid combination to `start` (in summed squared distance) for
/// which every customer of s[k] is at least as close to centroid k as to any
/// other centroid. Penalty descent with bisector repair, multi-started.
QpResult nearest_centroids_qp(const Instance& inst, const Partition& s,
                              const CentroidSet& start,
                              const QpOptions& opts = {});

/// Exhaustive search over a box of side 2*half_width around `start` with the
/// given step per coordinate. Exponential in K; meant for K <= 2.
QpResult grid_search_centroids(const Instance& inst, const Partition& s,
                               const CentroidSet& start, double half_width,
                               double step, double margin = 0.0);

/// Own customers strictly closer to centroid k_star than to any other
/// centroid, foreign customers strictly closer to their own centroid.
bool is_strict_centroid(const Instance& inst, const CentroidSet& omega,
                        const Partition& s, int k_star, double tol = 1e-9);

struct CentroidRegion {
  int k_star = 0;
  /// Minimum over foreign customers of F_j(mu_k*) - F_j(mu_own) (squared units).
  double beta = 0.0;
  int e = -1;
  int f = -1;
  double alpha0 = 0.0;
  /// Distance from mu_k* to the alpha0 interpolant toward mu_e.
  double psi_alpha0 = 0.0;
  /// Same margins as beta and zeta but as plain distances.
  double beta_len = 0.0;
  double zeta_len = 0.0;
  /// min(psi_alpha0, beta): the region as drawn in the construction.
  double literal_radius = 0.0;
  /// min(psi_alpha0, beta_len, zeta_len): every point of this disk keeps the
  /// induced partition.
  double radius = 0.0;
  bool unbounded = false;
};

/// Throws std::invalid_argument when k_star is not strict.
CentroidRegion perturbation_radius(const Instance& inst,
                                   const CentroidSet& omega,
                                   const Partition& s, int k_star);

/// Scans a grid of positions for centroid `k` (others fixed) and writes
/// "x,y,feasible" rows, feasible meaning the partition is still induced.
void write_region_scan_csv(std::ostream& out, const Instance& inst,
                           const Partition& s, const CentroidSet& omega, int k,
                           double x0, double x1, double y0, double y1,
                           double step);

}  // namespace ctr3
