#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctr3 {

/// Index 0 is always the depot; customers are 1..N.
struct Customer {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;

  friend bool operator==(const Customer&, const Customer&) = default;
};

enum class DistancePolicy { kExactEuclidean, kRoundedEuclidean };

std::string_view to_string(DistancePolicy policy);

/// A CVRP instance: one depot, N >= 1 customers and a homogeneous fleet of
/// capacity Q. Immutable once built through `Instance::create`.
class Instance {
 public:
  /// Validates the invariants (contiguous ids, depot demand 0, every demand
  /// within capacity, at least one customer) and throws `InstanceError`
  /// naming the first violation.
  static Instance create(std::string name, std::vector<Customer> customers,
                         double capacity, DistancePolicy policy,
                         std::optional<int> optimal_k = std::nullopt,
                         std::optional<double> best_known = std::nullopt);

  const std::string& name() const { return name_; }
  const std::vector<Customer>& nodes() const { return nodes_; }
  const Customer& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  const Customer& depot() const { return nodes_.front(); }
  int num_customers() const { return static_cast<int>(nodes_.size()) - 1; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  double capacity() const { return capacity_; }
  DistancePolicy distance_policy() const { return policy_; }
  std::optional<int> optimal_k() const { return optimal_k_; }
  std::optional<double> best_known() const { return best_known_; }
  double total_demand() const;

  Instance with_policy(DistancePolicy policy) const;
  Instance with_best_known(std::optional<double> value) const;

  friend bool operator==(const Instance&, const Instance&) = default;

 private:
  Instance() = default;

  std::string name_;
  std::vector<Customer> nodes_;
  double capacity_ = 0.0;
  DistancePolicy policy_ = DistancePolicy::kExactEuclidean;
  std::optional<int> optimal_k_;
  std::optional<double> best_known_;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the TSPLIB reader; `line()` is 1-based, 0 when not tied to a
/// specific line (e.g. a missing section).
class ParseError : public InstanceError {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Dense symmetric matrix of node-to-node distances.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(const Instance& inst);

  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * n_ + static_cast<size_t>(j)];
  }
  int size() const { return static_cast<int>(n_); }

 private:
  size_t n_;
  std::vector<double> data_;
};

/// TSPLIB "nint": round half up to the nearest integer.
double tsplib_nint(double value);

double euclidean(double ax, double ay, double bx, double by);

/// Distance between two planar points under a policy.
double node_distance(const Customer& a, const Customer& b,
                     DistancePolicy policy);

/// Reads a TSPLIB95 CVRP file (EUC_2D only). The depot is moved to index 0
/// and the distance policy is rounded-euclidean.
Instance parse_cvrplib(std::string_view text);
Instance load_cvrplib(const std::filesystem::path& path);

/// Writes the instance back in the TSPLIB95 layout. Depot becomes node 1.
std::string write_cvrplib(const Instance& inst);

/// Parses "-k<digits>" at the end of a CVRPLIB name, e.g. E-n22-k4 -> 4.
std::optional<int> optimal_k_from_name(std::string_view name);

/// Published solution in CVRPLIB .sol layout: "Route #k: i j ..." lines and a
/// "Cost c" line; lines starting with '#' are skipped. Customer ids follow
/// the 1..N numbering of `Instance`.
struct PublishedSolution {
  std::vector<std::vector<int>> routes;
  std::optional<double> cost;
};

PublishedSolution parse_cvrplib_solution(std::string_view text);

/// Random instance with `n` customers on [0,10]^2, uniform demands on [0,10]
/// and capacity 10. One extra point is drawn first and becomes the depot
/// (demand forced to 0). Requires 1 <= n <= 10.
Instance generate_small_instance(int n, std::uint64_t seed);

}  // namespace ctr3
