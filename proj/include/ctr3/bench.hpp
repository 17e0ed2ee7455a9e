#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ctr3/ccbc.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/ruin_recreate.hpp"

namespace ctr3 {

/// Instance name -> best-known objective value.
using BestKnownTable = std::map<std::string, double, std::less<>>;

/// Reads "instance,best_known[,...]" rows (header required, extra columns
/// ignored). Throws InstanceError on malformed rows.
BestKnownTable parse_best_known(std::istream& in);
BestKnownTable load_best_known(const std::filesystem::path& path);

struct BenchConfig {
  CcbcConfig ccbc;
  Ctr3Options ctr3;
};

/// Short stable description of everything that influences the result except
/// the seed, e.g. "init=multistart;metric=customized;n_starts=100;...".
std::string config_fingerprint(const BenchConfig& cfg);

struct BenchReport {
  std::string instance;
  int n = 0;
  double value = 0.0;
  /// Routed clustering before relinking (equals value with skip_relink).
  double two_step_value = 0.0;
  std::optional<double> best_known;
  std::optional<double> gap_pct;
  double runtime_s = 0.0;
  int k = 0;
  std::optional<int> k_opt;
  std::uint64_t seed = 0;
  std::string config;
  double capacity = 0.0;
  double total_demand = 0.0;
  bool relink_proven = true;
  /// Why gap_pct is empty: "no-best-known" or "invalid: ...".
  std::string flag;
};

/// 100 (value - best_known) / best_known.
double gap_percent(double value, double best_known);

/// Unused capacity of the fleet in percent: (K Q - sum q) / (K Q) * 100.
double vehicle_fill_gap(int k, double capacity, double total_demand);
double vehicle_fill_gap(const BenchReport& report);

/// Runs the pipeline once and validates the result before filling in the gap.
BenchReport run_instance(const Instance& inst, const BenchConfig& cfg,
                         std::uint64_t seed, const BestKnownTable& best_known);

/// One report per (instance, seed) in instance-major order. Runs are spread
/// over `threads` workers; each run itself uses cfg.ccbc.threads.
std::vector<BenchReport> run_suite(const std::vector<Instance>& instances,
                                   const BenchConfig& cfg,
                                   const std::vector<std::uint64_t>& seeds,
                                   const BestKnownTable& best_known,
                                   int threads = 1);

/// Keeps the lowest-value report per instance (first seed on ties), in order
/// of first appearance.
std::vector<BenchReport> best_over_seeds(const std::vector<BenchReport>& reports);

struct SuiteSummary {
  std::string label;
  int runs = 0;
  int with_gap = 0;
  double mean_gap_pct = 0.0;
  /// Reports whose gap is exactly zero.
  int n_opt = 0;
  double mean_vehicle_fill_gap = 0.0;
  double total_runtime_s = 0.0;
};

SuiteSummary summarize(const std::vector<BenchReport>& reports,
                       std::string label = {});

/// Histogram of K - K_opt over reports that know K_opt.
std::map<int, int> vehicle_excess_histogram(
    const std::vector<BenchReport>& reports);

void write_reports_csv(std::ostream& out,
                       const std::vector<BenchReport>& reports);
void write_reports_jsonl(std::ostream& out,
                         const std::vector<BenchReport>& reports);
void write_summary_table(std::ostream& out,
                         const std::vector<SuiteSummary>& rows);

enum class AblationAxis { kInitializer, kMetric, kPipelineDepth, kStarts };

std::string_view to_string(AblationAxis axis);
std::optional<AblationAxis> parse_ablation_axis(std::string_view text);

struct AblationSpec {
  AblationAxis axis = AblationAxis::kInitializer;
  /// Level names: initializer and metric names, "2-step"/"3-step", or start
  /// counts for the sweep. Empty means every level of the axis (the sweep
  /// then uses 1, 5, 10, 25, 50, 100).
  std::vector<std::string> levels;
};

struct AblationGroup {
  std::string level;
  std::vector<BenchReport> reports;
  /// Starts sweep only: per instance, the best value over this and all
  /// smaller levels.
  std::vector<BenchReport> best_so_far;
};

/// Runs the suite once per level with that level applied on top of `base`.
/// Throws std::invalid_argument on an unknown or empty level.
std::vector<AblationGroup> run_ablation(const AblationSpec& spec,
                                        const std::vector<Instance>& instances,
                                        const std::vector<std::uint64_t>& seeds,
                                        const BestKnownTable& best_known,
                                        const BenchConfig& base = {},
                                        int threads = 1);

}  // namespace ctr3
