// Acceptance gate: one PASS/FAIL line per criterion with the measured values.
// Exit status counts failures outside --allow-fail.

#include <CLI11.hpp>
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "ctr3/bench.hpp"
#include "ctr3/explorer.hpp"
#include "ctr3/oracles.hpp"
#include "ctr3/validate.hpp"
#include "support.hpp"

namespace {

using namespace ctr3;
using Clock = std::chrono::steady_clock;

const std::filesystem::path kData = CTR3_TEST_DATA_DIR;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Gate {
  std::set<int> allowed;
  int failures = 0;

  void report(int id, bool ok, const std::string& detail) {
    const bool tolerated = !ok && allowed.count(id);
    fmt::print("{} criterion {}: {}{}\n", ok ? "PASS" : "FAIL", id, detail,
               tolerated ? " [allowed to fail]" : "");
    std::fflush(stdout);
    if (!ok && !tolerated) ++failures;
  }
};

Instance load(const std::string& name) {
  return load_cvrplib(kData / "instances" / (name + ".vrp"));
}

int name_size(const std::string& name) {
  return std::stoi(name.substr(name.find("-n") + 2));
}

// Runs, kept for the dominance check.
std::vector<BenchReport> g_runs;

std::vector<BenchReport> optima_reproduction(Gate& gate, const BestKnownTable& table) {
  const std::vector<std::string> names = {"E-n22-k4", "E-n23-k3", "E-n51-k5",
                                          "A-n44-k6", "P-n20-k2", "P-n21-k2",
                                          "P-n22-k2", "P-n40-k5", "P-n45-k5"};
  std::vector<Instance> insts;
  for (const auto& n : names) insts.push_back(load(n));
  BenchConfig cfg;
  cfg.ccbc.n_starts = 100;
  const auto t0 = Clock::now();
  auto runs = run_suite(insts, cfg, {1, 2, 3, 4, 5}, table);
  const double secs = seconds_since(t0);
  int hit = 0;
  std::string detail;
  for (const auto& r : best_over_seeds(runs)) {
    const bool opt = r.best_known && r.value == *r.best_known;
    hit += opt;
    detail += fmt::format(" {}={}{}", r.instance, r.value, opt ? "" : "*");
  }
  gate.report(1, hit >= 5 && secs <= 300.0,
              fmt::format("{}/9 optima in {:.1f}s (need >=5, <=300s);{}", hit,
                          secs, detail));
  g_runs.insert(g_runs.end(), runs.begin(), runs.end());
  return runs;
}

void mean_gap(Gate& gate, const BestKnownTable& table,
              const std::vector<BenchReport>& already, double already_secs) {
  std::set<std::string> done;
  for (const auto& r : already) done.insert(r.instance);
  std::vector<Instance> insts;
  for (const auto& [name, value] : table) {
    if (name_size(name) <= 60 && !done.count(name)) insts.push_back(load(name));
  }
  BenchConfig cfg;
  cfg.ccbc.n_starts = 100;
  const auto t0 = Clock::now();
  auto runs = run_suite(insts, cfg, {1, 2, 3, 4, 5}, table);
  const double secs = seconds_since(t0) + already_secs;
  g_runs.insert(g_runs.end(), runs.begin(), runs.end());
  runs.insert(runs.end(), already.begin(), already.end());
  const auto best = best_over_seeds(runs);
  const auto s = summarize(best);
  std::string worst;
  for (const auto& r : best) {
    if (r.gap_pct && *r.gap_pct > 3.0) worst += fmt::format(" {}={:.2f}%", r.instance, *r.gap_pct);
  }
  const bool complete = s.with_gap == s.runs;
  gate.report(2, complete && s.mean_gap_pct <= 3.0 && secs <= 1800.0,
              fmt::format("mean best-of-5 gap {:.3f}% over {} instances ({} with gap), "
                          "{} optimal, {:.1f}s (need <=3.0%, <=1800s); above 3%:{}",
                          s.mean_gap_pct, s.runs, s.with_gap, s.n_opt, secs,
                          worst.empty() ? " none" : worst));
}

void dominance(Gate& gate) {
  int bad = 0;
  for (const auto& r : g_runs) bad += !(r.value <= r.two_step_value);
  gate.report(3, bad == 0 && !g_runs.empty(),
              fmt::format("{} runs with 3-step > 2-step out of {}", bad, g_runs.size()));
}

void oracle_equivalence(Gate& gate) {
  int below = 0, match = 0, total = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const Instance inst = generate_small_instance(5 + static_cast<int>(i % 3), 1000 + i);
    CcbcConfig cfg;
    cfg.n_starts = 200;
    cfg.seed = i;
    const double heur = ctr3_solve(inst, cfg).best.total_cost;
    const double opt = exact_cvrp(inst).value;
    ++total;
    below += opt <= heur + 1e-9;
    match += std::abs(opt - heur) <= 1e-9;
  }
  int mismatches = 0;
  std::mt19937_64 rng(42);
  for (int t = 0; t < 200; ++t) {
    const Instance inst = generate_small_instance(8, 5000 + static_cast<std::uint64_t>(t));
    const DistanceMatrix dm(inst);
    std::vector<int> ids = {1, 2, 3, 4, 5, 6, 7, 8};
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(1 + rng() % 8);
    const Route r = solve_tsp(ids, inst, dm);
    mismatches += std::abs(r.cost - testing::brute_tsp(inst, ids)) > 1e-9;
  }
  const double frac = static_cast<double>(match) / total;
  gate.report(4, below == total && frac >= 0.6 && mismatches == 0,
              fmt::format("oracle <= ctr3 on {}/{}, matched {}/{} ({:.3f}, need >=0.60); "
                          "tsp exact vs brute mismatches {}/200",
                          below, total, match, total, frac, mismatches));
}

void connection_study_envelopes(Gate& gate) {
  const auto five = connection_study(5, 500, 7);
  const auto nine = connection_study(9, 500, 7);
  const double f5 = five.stats.count_i1 / 500.0;
  const double f9 = nine.stats.count_i1 / 500.0;
  const double g = five.stats.mean_gap_withinss;
  const bool ok = f5 >= 0.70 && f5 <= 0.92 && g >= 0.3 && g <= 4.0 && f9 < f5;
  gate.report(5, ok,
              fmt::format("n=5: I1 {}/500 ({:.3f}, need [0.70,0.92]), I2 mean gap "
                          "{:.3f}% (need [0.3,4.0]); n=9: I1 {}/500 ({:.3f}, need < n=5)",
                          five.stats.count_i1, f5, g, nine.stats.count_i1, f9));
}

void perturbation_suite(Gate& gate) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(0.0, 10.0), unit(0.0, 1.0);
  int witnesses = 0, draws = 0, violations = 0, literal_violations = 0;
  std::uint64_t inst_seed = 0;
  while (witnesses < 200) {
    ++draws;
    const int n = 5 + static_cast<int>(rng() % 5);
    const Instance inst = generate_small_instance(n, 9000 + inst_seed++);
    const int k = 2 + static_cast<int>(rng() % 2);
    CentroidSet omega(static_cast<size_t>(k));
    for (auto& p : omega) p = {coord(rng), coord(rng)};
    const auto assign = nearest_assignment(inst, omega);
    Partition s(static_cast<size_t>(k));
    for (int i = 1; i <= n; ++i) s[static_cast<size_t>(assign[static_cast<size_t>(i)])].push_back(i);
    bool empty = false;
    for (const auto& c : s) empty |= c.empty();
    if (empty) continue;
    const int k_star = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    if (!is_strict_centroid(inst, omega, s, k_star)) continue;
    ++witnesses;
    const auto region = perturbation_radius(inst, omega, s, k_star);
    for (int t = 0; t < 64; ++t) {
      const double a = 2 * M_PI * unit(rng);
      const double u = std::sqrt(unit(rng));
      for (bool literal : {false, true}) {
        const double radius = literal ? region.literal_radius : region.radius;
        CentroidSet moved = omega;
        moved[static_cast<size_t>(k_star)].x += radius * u * std::cos(a);
        moved[static_cast<size_t>(k_star)].y += radius * u * std::sin(a);
        const bool changed = nearest_assignment(inst, moved) != assign;
        (literal ? literal_violations : violations) += changed;
      }
    }
  }
  gate.report(6, violations == 0,
              fmt::format("{} witnesses ({} draws) x 64 perturbations: {} partition "
                          "changes (need 0); literal min(psi,beta) disk: {} changes",
                          witnesses, draws, violations, literal_violations));
}

void relink_exactness(Gate& gate) {
  int mismatches = 0, invalid = 0, infeasible = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Instance inst = testing::four_customer_instance();
    const RelinkModel model = testing::random_relink_model(700000 + seed, 20, &inst);
    const auto ref = testing::enumerate_subsets(model);
    const DistanceMatrix dm(inst);
    std::optional<double> got;
    try {
      const auto res = solve_relink(model, dm);
      if (res.solution) {
        got = res.solution->total_cost;
        invalid += !validate_solution(inst, *res.solution).empty();
      }
    } catch (const RelinkInfeasible&) {
    }
    if (!ref.feasible) ++infeasible;
    if (ref.feasible != got.has_value() || (got && std::abs(*got - ref.value) > 1e-9)) {
      ++mismatches;
    }
  }
  gate.report(7, mismatches == 0 && invalid == 0,
              fmt::format("500 models (<=20 candidates, {} without a cover): {} "
                          "mismatches, {} invalid solutions (need 0, 0)",
                          infeasible, mismatches, invalid));
}

std::string without_runtime(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() > 4) cols[4].clear();
    for (size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
  }
  return out;
}

void determinism(Gate& gate, const BestKnownTable& table) {
  std::vector<Instance> insts = {load("E-n22-k4"), load("P-n40-k5"), load("A-n32-k5")};
  BenchConfig one, many;
  one.ccbc.threads = 1;
  many.ccbc.threads = 3;
  const auto a = run_suite(insts, one, {1, 2}, table, 1);
  const auto b = run_suite(insts, many, {1, 2}, table, 2);
  std::ostringstream ca, cb;
  write_reports_csv(ca, a);
  write_reports_csv(cb, b);
  bool costs = a.size() == b.size();
  for (size_t i = 0; costs && i < a.size(); ++i) costs = a[i].value == b[i].value;
  const bool bytes = without_runtime(ca.str()) == without_runtime(cb.str());
  g_runs.insert(g_runs.end(), a.begin(), a.end());
  g_runs.insert(g_runs.end(), b.begin(), b.end());
  gate.report(8, costs && bytes,
              fmt::format("{} runs, 1 vs 3 clustering threads and 1 vs 2 suite "
                          "threads: costs {}, csv {}",
                          a.size(), costs ? "identical" : "differ",
                          bytes ? "identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance gate"};
  std::vector<int> allow, only;
  app.add_option("--allow-fail", allow, "Criteria whose failure does not fail the run");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  Gate gate;
  gate.allowed.insert(allow.begin(), allow.end());
  auto want = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  const auto table = load_best_known(kData / "best_known.csv");

  if (want(1) || want(2)) {
    const auto t0 = Clock::now();
    const auto first = optima_reproduction(gate, table);
    if (want(2)) mean_gap(gate, table, first, seconds_since(t0));
  }
  if (want(4)) oracle_equivalence(gate);
  if (want(5)) connection_study_envelopes(gate);
  if (want(6)) perturbation_suite(gate);
  if (want(7)) relink_exactness(gate);
  if (want(8)) determinism(gate, table);
  if (want(3)) dominance(gate);
  return gate.failures == 0 ? 0 : 1;
}
