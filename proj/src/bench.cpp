#include "ctr3/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "ctr3/parallel.hpp"
#include "ctr3/validate.hpp"

namespace ctr3 {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string opt_num(const std::optional<double>& v) {
  return v ? num(*v) : std::string();
}

}  // namespace

BestKnownTable parse_best_known(std::istream& in) {
  BestKnownTable table;
  std::string line;
  int lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() < 2) {
      throw ParseError(lineno, "best-known row needs instance and value");
    }
    const std::string name = trim(cells[0]);
    const std::string text = trim(cells[1]);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value <= 0.0) {
      throw ParseError(lineno, fmt::format("bad best-known value '{}'", text));
    }
    if (!table.emplace(name, value).second) {
      throw ParseError(lineno, fmt::format("duplicate instance '{}'", name));
    }
  }
  return table;
}

BestKnownTable load_best_known(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InstanceError(fmt::format("cannot open {}", path.string()));
  }
  return parse_best_known(in);
}

std::string config_fingerprint(const BenchConfig& cfg) {
  return fmt::format(
      "init={};metric={};n_starts={};gap_limit={};exact={};relink={}",
      to_string(cfg.ccbc.initializer), to_string(cfg.ccbc.metric),
      cfg.ccbc.n_starts, num(cfg.ccbc.gap_limit), cfg.ctr3.exact_threshold,
      cfg.ctr3.skip_relink ? std::string("off")
                           : fmt::format("on:{}", cfg.ctr3.max_nodes));
}

double gap_percent(double value, double best_known) {
  return 100.0 * (value - best_known) / best_known;
}

double vehicle_fill_gap(int k, double capacity, double total_demand) {
  const double fleet = static_cast<double>(k) * capacity;
  return (fleet - total_demand) / fleet * 100.0;
}

double vehicle_fill_gap(const BenchReport& report) {
  return vehicle_fill_gap(report.k, report.capacity, report.total_demand);
}

BenchReport run_instance(const Instance& inst, const BenchConfig& cfg,
                         std::uint64_t seed, const BestKnownTable& best_known) {
  BenchReport r;
  r.instance = inst.name();
  r.n = inst.num_customers();
  r.seed = seed;
  r.config = config_fingerprint(cfg);
  r.capacity = inst.capacity();
  r.total_demand = inst.total_demand();
  r.k_opt = optimal_k_from_name(inst.name());
  if (auto it = best_known.find(inst.name()); it != best_known.end()) {
    r.best_known = it->second;
  } else {
    r.best_known = inst.best_known();
  }

  CcbcConfig ccbc = cfg.ccbc;
  ccbc.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  const Ctr3Result res = ctr3_solve(inst, ccbc, cfg.ctr3);
  r.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  r.value = res.best.total_cost;
  r.two_step_value = res.two_step.total_cost;
  r.k = res.best.k();
  r.relink_proven = res.relink_proven;

  const auto violations = validate_solution(inst, res.best);
  if (!violations.empty()) {
    r.flag = "invalid: " + describe(violations);
  } else if (!r.best_known) {
    r.flag = "no-best-known";
  } else {
    r.gap_pct = gap_percent(r.value, *r.best_known);
  }
  return r;
}

std::vector<BenchReport> run_suite(const std::vector<Instance>& instances,
                                   const BenchConfig& cfg,
                                   const std::vector<std::uint64_t>& seeds,
                                   const BestKnownTable& best_known,
                                   int threads) {
  std::vector<BenchReport> out(instances.size() * seeds.size());
  parallel_for(out.size(), threads, [&](size_t job) {
    const auto& inst = instances[job / seeds.size()];
    out[job] = run_instance(inst, cfg, seeds[job % seeds.size()], best_known);
  });
  return out;
}

std::vector<BenchReport> best_over_seeds(
    const std::vector<BenchReport>& reports) {
  std::vector<BenchReport> out;
  std::map<std::string, size_t, std::less<>> where;
  for (const auto& r : reports) {
    auto [it, fresh] = where.emplace(r.instance, out.size());
    if (fresh) {
      out.push_back(r);
    } else if (r.value < out[it->second].value) {
      out[it->second] = r;
    }
  }
  return out;
}

SuiteSummary summarize(const std::vector<BenchReport>& reports,
                       std::string label) {
  SuiteSummary s;
  s.label = std::move(label);
  s.runs = static_cast<int>(reports.size());
  double gap_sum = 0.0, fill_sum = 0.0;
  for (const auto& r : reports) {
    s.total_runtime_s += r.runtime_s;
    fill_sum += vehicle_fill_gap(r);
    if (!r.gap_pct) continue;
    ++s.with_gap;
    gap_sum += *r.gap_pct;
    if (*r.gap_pct == 0.0) ++s.n_opt;
  }
  if (s.with_gap > 0) s.mean_gap_pct = gap_sum / s.with_gap;
  if (s.runs > 0) s.mean_vehicle_fill_gap = fill_sum / s.runs;
  return s;
}

std::map<int, int> vehicle_excess_histogram(
    const std::vector<BenchReport>& reports) {
  std::map<int, int> h;
  for (const auto& r : reports) {
    if (r.k_opt) ++h[r.k - *r.k_opt];
  }
  return h;
}

void write_reports_csv(std::ostream& out,
                       const std::vector<BenchReport>& reports) {
  out << "instance,value,best_known,gap_pct,runtime_s,k,k_opt,seed,config\n";
  for (const auto& r : reports) {
    out << r.instance << ',' << num(r.value) << ',' << opt_num(r.best_known)
        << ',' << (r.gap_pct ? fmt::format("{:.4f}", *r.gap_pct) : "") << ','
        << fmt::format("{:.3f}", r.runtime_s) << ',' << r.k << ','
        << (r.k_opt ? std::to_string(*r.k_opt) : "") << ',' << r.seed << ','
        << r.config << '\n';
  }
}

void write_reports_jsonl(std::ostream& out,
                         const std::vector<BenchReport>& reports) {
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["instance"] = r.instance;
    j["value"] = r.value;
    j["two_step_value"] = r.two_step_value;
    j["best_known"] = r.best_known ? nlohmann::ordered_json(*r.best_known)
                                   : nlohmann::ordered_json(nullptr);
    j["gap_pct"] = r.gap_pct ? nlohmann::ordered_json(*r.gap_pct)
                             : nlohmann::ordered_json(nullptr);
    j["runtime_s"] = r.runtime_s;
    j["k"] = r.k;
    j["k_opt"] = r.k_opt ? nlohmann::ordered_json(*r.k_opt)
                         : nlohmann::ordered_json(nullptr);
    j["seed"] = r.seed;
    j["config"] = r.config;
    j["vehicle_fill_gap"] = vehicle_fill_gap(r);
    j["relink_proven"] = r.relink_proven;
    if (!r.flag.empty()) j["flag"] = r.flag;
    out << j.dump() << '\n';
  }
}

void write_summary_table(std::ostream& out,
                         const std::vector<SuiteSummary>& rows) {
  size_t width = 5;
  for (const auto& s : rows) width = std::max(width, s.label.size());
  out << fmt::format("{:<{}}  {:>6}  {:>9}  {:>5}  {:>8}  {:>10}\n", "label",
                     width, "runs", "mean_gap%", "N_opt", "fill_gap%",
                     "runtime_s");
  for (const auto& s : rows) {
    out << fmt::format("{:<{}}  {:>6}  {:>9.2f}  {:>5}  {:>8.2f}  {:>10.2f}\n",
                       s.label, width, s.runs, s.mean_gap_pct, s.n_opt,
                       s.mean_vehicle_fill_gap, s.total_runtime_s);
  }
}

std::string_view to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kInitializer: return "initializer";
    case AblationAxis::kMetric: return "metric";
    case AblationAxis::kPipelineDepth: return "depth";
    case AblationAxis::kStarts: return "n-starts";
  }
  return "?";
}

std::optional<AblationAxis> parse_ablation_axis(std::string_view text) {
  for (auto a : {AblationAxis::kInitializer, AblationAxis::kMetric,
                 AblationAxis::kPipelineDepth, AblationAxis::kStarts}) {
    if (text == to_string(a)) return a;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> default_levels(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kInitializer:
      return {"multistart", "kmeanspp", "sharding"};
    case AblationAxis::kMetric: return {"customized", "classical"};
    case AblationAxis::kPipelineDepth: return {"2-step", "3-step"};
    case AblationAxis::kStarts: return {"1", "5", "10", "25", "50", "100"};
  }
  return {};
}

BenchConfig apply_level(AblationAxis axis, const std::string& level,
                        BenchConfig cfg) {
  auto bad = [&] {
    return std::invalid_argument(
        fmt::format("unknown {} level '{}'", to_string(axis), level));
  };
  switch (axis) {
    case AblationAxis::kInitializer: {
      auto init = parse_initializer(level);
      if (!init) throw bad();
      cfg.ccbc.initializer = *init;
      break;
    }
    case AblationAxis::kMetric: {
      auto metric = parse_metric(level);
      if (!metric) throw bad();
      cfg.ccbc.metric = *metric;
      break;
    }
    case AblationAxis::kPipelineDepth:
      if (level == "2-step") {
        cfg.ctr3.skip_relink = true;
      } else if (level == "3-step") {
        cfg.ctr3.skip_relink = false;
      } else {
        throw bad();
      }
      break;
    case AblationAxis::kStarts: {
      int n = 0;
      auto [ptr, ec] = std::from_chars(level.data(), level.data() + level.size(), n);
      if (ec != std::errc() || ptr != level.data() + level.size() || n < 1) {
        throw bad();
      }
      cfg.ccbc.n_starts = n;
      break;
    }
  }
  return cfg;
}

}  // namespace

std::vector<AblationGroup> run_ablation(const AblationSpec& spec,
                                        const std::vector<Instance>& instances,
                                        const std::vector<std::uint64_t>& seeds,
                                        const BestKnownTable& best_known,
                                        const BenchConfig& base, int threads) {
  const auto levels =
      spec.levels.empty() ? default_levels(spec.axis) : spec.levels;
  // Validate every level before spending time on any run.
  std::vector<BenchConfig> configs;
  for (const auto& level : levels) {
    configs.push_back(apply_level(spec.axis, level, base));
  }
  std::vector<AblationGroup> groups;
  for (size_t l = 0; l < levels.size(); ++l) {
    AblationGroup g;
    g.level = levels[l];
    g.reports = run_suite(instances, configs[l], seeds, best_known, threads);
    if (spec.axis == AblationAxis::kStarts) {
      g.best_so_far = g.reports;
      if (!groups.empty()) {
        const auto& prev = groups.back().best_so_far;
        for (size_t i = 0; i < g.best_so_far.size(); ++i) {
          if (prev[i].value < g.best_so_far[i].value) {
            auto carried = prev[i];
            carried.config = g.best_so_far[i].config;
            carried.runtime_s = g.best_so_far[i].runtime_s;
            g.best_so_far[i] = carried;
          }
        }
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace ctr3
