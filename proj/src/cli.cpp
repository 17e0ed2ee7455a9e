#include "ctr3/cli.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <set>
#include <sstream>

#include "ctr3/bench.hpp"
#include "ctr3/explorer.hpp"
#include "ctr3/instance.hpp"
#include "ctr3/oracles.hpp"
#include "ctr3/ruin_recreate.hpp"

#ifndef CTR3_DATA_DIR
#define CTR3_DATA_DIR "data"
#endif

namespace ctr3 {

namespace fs = std::filesystem;

fs::path default_data_dir() { return fs::path(CTR3_DATA_DIR); }

fs::path instance_dir() {
  if (const char* env = std::getenv("CTR3_INSTANCE_DIR"); env && *env) {
    return fs::path(env);
  }
  return default_data_dir() / "instances";
}

std::optional<std::vector<std::uint64_t>> parse_seed_list(std::string_view text) {
  auto number = [](std::string_view s) -> std::optional<std::uint64_t> {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      return std::nullopt;
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    auto lo = number(text.substr(0, dots));
    auto hi = number(text.substr(dots + 2));
    if (!lo || !hi || *lo > *hi || *hi - *lo >= 100000) return std::nullopt;
    for (auto s = *lo; s <= *hi; ++s) seeds.push_back(s);
    return seeds;
  }
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = std::min(text.find(',', pos), text.size());
    auto v = number(text.substr(pos, comma - pos));
    if (!v) return std::nullopt;
    seeds.push_back(*v);
    pos = comma + 1;
  }
  return seeds;
}

fs::path resolve_instance(const std::string& arg) {
  const fs::path direct(arg);
  if (fs::exists(direct)) return direct;
  if (direct.is_relative()) {
    const fs::path in_dir = instance_dir() / direct;
    if (fs::exists(in_dir)) return in_dir;
    fs::path with_ext = in_dir;
    with_ext += ".vrp";
    if (fs::exists(with_ext)) return with_ext;
  }
  return direct;
}

namespace {

struct Unreadable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Instance load_instance(const std::string& arg) {
  const fs::path path = resolve_instance(arg);
  std::ifstream probe(path);
  if (!probe || fs::is_directory(path)) {
    throw Unreadable(fmt::format("cannot read instance '{}'", arg));
  }
  try {
    return load_cvrplib(path);
  } catch (const ParseError& e) {
    throw Unreadable(fmt::format("{}:{}: {}", path.string(), e.line(), e.what()));
  }
}

struct PipelineFlags {
  int n_starts = 100;
  double gap_limit = 1e-4;
  int exact_threshold = kDefaultExactThreshold;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string metric = "customized";
  std::string init = "multistart";
  bool skip_relink = false;
  std::uint64_t relink_nodes = Ctr3Options{}.max_nodes;
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f, bool with_seed) {
  app->add_option("--n-starts", f.n_starts, "Clustering starts per round")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--gap-limit", f.gap_limit,
                  "Relative withinss change that stops a start")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--exact-threshold", f.exact_threshold,
                  "Largest cluster routed exactly")
      ->check(CLI::Range(0, 20))
      ->capture_default_str();
  if (with_seed) {
    app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  }
  app->add_option("--threads", f.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--metric", f.metric, "Assignment priority")
      ->check(CLI::IsMember({"customized", "classical"}))
      ->capture_default_str();
  app->add_option("--init", f.init, "Centroid initializer")
      ->check(CLI::IsMember({"multistart", "kmeanspp", "sharding"}))
      ->capture_default_str();
  app->add_flag("--skip-relink", f.skip_relink, "Stop after routing clusters");
  app->add_option("--relink-nodes", f.relink_nodes,
                  "Relink search node budget, 0 for unlimited")
      ->capture_default_str();
}

BenchConfig to_config(const PipelineFlags& f, int run_threads) {
  BenchConfig cfg;
  cfg.ccbc.n_starts = f.n_starts;
  cfg.ccbc.gap_limit = f.gap_limit;
  cfg.ccbc.seed = f.seed;
  cfg.ccbc.threads = run_threads;
  cfg.ccbc.metric = *parse_metric(f.metric);
  cfg.ccbc.initializer = *parse_initializer(f.init);
  cfg.ctr3.exact_threshold = f.exact_threshold;
  cfg.ctr3.skip_relink = f.skip_relink;
  cfg.ctr3.max_nodes = f.relink_nodes;
  return cfg;
}

// Output goes to --out when given, else to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Unreadable(fmt::format("cannot write '{}'", path));
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string fmt_cost(double v) { return fmt::format("{:g}", v); }

void print_solution(std::ostream& out, const std::string& format,
                    const Instance& inst, const Ctr3Result& res,
                    const BenchConfig& cfg) {
  const Solution& sol = res.best;
  if (format == "csv") {
    out << "route,load,cost,customers\n";
    for (size_t r = 0; r < sol.routes.size(); ++r) {
      const auto& route = sol.routes[r];
      out << r + 1 << ',' << fmt_cost(route.load) << ','
          << fmt_cost(route.cost) << ',' << fmt::format("{}", fmt::join(route.sequence, " "))
          << '\n';
    }
    out << "total," << fmt_cost(inst.total_demand()) << ','
        << fmt_cost(sol.total_cost) << ",\n";
    return;
  }
  if (format == "json-lines") {
    nlohmann::ordered_json j;
    j["instance"] = inst.name();
    j["cost"] = sol.total_cost;
    j["two_step_cost"] = res.two_step.total_cost;
    j["k"] = sol.k();
    j["seed"] = cfg.ccbc.seed;
    j["config"] = config_fingerprint(cfg);
    j["routes"] = nlohmann::ordered_json::array();
    for (const auto& route : sol.routes) {
      j["routes"].push_back(
          {{"sequence", route.sequence}, {"load", route.load}, {"cost", route.cost}});
    }
    out << j.dump() << '\n';
    return;
  }
  for (size_t r = 0; r < sol.routes.size(); ++r) {
    out << "Route #" << r + 1 << ':';
    for (int id : sol.routes[r].sequence) out << ' ' << id;
    out << '\n';
  }
  out << "Cost " << fmt_cost(sol.total_cost) << '\n';
  for (size_t r = 0; r < sol.routes.size(); ++r) {
    out << fmt::format("# Route #{} load {} / {}\n", r + 1,
                       fmt_cost(sol.routes[r].load), fmt_cost(inst.capacity()));
  }
}

// Instance order: group letter, then size, then name.
std::vector<Instance> select_instances(const std::vector<std::string>& names,
                                       const std::vector<std::string>& groups,
                                       int max_n) {
  std::vector<Instance> out;
  if (!names.empty()) {
    for (const auto& name : names) out.push_back(load_instance(name));
  } else {
    const fs::path dir = instance_dir();
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
      throw Unreadable(fmt::format("instance directory '{}' not found", dir.string()));
    }
    std::set<std::string> wanted;
    for (const auto& g : groups) wanted.insert(g);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".vrp") continue;
      const std::string stem = entry.path().stem().string();
      const std::string group = stem.substr(0, stem.find('-'));
      if (!wanted.empty() && !wanted.count(group)) continue;
      files.push_back(entry.path());
    }
    for (const auto& f : files) out.push_back(load_instance(f.string()));
    if (out.empty()) throw Usage("no instances match the selection");
  }
  if (max_n > 0) {
    std::erase_if(out, [&](const Instance& i) { return i.num_customers() > max_n; });
  }
  std::stable_sort(out.begin(), out.end(), [](const Instance& a, const Instance& b) {
    const char ga = a.name().empty() ? ' ' : a.name()[0];
    const char gb = b.name().empty() ? ' ' : b.name()[0];
    if (ga != gb) return ga < gb;
    if (a.num_customers() != b.num_customers()) {
      return a.num_customers() < b.num_customers();
    }
    return a.name() < b.name();
  });
  return out;
}

BestKnownTable load_table(const std::string& path) {
  const fs::path p = path.empty() ? default_data_dir() / "best_known.csv" : fs::path(path);
  try {
    return load_best_known(p);
  } catch (const ParseError& e) {
    throw Unreadable(fmt::format("{}:{}: {}", p.string(), e.line(), e.what()));
  } catch (const InstanceError& e) {
    throw Unreadable(e.what());
  }
}

void write_reports(std::ostream& out, std::ostream& err, const std::string& format,
                   const std::vector<BenchReport>& reports,
                   const std::vector<SuiteSummary>& summary) {
  if (format == "csv") {
    write_reports_csv(out, reports);
    write_summary_table(err, summary);
  } else if (format == "json-lines") {
    write_reports_jsonl(out, reports);
    write_summary_table(err, summary);
  } else {
    for (const auto& r : reports) {
      out << fmt::format("{:<12} seed {:>3}  value {:>8}  gap {:>7}  k {:>3}  {:.2f}s{}\n",
                         r.instance, r.seed, fmt_cost(r.value),
                         r.gap_pct ? fmt::format("{:.2f}%", *r.gap_pct) : "-",
                         r.k, r.runtime_s, r.flag.empty() ? "" : "  [" + r.flag + "]");
    }
    out << '\n';
    write_summary_table(out, summary);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Cluster, route and relink solver for the capacitated VRP"};
  app.require_subcommand(1);
  std::string format;
  std::string out_path;

  PipelineFlags solve_flags;
  std::string solve_instance;
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("instance", solve_instance, "Instance file or name")->required();
  add_pipeline_flags(solve, solve_flags, true);

  PipelineFlags bench_flags;
  std::vector<std::string> bench_instances, bench_groups;
  std::string bench_seeds = "1..5", bench_table;
  int bench_max_n = 0;
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("instances", bench_instances, "Instance files or names");
  bench->add_option("--group", bench_groups, "CVRPLIB set (A, B, E, P)")
      ->delimiter(',')
      ->check(CLI::IsMember({"A", "B", "E", "P"}));
  bench->add_option("--seeds", bench_seeds, "Seeds, e.g. 1..5 or 1,3")
      ->capture_default_str();
  bench->add_option("--best-known", bench_table, "Best-known CSV");
  bench->add_option("--max-n", bench_max_n, "Skip instances with more customers");
  add_pipeline_flags(bench, bench_flags, false);

  std::vector<int> explore_n;
  int explore_count = 500;
  std::uint64_t explore_seed = 0;
  int explore_threads = 1;
  std::string explore_rows;
  auto* explore = app.add_subcommand("explore", "Clustering versus routing optimum study");
  explore->add_option("--n", explore_n, "Customers per instance")
      ->delimiter(',')
      ->check(CLI::Range(1, kOracleMaxCustomers))
      ->required();
  explore->add_option("--count", explore_count, "Instances per size")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  explore->add_option("--seed", explore_seed, "Random seed")->capture_default_str();
  explore->add_option("--threads", explore_threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  explore->add_option("--rows", explore_rows, "Also write per-instance rows here");

  PipelineFlags ablate_flags;
  std::vector<std::string> ablate_instances, ablate_groups, ablate_levels;
  std::string ablate_axis = "initializer", ablate_seeds = "1..5", ablate_table;
  int ablate_max_n = 0;
  auto* ablate = app.add_subcommand("ablate", "Compare pipeline variants");
  ablate->add_option("--axis", ablate_axis, "Varied setting")
      ->check(CLI::IsMember({"initializer", "metric", "depth", "n-starts"}))
      ->capture_default_str();
  ablate->add_option("--levels", ablate_levels, "Levels to run (default: all)")
      ->delimiter(',');
  ablate->add_option("instances", ablate_instances, "Instance files or names");
  ablate->add_option("--group", ablate_groups, "CVRPLIB set (A, B, E, P)")
      ->delimiter(',')
      ->check(CLI::IsMember({"A", "B", "E", "P"}));
  ablate->add_option("--seeds", ablate_seeds, "Seeds, e.g. 1..5 or 1,3")
      ->capture_default_str();
  ablate->add_option("--best-known", ablate_table, "Best-known CSV");
  ablate->add_option("--max-n", ablate_max_n, "Skip instances with more customers");
  add_pipeline_flags(ablate, ablate_flags, false);

  for (auto* sub : {solve, bench, explore, ablate}) {
    sub->add_option("--out", out_path, "Write output here instead of stdout");
    sub->add_option("--format", format, "csv, json-lines or human")
        ->check(CLI::IsMember({"csv", "json-lines", "human"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed()) {
      const Instance inst = load_instance(solve_instance);
      BenchConfig cfg = to_config(solve_flags, solve_flags.threads);
      const Ctr3Result res = ctr3_solve(inst, cfg.ccbc, cfg.ctr3);
      Sink sink(out_path, out);
      print_solution(sink.get(), format.empty() ? "human" : format, inst, res, cfg);
      return kExitOk;
    }
    if (bench->parsed() || ablate->parsed()) {
      const bool is_bench = bench->parsed();
      const auto seeds = parse_seed_list(is_bench ? bench_seeds : ablate_seeds);
      if (!seeds || seeds->empty()) throw Usage("malformed --seeds");
      const auto table = load_table(is_bench ? bench_table : ablate_table);
      const auto instances =
          is_bench ? select_instances(bench_instances, bench_groups, bench_max_n)
                   : select_instances(ablate_instances, ablate_groups, ablate_max_n);
      const PipelineFlags& flags = is_bench ? bench_flags : ablate_flags;
      const BenchConfig cfg = to_config(flags, 1);
      const std::string fmt_name = format.empty() ? "csv" : format;
      if (is_bench) {
        const auto reports = run_suite(instances, cfg, *seeds, table, flags.threads);
        Sink sink(out_path, out);
        write_reports(sink.get(), err, fmt_name, reports,
                      {summarize(reports, "all runs"),
                       summarize(best_over_seeds(reports), "best over seeds")});
        return kExitOk;
      }
      AblationSpec spec;
      spec.axis = *parse_ablation_axis(ablate_axis);
      spec.levels = ablate_levels;
      const auto groups =
          run_ablation(spec, instances, *seeds, table, cfg, flags.threads);
      std::vector<BenchReport> all;
      std::vector<SuiteSummary> summary;
      for (const auto& g : groups) {
        all.insert(all.end(), g.reports.begin(), g.reports.end());
        summary.push_back(summarize(g.reports, fmt::format("{}={}", ablate_axis, g.level)));
        if (!g.best_so_far.empty()) {
          summary.push_back(summarize(g.best_so_far,
                                      fmt::format("best so far <= {}", g.level)));
        }
      }
      Sink sink(out_path, out);
      write_reports(sink.get(), err, fmt_name, all, summary);
      return kExitOk;
    }
    if (explore->parsed()) {
      std::vector<ConnectionStats> stats;
      std::vector<StudyResult> studies;
      for (int n : explore_n) {
        studies.push_back(connection_study(n, explore_count, explore_seed, explore_threads));
        stats.push_back(studies.back().stats);
      }
      Sink sink(out_path, out);
      const std::string fmt_name = format.empty() ? "csv" : format;
      if (fmt_name == "csv") {
        write_stats_csv(sink.get(), stats);
      } else if (fmt_name == "json-lines") {
        for (const auto& s : stats) {
          nlohmann::ordered_json j;
          j["n"] = s.n;
          j["count_I1"] = s.count_i1;
          j["count_I2"] = s.count_i2;
          j["mean_gap_withinss"] = s.mean_gap_withinss;
          sink.get() << j.dump() << '\n';
        }
      } else {
        sink.get() << fmt::format("{:>3}  {:>8}  {:>8}  {:>12}\n", "n", "I1", "I2",
                                  "gap_wss%");
        for (const auto& s : stats) {
          sink.get() << fmt::format("{:>3}  {:>8}  {:>8}  {:>12.3f}\n", s.n,
                                    s.count_i1, s.count_i2, s.mean_gap_withinss);
        }
      }
      if (!explore_rows.empty()) {
        Sink rows(explore_rows, out);
        for (size_t i = 0; i < studies.size(); ++i) {
          std::ostringstream block;
          write_study_csv(block, studies[i]);
          std::string text = block.str();
          // One header for the whole file.
          if (i > 0) text.erase(0, text.find('\n') + 1);
          rows.get() << text;
        }
      }
      return kExitOk;
    }
  } catch (const Usage& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Unreadable& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnreadable;
  } catch (const InstanceError& e) {
    err << "error: infeasible instance: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const OracleInfeasible& e) {
    err << "error: infeasible instance: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}

}  // namespace ctr3
