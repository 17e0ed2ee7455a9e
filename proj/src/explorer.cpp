#include "ctr3/explorer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ctr3/parallel.hpp"

namespace ctr3 {

std::string_view to_string(InstanceClass c) {
  return c == InstanceClass::kI1 ? "I1" : "I2";
}

Classification classify_instance(const Instance& inst) {
  Classification out;
  ExactCvrpResult cvrp = exact_cvrp(inst);
  out.cvrp_cost = cvrp.value;
  // Same cluster count rule as the clustering heuristic: start at the
  // demand lower bound and add clusters while no feasible partition exists.
  std::optional<ExactCcbcResult> found;
  for (out.k = lower_bound_k(inst); !found; ++out.k) {
    try {
      found = exact_ccbc(inst, out.k, true);
    } catch (const OracleInfeasible&) {
      if (out.k >= inst.num_customers()) throw;
    }
  }
  --out.k;
  ExactCcbcResult ccbc = std::move(*found);
  out.withinss_c = ccbc.value;

  const DistanceMatrix dm(inst);
  const size_t full = size_t{1} << (inst.num_customers() + 1);
  std::vector<double> price(full, -1.0);
  auto priced = [&](BlockMask m) {
    double& p = price[m];
    if (p < 0.0) p = price_route(mask_customers(m), inst, dm).cost;
    return p;
  };
  auto mask_of = [](const std::vector<int>& block) {
    BlockMask m = 0;
    for (int id : block) m |= BlockMask{1} << id;
    return m;
  };

  for (const auto& block : ccbc.witness.clusters) {
    out.ccbc_routed_cost += priced(mask_of(block));
  }
  out.ccbc_witness = std::move(ccbc.witness);
  out.cvrp_witness = std::move(cvrp.witness);
  if (std::fabs(out.ccbc_routed_cost - out.cvrp_cost) <= 1e-9) {
    out.cls = InstanceClass::kI1;
    return out;
  }
  out.cls = InstanceClass::kI2;

  // Every partition that attains the optimum counts, whatever its size.
  double best_w = std::numeric_limits<double>::infinity();
  for_each_partition(inst, std::nullopt, [&](std::span<const BlockMask> blocks) {
    double v = 0.0;
    for (BlockMask m : blocks) v += priced(m);
    if (std::fabs(v - out.cvrp_cost) > 1e-9) return;
    std::vector<std::vector<int>> parts;
    for (BlockMask m : blocks) parts.push_back(mask_customers(m));
    best_w = std::min(best_w, partition_withinss(inst, parts, true));
  });
  out.withinss_v = best_w;
  out.gap_pct = out.withinss_c > 0.0
                    ? 100.0 * (best_w - out.withinss_c) / out.withinss_c
                    : 0.0;
  return out;
}

std::uint64_t study_instance_seed(std::uint64_t seed, int index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ull +
                    static_cast<std::uint64_t>(index) + 0x632be59bd9b4e019ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

StudyResult connection_study(int n, int count, std::uint64_t seed,
                             int threads) {
  if (count < 0) throw std::invalid_argument("connection_study: count < 0");
  StudyResult study;
  study.rows.resize(static_cast<size_t>(count));
  parallel_for(study.rows.size(), threads, [&](size_t i) {
    StudyRow& row = study.rows[i];
    row.index = static_cast<int>(i);
    row.seed = study_instance_seed(seed, row.index);
    row.result = classify_instance(generate_small_instance(n, row.seed));
  });
  study.stats.n = n;
  double gap_sum = 0.0;
  for (const auto& row : study.rows) {
    if (row.result.cls == InstanceClass::kI1) {
      ++study.stats.count_i1;
    } else {
      ++study.stats.count_i2;
      gap_sum += row.result.gap_pct.value_or(0.0);
    }
  }
  if (study.stats.count_i2 > 0) {
    study.stats.mean_gap_withinss = gap_sum / study.stats.count_i2;
  }
  return study;
}

void write_study_csv(std::ostream& out, const StudyResult& study) {
  out << "index,seed,n,class,k,cvrp_cost,ccbc_routed_cost,withinss_c,"
         "withinss_v,gap_pct\n";
  for (const auto& row : study.rows) {
    const auto& r = row.result;
    out << fmt::format("{},{},{},{},{},{:.9g},{:.9g},{:.9g},{},{}\n",
                       row.index, row.seed, study.stats.n, to_string(r.cls),
                       r.k, r.cvrp_cost, r.ccbc_routed_cost, r.withinss_c,
                       r.withinss_v ? fmt::format("{:.9g}", *r.withinss_v) : "",
                       r.gap_pct ? fmt::format("{:.6f}", *r.gap_pct) : "");
  }
}

void write_stats_csv(std::ostream& out,
                     const std::vector<ConnectionStats>& stats) {
  out << "n,count_I1,count_I2,mean_gap_withinss\n";
  for (const auto& s : stats) {
    out << fmt::format("{},{},{},{:.6f}\n", s.n, s.count_i1, s.count_i2,
                       s.mean_gap_withinss);
  }
}

namespace {

double dist(const Customer& c, const Point& p) {
  return std::hypot(c.x - p.x, c.y - p.y);
}

double sqdist(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double objective(const CentroidSet& mu, const CentroidSet& start) {
  double f = 0.0;
  for (size_t k = 0; k < mu.size(); ++k) f += sqdist(mu[k], start[k]);
  return f;
}

struct Cut {
  int customer;
  int own;
  int other;
};

std::vector<Cut> constraints(const Partition& s) {
  std::vector<Cut> out;
  const int k = static_cast<int>(s.size());
  for (int own = 0; own < k; ++own) {
    for (int id : s[static_cast<size_t>(own)]) {
      for (int other = 0; other < k; ++other) {
        if (other != own) out.push_back({id, own, other});
      }
    }
  }
  return out;
}

void check_partition(const Instance& inst, const Partition& s,
                     const CentroidSet& centroids, const char* who) {
  if (s.size() != centroids.size()) {
    throw std::invalid_argument(
        fmt::format("{}: {} blocks but {} centroids", who, s.size(),
                    centroids.size()));
  }
  std::vector<int> seen(static_cast<size_t>(inst.num_nodes()), 0);
  for (const auto& block : s) {
    for (int id : block) {
      if (id <= 0 || id > inst.num_customers() ||
          seen[static_cast<size_t>(id)]++) {
        throw std::invalid_argument(
            fmt::format("{}: partition is not valid at customer {}", who, id));
      }
    }
  }
  for (int i = 1; i <= inst.num_customers(); ++i) {
    if (!seen[static_cast<size_t>(i)]) {
      throw std::invalid_argument(
          fmt::format("{}: customer {} missing from partition", who, i));
    }
  }
}

// Penalized objective: squared displacement plus rho * sum of squared
// violations of d_own - d_other + margin <= 0.
double penalized(const Instance& inst, const std::vector<Cut>& cuts,
                 const CentroidSet& mu, const CentroidSet& start, double rho,
                 double margin, CentroidSet* grad) {
  double f = objective(mu, start);
  if (grad) {
    grad->assign(mu.size(), Point{});
    for (size_t k = 0; k < mu.size(); ++k) {
      (*grad)[k].x = 2.0 * (mu[k].x - start[k].x);
      (*grad)[k].y = 2.0 * (mu[k].y - start[k].y);
    }
  }
  for (const auto& cut : cuts) {
    const Customer& c = inst.node(cut.customer);
    const Point& a = mu[static_cast<size_t>(cut.own)];
    const Point& b = mu[static_cast<size_t>(cut.other)];
    const double da = dist(c, a), db = dist(c, b);
    const double h = da - db + margin;
    if (h <= 0.0) continue;
    f += rho * h * h;
    if (!grad) continue;
    const double w = 2.0 * rho * h;
    if (da > 0.0) {
      (*grad)[static_cast<size_t>(cut.own)].x += w * (a.x - c.x) / da;
      (*grad)[static_cast<size_t>(cut.own)].y += w * (a.y - c.y) / da;
    }
    if (db > 0.0) {
      (*grad)[static_cast<size_t>(cut.other)].x -= w * (b.x - c.x) / db;
      (*grad)[static_cast<size_t>(cut.other)].y -= w * (b.y - c.y) / db;
    }
  }
  return f;
}

void descend(const Instance& inst, const std::vector<Cut>& cuts,
             CentroidSet& mu, const CentroidSet& start, double rho,
             double margin, int iterations) {
  CentroidSet grad, trial;
  double step = 1.0 / (1.0 + rho);
  double value = penalized(inst, cuts, mu, start, rho, margin, &grad);
  for (int it = 0; it < iterations; ++it) {
    double gnorm = 0.0;
    for (const auto& g : grad) gnorm += g.x * g.x + g.y * g.y;
    if (gnorm < 1e-20) return;
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries) {
      trial = mu;
      for (size_t k = 0; k < mu.size(); ++k) {
        trial[k].x -= step * grad[k].x;
        trial[k].y -= step * grad[k].y;
      }
      const double v = penalized(inst, cuts, trial, start, rho, margin, nullptr);
      if (v <= value - 1e-4 * step * gnorm) {
        mu = trial;
        value = penalized(inst, cuts, mu, start, rho, margin, &grad);
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return;
  }
}

// Pushes violated bisectors past their customers.
void repair(const Instance& inst, const std::vector<Cut>& cuts,
            CentroidSet& mu, double margin) {
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool clean = true;
    for (const auto& cut : cuts) {
      const Customer& c = inst.node(cut.customer);
      Point& a = mu[static_cast<size_t>(cut.own)];
      Point& b = mu[static_cast<size_t>(cut.other)];
      if (dist(c, b) - dist(c, a) >= margin) continue;
      clean = false;
      double nx = b.x - a.x, ny = b.y - a.y;
      const double len = std::hypot(nx, ny);
      if (len == 0.0) {
        b.x += 1e-6;
        continue;
      }
      nx /= len;
      ny /= len;
      const double mx = 0.5 * (a.x + b.x), my = 0.5 * (a.y + b.y);
      const double beyond = (c.x - mx) * nx + (c.y - my) * ny;
      const double shift = beyond + margin + 1e-9;
      a.x += shift * nx;
      a.y += shift * ny;
      b.x += shift * nx;
      b.y += shift * ny;
    }
    if (clean) return;
  }
}

}  // namespace

std::vector<int> nearest_assignment(const Instance& inst,
                                    const CentroidSet& centroids) {
  std::vector<int> out(static_cast<size_t>(inst.num_nodes()), -1);
  for (int i = 1; i <= inst.num_customers(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < centroids.size(); ++k) {
      const double d = dist(inst.node(i), centroids[k]);
      if (d < best) {
        best = d;
        out[static_cast<size_t>(i)] = static_cast<int>(k);
      }
    }
  }
  return out;
}

double partition_margin(const Instance& inst, const Partition& s,
                        const CentroidSet& centroids) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& cut : constraints(s)) {
    const Customer& c = inst.node(cut.customer);
    margin = std::min(margin,
                      dist(c, centroids[static_cast<size_t>(cut.other)]) -
                          dist(c, centroids[static_cast<size_t>(cut.own)]));
  }
  return margin;
}

QpResult grid_search_centroids(const Instance& inst, const Partition& s,
                               const CentroidSet& start, double half_width,
                               double step, double margin) {
  check_partition(inst, s, start, "grid_search_centroids");
  QpResult best;
  best.from_grid = true;
  best.objective = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::floor(half_width / step + 1e-9));
  const size_t k = start.size();
  std::vector<int> idx(2 * k, -steps);
  CentroidSet mu = start;
  for (;;) {
    for (size_t c = 0; c < k; ++c) {
      mu[c].x = start[c].x + idx[2 * c] * step;
      mu[c].y = start[c].y + idx[2 * c + 1] * step;
    }
    const double f = objective(mu, start);
    if (f < best.objective) {
      const double m = partition_margin(inst, s, mu);
      if (m >= margin) {
        best.feasible = true;
        best.objective = f;
        best.centroids = mu;
        best.min_margin = m;
      }
    }
    size_t d = 0;
    while (d < idx.size() && ++idx[d] > steps) idx[d++] = -steps;
    if (d == idx.size()) break;
  }
  if (!best.feasible) best.objective = 0.0;
  return best;
}

QpResult nearest_centroids_qp(const Instance& inst, const Partition& s,
                              const CentroidSet& start,
                              const QpOptions& opts) {
  check_partition(inst, s, start, "nearest_centroids_qp");
  const auto cuts = constraints(s);
  QpResult best;
  best.objective = std::numeric_limits<double>::infinity();
  auto consider = [&](const CentroidSet& mu) {
    const double m = partition_margin(inst, s, mu);
    if (m < opts.margin - 1e-12) return;
    const double f = objective(mu, start);
    if (f < best.objective) {
      best.feasible = true;
      best.objective = f;
      best.centroids = mu;
      best.min_margin = m;
    }
  };

  if (partition_margin(inst, s, start) >= opts.margin) {
    best.feasible = true;
    best.centroids = start;
    best.objective = 0.0;
    best.min_margin = partition_margin(inst, s, start);
    return best;
  }

  std::vector<CentroidSet> seeds{start};
  CentroidSet means;
  for (const auto& block : s) {
    Point p;
    for (int id : block) {
      p.x += inst.node(id).x;
      p.y += inst.node(id).y;
    }
    means.push_back({p.x / static_cast<double>(block.size()),
                     p.y / static_cast<double>(block.size())});
  }
  seeds.push_back(means);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int r = 0; r < opts.random_starts; ++r) {
    CentroidSet mu = start;
    for (auto& p : mu) {
      p.x += noise(rng);
      p.y += noise(rng);
    }
    seeds.push_back(std::move(mu));
  }

  // A small cushion keeps the penalty solution on the feasible side.
  const double target = opts.margin + 1e-7;
  for (auto mu : seeds) {
    double rho = 1.0;
    for (int outer = 0; outer < opts.outer_iterations; ++outer) {
      descend(inst, cuts, mu, start, rho, target, opts.inner_iterations);
      if (partition_margin(inst, s, mu) >= opts.margin) break;
      rho *= 4.0;
    }
    repair(inst, cuts, mu, target);
    consider(mu);
  }
  if (!best.feasible && opts.grid_fallback && start.size() <= 2) {
    return grid_search_centroids(inst, s, start, opts.grid_half_width,
                                 opts.grid_step, opts.margin);
  }
  if (!best.feasible) best.objective = 0.0;
  return best;
}

bool is_strict_centroid(const Instance& inst, const CentroidSet& omega,
                        const Partition& s, int k_star, double tol) {
  const size_t ks = static_cast<size_t>(k_star);
  if (k_star < 0 || ks >= omega.size() || s.size() != omega.size()) {
    throw std::invalid_argument("is_strict_centroid: bad centroid index");
  }
  for (size_t k = 0; k < s.size(); ++k) {
    for (int id : s[k]) {
      const Customer& c = inst.node(id);
      if (k == ks) {
        for (size_t o = 0; o < omega.size(); ++o) {
          if (o != ks && !(dist(c, omega[o]) - dist(c, omega[ks]) > tol)) {
            return false;
          }
        }
      } else if (!(dist(c, omega[ks]) - dist(c, omega[k]) > tol)) {
        return false;
      }
    }
  }
  return true;
}

CentroidRegion perturbation_radius(const Instance& inst,
                                   const CentroidSet& omega,
                                   const Partition& s, int k_star) {
  if (!is_strict_centroid(inst, omega, s, k_star)) {
    throw std::invalid_argument(
        fmt::format("perturbation_radius: centroid {} is not strict", k_star));
  }
  CentroidRegion region;
  region.k_star = k_star;
  const size_t ks = static_cast<size_t>(k_star);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (omega.size() == 1) {
    region.unbounded = true;
    region.beta = region.beta_len = region.zeta_len = kInf;
    region.psi_alpha0 = region.literal_radius = region.radius = kInf;
    return region;
  }
  const Point& star = omega[ks];
  auto F = [&](int id, const Point& p) {
    const Customer& c = inst.node(id);
    const double dx = p.x - c.x, dy = p.y - c.y;
    return dx * dx + dy * dy;
  };

  region.beta = kInf;
  region.beta_len = kInf;
  for (size_t k = 0; k < s.size(); ++k) {
    if (k == ks) continue;
    for (int j : s[k]) {
      const double b = F(j, star) - F(j, omega[k]);
      if (b < region.beta) {
        region.beta = b;
        region.e = static_cast<int>(k);
        region.f = j;
      }
      region.beta_len = std::min(
          region.beta_len, dist(inst.node(j), star) - dist(inst.node(j), omega[k]));
    }
  }

  const Point& mu_e = omega[static_cast<size_t>(region.e)];
  double alpha0 = 0.0;
  region.zeta_len = kInf;
  for (int i : s[ks]) {
    const double eta = F(i, mu_e) - F(i, star);
    double zeta = kInf;
    double nearest_other = kInf;
    for (size_t k = 0; k < omega.size(); ++k) {
      if (k == ks) continue;
      zeta = std::min(zeta, F(i, omega[k]) - F(i, star));
      nearest_other = std::min(nearest_other, dist(inst.node(i), omega[k]));
    }
    region.zeta_len =
        std::min(region.zeta_len, nearest_other - dist(inst.node(i), star));
    if (eta > 0.0) alpha0 = std::max(alpha0, 1.0 - zeta / eta);
  }
  region.alpha0 = std::clamp(alpha0, 0.0, 1.0);
  region.psi_alpha0 =
      (1.0 - region.alpha0) * std::sqrt(sqdist(star, mu_e));
  region.literal_radius = std::min(region.psi_alpha0, region.beta);
  region.radius =
      std::min({region.psi_alpha0, region.beta_len, region.zeta_len});
  return region;
}

void write_region_scan_csv(std::ostream& out, const Instance& inst,
                           const Partition& s, const CentroidSet& omega, int k,
                           double x0, double x1, double y0, double y1,
                           double step) {
  check_partition(inst, s, omega, "write_region_scan_csv");
  if (!(step > 0.0)) throw std::invalid_argument("region scan: step <= 0");
  out << "x,y,feasible\n";
  CentroidSet mu = omega;
  const int nx = static_cast<int>(std::floor((x1 - x0) / step + 1e-9));
  const int ny = static_cast<int>(std::floor((y1 - y0) / step + 1e-9));
  for (int a = 0; a <= nx; ++a) {
    for (int b = 0; b <= ny; ++b) {
      mu[static_cast<size_t>(k)] = {x0 + a * step, y0 + b * step};
      const bool ok = partition_margin(inst, s, mu) >= 0.0;
      out << fmt::format("{:.6g},{:.6g},{}\n", mu[static_cast<size_t>(k)].x,
                         mu[static_cast<size_t>(k)].y, ok ? 1 : 0);
    }
  }
}

}  // namespace ctr3
