#include "ctr3/oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctr3 {

std::vector<int> mask_customers(BlockMask mask) {
  std::vector<int> out;
  for (int i = 1; i < 32; ++i) {
    if (mask & (BlockMask{1} << i)) out.push_back(i);
  }
  return out;
}

namespace {

void check_size(const Instance& inst, const char* who) {
  if (inst.num_customers() > kOracleMaxCustomers) {
    throw std::invalid_argument(fmt::format(
        "{}: {} customers exceeds the enumeration limit of {}", who,
        inst.num_customers(), kOracleMaxCustomers));
  }
}

struct Enumerator {
  const Instance& inst;
  std::optional<int> k;
  const std::function<void(std::span<const BlockMask>)>& fn;
  int n = 0;
  std::vector<BlockMask> blocks;
  std::vector<double> loads;

  void run(int i) {
    const int used = static_cast<int>(blocks.size());
    if (k && used + (n - i + 1) < *k) return;
    if (i > n) {
      if (!k || used == *k) fn(blocks);
      return;
    }
    const double q = inst.node(i).demand;
    const BlockMask bit = BlockMask{1} << i;
    for (int b = 0; b < used; ++b) {
      if (loads[static_cast<size_t>(b)] + q > inst.capacity() * (1 + 1e-12)) {
        continue;
      }
      blocks[static_cast<size_t>(b)] |= bit;
      loads[static_cast<size_t>(b)] += q;
      run(i + 1);
      blocks[static_cast<size_t>(b)] &= ~bit;
      loads[static_cast<size_t>(b)] -= q;
    }
    if (!k || used < *k) {
      blocks.push_back(bit);
      loads.push_back(q);
      run(i + 1);
      blocks.pop_back();
      loads.pop_back();
    }
  }
};

}  // namespace

void for_each_partition(
    const Instance& inst, std::optional<int> k,
    const std::function<void(std::span<const BlockMask>)>& fn) {
  check_size(inst, "for_each_partition");
  Enumerator e{inst, k, fn, inst.num_customers(), {}, {}};
  e.run(1);
}

Route price_route(std::span<const int> block, const Instance& inst,
                  const DistanceMatrix& dm) {
  if (block.size() > static_cast<size_t>(kOracleMaxCustomers)) {
    throw std::invalid_argument("price_route: block too large");
  }
  std::vector<int> perm(block.begin(), block.end());
  std::sort(perm.begin(), perm.end());
  Route best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int id : perm) best.load += inst.node(id).demand;
  if (perm.empty()) {
    best.cost = 0.0;
    return best;
  }
  do {
    double c = dm(0, perm.front()) + dm(perm.back(), 0);
    for (size_t i = 1; i < perm.size(); ++i) c += dm(perm[i - 1], perm[i]);
    if (c < best.cost) {
      best.cost = c;
      best.sequence = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ExactCvrpResult exact_cvrp(const Instance& inst, std::optional<int> k) {
  check_size(inst, "exact_cvrp");
  const DistanceMatrix dm(inst);
  const size_t full = size_t{1} << (inst.num_customers() + 1);
  std::vector<double> price(full, -1.0);
  auto priced = [&](BlockMask m) {
    double& p = price[m];
    if (p < 0.0) p = price_route(mask_customers(m), inst, dm).cost;
    return p;
  };

  ExactCvrpResult result;
  result.value = std::numeric_limits<double>::infinity();
  std::vector<BlockMask> best;
  for_each_partition(inst, k, [&](std::span<const BlockMask> blocks) {
    ++result.enumerated;
    double v = 0.0;
    for (BlockMask m : blocks) v += priced(m);
    if (v < result.value - 1e-9) {
      result.value = v;
      best.assign(blocks.begin(), blocks.end());
    }
  });
  if (best.empty()) {
    throw OracleInfeasible(
        k ? fmt::format("no capacity-feasible partition into {} routes", *k)
          : std::string("no capacity-feasible partition"));
  }
  std::vector<Route> routes;
  for (BlockMask m : best) {
    routes.push_back(price_route(mask_customers(m), inst, dm));
  }
  result.witness = make_solution(std::move(routes));
  result.value = result.witness.total_cost;
  return result;
}

ExactCcbcResult exact_ccbc(const Instance& inst, int k, bool include_depot) {
  check_size(inst, "exact_ccbc");
  if (k < 1 || k > inst.num_customers()) {
    throw std::invalid_argument(fmt::format("exact_ccbc: k={} out of range", k));
  }
  const size_t full = size_t{1} << (inst.num_customers() + 1);
  std::vector<double> memo(full, -1.0);
  auto block_withinss = [&](BlockMask m) {
    double& w = memo[m];
    if (w >= 0.0) return w;
    double sx = 0.0, sy = 0.0, cnt = 0.0;
    std::vector<int> ids = mask_customers(m);
    if (include_depot) ids.insert(ids.begin(), 0);
    for (int id : ids) {
      sx += inst.node(id).x;
      sy += inst.node(id).y;
      cnt += 1.0;
    }
    const double mx = sx / cnt, my = sy / cnt;
    w = 0.0;
    for (int id : ids) {
      const double dx = inst.node(id).x - mx, dy = inst.node(id).y - my;
      w += dx * dx + dy * dy;
    }
    return w;
  };

  ExactCcbcResult result;
  result.value = std::numeric_limits<double>::infinity();
  std::vector<BlockMask> best;
  for_each_partition(inst, k, [&](std::span<const BlockMask> blocks) {
    ++result.enumerated;
    double v = 0.0;
    for (BlockMask m : blocks) v += block_withinss(m);
    if (v < result.value - 1e-12) {
      result.value = v;
      best.assign(blocks.begin(), blocks.end());
    }
  });
  if (best.empty()) {
    throw OracleInfeasible(
        fmt::format("no capacity-feasible partition into {} clusters", k));
  }
  std::vector<std::vector<int>> clusters;
  for (BlockMask m : best) clusters.push_back(mask_customers(m));
  result.witness = make_cluster_solution(inst, std::move(clusters), include_depot);
  return result;
}

}  // namespace ctr3
