#include "ctr3/instance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace ctr3 {

std::string_view to_string(DistancePolicy policy) {
  switch (policy) {
    case DistancePolicy::kExactEuclidean:
      return "exact-euclidean";
    case DistancePolicy::kRoundedEuclidean:
      return "rounded-euclidean";
  }
  return "unknown";
}

Instance Instance::create(std::string name, std::vector<Customer> customers,
                          double capacity, DistancePolicy policy,
                          std::optional<int> optimal_k,
                          std::optional<double> best_known) {
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw InstanceError(fmt::format("{}: capacity must be positive, got {}",
                                    name, capacity));
  }
  if (customers.size() < 2) {
    throw InstanceError(
        fmt::format("{}: instance needs a depot and at least one customer",
                    name));
  }
  for (size_t i = 0; i < customers.size(); ++i) {
    const Customer& c = customers[i];
    if (c.id != static_cast<int>(i)) {
      throw InstanceError(fmt::format(
          "{}: node at position {} has id {}, ids must be contiguous", name, i,
          c.id));
    }
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw InstanceError(
          fmt::format("{}: node {} has non-finite coordinates", name, c.id));
    }
    if (c.demand < 0.0 || !std::isfinite(c.demand)) {
      throw InstanceError(
          fmt::format("{}: node {} has invalid demand {}", name, c.id,
                      c.demand));
    }
    if (c.demand > capacity) {
      throw InstanceError(fmt::format(
          "{}: customer {} demand {} exceeds capacity {}", name, c.id,
          c.demand, capacity));
    }
  }
  if (customers.front().demand != 0.0) {
    throw InstanceError(fmt::format("{}: depot demand must be 0, got {}", name,
                                    customers.front().demand));
  }
  Instance inst;
  inst.name_ = std::move(name);
  inst.nodes_ = std::move(customers);
  inst.capacity_ = capacity;
  inst.policy_ = policy;
  inst.optimal_k_ = optimal_k;
  inst.best_known_ = best_known;
  return inst;
}

double Instance::total_demand() const {
  return std::accumulate(nodes_.begin(), nodes_.end(), 0.0,
                         [](double acc, const Customer& c) {
                           return acc + c.demand;
                         });
}

Instance Instance::with_policy(DistancePolicy policy) const {
  Instance copy = *this;
  copy.policy_ = policy;
  return copy;
}

Instance Instance::with_best_known(std::optional<double> value) const {
  Instance copy = *this;
  copy.best_known_ = value;
  return copy;
}

ParseError::ParseError(int line, const std::string& what)
    : InstanceError(line > 0 ? fmt::format("line {}: {}", line, what) : what),
      line_(line) {}

double tsplib_nint(double value) { return std::floor(value + 0.5); }

double euclidean(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

double node_distance(const Customer& a, const Customer& b,
                     DistancePolicy policy) {
  const double d = euclidean(a.x, a.y, b.x, b.y);
  return policy == DistancePolicy::kRoundedEuclidean ? tsplib_nint(d) : d;
}

DistanceMatrix::DistanceMatrix(const Instance& inst)
    : n_(static_cast<size_t>(inst.num_nodes())), data_(n_ * n_, 0.0) {
  const auto& nodes = inst.nodes();
  for (size_t i = 0; i < n_; ++i) {
    for (size_t j = i + 1; j < n_; ++j) {
      const double d =
          node_distance(nodes[i], nodes[j], inst.distance_policy());
      data_[i * n_ + j] = d;
      data_[j * n_ + i] = d;
    }
  }
}

std::optional<int> optimal_k_from_name(std::string_view name) {
  const auto pos = name.rfind("-k");
  if (pos == std::string_view::npos || pos + 2 >= name.size()) {
    return std::nullopt;
  }
  const std::string_view digits = name.substr(pos + 2);
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    return std::nullopt;
  }
  return value;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double to_number(std::string_view token, int line) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, fmt::format("expected a number, got '{}'", token));
  }
  return value;
}

long to_integer(std::string_view token, int line) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, fmt::format("expected an integer, got '{}'", token));
  }
  return value;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

enum class Section { kNone, kCoords, kDemands, kDepot };

struct RawNode {
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  bool has_coord = false;
  bool has_demand = false;
};

std::string format_number(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{:.17g}", v);
}

}  // namespace

Instance parse_cvrplib(std::string_view text) {
  std::string name;
  std::optional<long> dimension;
  std::optional<double> capacity;
  std::optional<int> demand_line;
  std::string weight_type;
  std::vector<RawNode> raw;
  std::vector<long> depots;
  bool saw_coords = false;
  bool saw_demands = false;
  bool saw_depot = false;
  Section section = Section::kNone;

  const auto lines = split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;
    if (line == "EOF") break;

    // Keyword lines carry a ':' or are bare section headers.
    const auto colon = line.find(':');
    const bool starts_alpha =
        std::isalpha(static_cast<unsigned char>(line.front())) != 0;
    if (starts_alpha) {
      std::string_view key = trim(line.substr(0, colon));
      const std::string_view value =
          colon == std::string_view::npos ? std::string_view{}
                                          : trim(line.substr(colon + 1));
      if (key == "NODE_COORD_SECTION" || key == "DEMAND_SECTION" ||
          key == "DEPOT_SECTION") {
        if (!dimension) {
          throw ParseError(line_no,
                           fmt::format("{} before DIMENSION", key));
        }
        if (key == "NODE_COORD_SECTION") {
          section = Section::kCoords;
          saw_coords = true;
        } else if (key == "DEMAND_SECTION") {
          section = Section::kDemands;
          saw_demands = true;
        } else {
          section = Section::kDepot;
          saw_depot = true;
        }
        continue;
      }
      section = Section::kNone;
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, fmt::format("malformed line '{}'", line));
      }
      if (key == "NAME") {
        name = std::string(value);
      } else if (key == "DIMENSION") {
        const long dim = to_integer(value, line_no);
        if (dim < 2) {
          throw ParseError(line_no, "DIMENSION must be at least 2");
        }
        dimension = dim;
        raw.assign(static_cast<size_t>(dim), RawNode{});
      } else if (key == "CAPACITY") {
        capacity = to_number(value, line_no);
        if (!(*capacity > 0.0)) {
          throw ParseError(line_no, "CAPACITY must be positive");
        }
      } else if (key == "EDGE_WEIGHT_TYPE") {
        weight_type = std::string(value);
        if (weight_type != "EUC_2D") {
          throw ParseError(
              line_no,
              fmt::format("unsupported EDGE_WEIGHT_TYPE '{}'", weight_type));
        }
      } else if (key == "TYPE") {
        if (value != "CVRP") {
          throw ParseError(line_no,
                           fmt::format("unsupported TYPE '{}'", value));
        }
      } else if (key == "COMMENT") {
        // ignored
      } else {
        throw ParseError(line_no, fmt::format("unknown keyword '{}'", key));
      }
      continue;
    }

    const auto tokens = split_ws(line);
    switch (section) {
      case Section::kCoords: {
        if (tokens.size() != 3) {
          throw ParseError(line_no, "coordinate line needs 'id x y'");
        }
        const long id = to_integer(tokens[0], line_no);
        if (id < 1 || id > *dimension) {
          throw ParseError(line_no, fmt::format("node id {} out of range", id));
        }
        RawNode& node = raw[static_cast<size_t>(id - 1)];
        if (node.has_coord) {
          throw ParseError(line_no, fmt::format("duplicate node {}", id));
        }
        node.x = to_number(tokens[1], line_no);
        node.y = to_number(tokens[2], line_no);
        node.has_coord = true;
        break;
      }
      case Section::kDemands: {
        if (tokens.size() != 2) {
          throw ParseError(line_no, "demand line needs 'id demand'");
        }
        const long id = to_integer(tokens[0], line_no);
        if (id < 1 || id > *dimension) {
          throw ParseError(line_no, fmt::format("node id {} out of range", id));
        }
        RawNode& node = raw[static_cast<size_t>(id - 1)];
        if (node.has_demand) {
          throw ParseError(line_no, fmt::format("duplicate demand for {}", id));
        }
        node.demand = to_number(tokens[1], line_no);
        if (node.demand < 0.0) {
          throw ParseError(line_no, "negative demand");
        }
        if (capacity && node.demand > *capacity) {
          throw InstanceError(fmt::format("line {}: demand {} of node {} exceeds "
                                          "capacity {}",
                                          line_no, format_number(node.demand), id,
                                          format_number(*capacity)));
        }
        if (!capacity && !demand_line) demand_line = line_no;
        node.has_demand = true;
        break;
      }
      case Section::kDepot: {
        for (const auto tok : tokens) {
          const long id = to_integer(tok, line_no);
          if (id == -1) {
            section = Section::kNone;
            break;
          }
          if (id < 1 || id > *dimension) {
            throw ParseError(line_no,
                             fmt::format("depot id {} out of range", id));
          }
          depots.push_back(id);
        }
        break;
      }
      case Section::kNone:
        throw ParseError(line_no,
                         fmt::format("data line outside a section: '{}'",
                                     line));
    }
  }

  if (!dimension) throw ParseError(0, "missing DIMENSION");
  if (!capacity) throw ParseError(0, "missing CAPACITY");
  if (weight_type.empty()) throw ParseError(0, "missing EDGE_WEIGHT_TYPE");
  if (!saw_coords) throw ParseError(0, "missing NODE_COORD_SECTION");
  if (!saw_demands) throw ParseError(0, "missing DEMAND_SECTION");
  for (size_t i = 0; i < raw.size(); ++i) {
    if (!raw[i].has_coord) {
      throw ParseError(0, fmt::format("node {} has no coordinates", i + 1));
    }
    if (!raw[i].has_demand) {
      throw ParseError(0, fmt::format("node {} has no demand", i + 1));
    }
    if (raw[i].demand > *capacity) {
      // Only reachable when DEMAND_SECTION preceded CAPACITY.
      throw InstanceError(fmt::format("line {}: demand of node {} exceeds capacity",
                                      demand_line.value_or(0), i + 1));
    }
  }
  if (saw_depot && depots.size() > 1) {
    throw ParseError(0, "more than one depot is not supported");
  }
  const long depot_id = depots.empty() ? 1 : depots.front();
  const size_t depot_index = static_cast<size_t>(depot_id - 1);
  if (raw[depot_index].demand != 0.0) {
    throw ParseError(0, fmt::format("depot {} has non-zero demand", depot_id));
  }

  std::vector<Customer> nodes;
  nodes.reserve(raw.size());
  nodes.push_back(
      Customer{0, raw[depot_index].x, raw[depot_index].y, 0.0});
  for (size_t i = 0; i < raw.size(); ++i) {
    if (i == depot_index) continue;
    nodes.push_back(Customer{static_cast<int>(nodes.size()), raw[i].x,
                             raw[i].y, raw[i].demand});
  }
  auto k = optimal_k_from_name(name);
  return Instance::create(std::move(name), std::move(nodes), *capacity,
                          DistancePolicy::kRoundedEuclidean, k);
}

Instance load_cvrplib(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InstanceError(fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cvrplib(buf.str());
}

std::string write_cvrplib(const Instance& inst) {
  std::string out;
  out += fmt::format("NAME : {}\n", inst.name());
  out += "TYPE : CVRP\n";
  out += fmt::format("DIMENSION : {}\n", inst.num_nodes());
  out += "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out += fmt::format("CAPACITY : {}\n", format_number(inst.capacity()));
  out += "NODE_COORD_SECTION\n";
  for (const Customer& c : inst.nodes()) {
    out += fmt::format("{} {} {}\n", c.id + 1, format_number(c.x),
                       format_number(c.y));
  }
  out += "DEMAND_SECTION\n";
  for (const Customer& c : inst.nodes()) {
    out += fmt::format("{} {}\n", c.id + 1, format_number(c.demand));
  }
  out += "DEPOT_SECTION\n 1\n -1\nEOF\n";
  return out;
}

PublishedSolution parse_cvrplib_solution(std::string_view text) {
  PublishedSolution sol;
  const auto lines = split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty() || line.starts_with('#')) continue;
    if (line.starts_with("Route")) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "route line without ':'");
      }
      std::vector<int> route;
      for (const auto tok : split_ws(line.substr(colon + 1))) {
        route.push_back(static_cast<int>(to_integer(tok, line_no)));
      }
      sol.routes.push_back(std::move(route));
    } else if (line.starts_with("Cost")) {
      const auto tokens = split_ws(line);
      if (tokens.size() != 2) throw ParseError(line_no, "malformed Cost line");
      sol.cost = to_number(tokens[1], line_no);
    } else {
      throw ParseError(line_no, fmt::format("unexpected line '{}'", line));
    }
  }
  return sol;
}

Instance generate_small_instance(int n, std::uint64_t seed) {
  if (n < 1 || n > 10) {
    throw std::invalid_argument(
        fmt::format("generate_small_instance: n must be in [1, 10], got {}",
                    n));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  std::uniform_real_distribution<double> demand(0.0, 10.0);
  std::vector<Customer> nodes;
  nodes.reserve(static_cast<size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    Customer c;
    c.id = i;
    c.x = coord(rng);
    c.y = coord(rng);
    c.demand = demand(rng);
    if (i == 0) c.demand = 0.0;
    nodes.push_back(c);
  }
  return Instance::create(fmt::format("rand-n{}-s{}", n, seed),
                          std::move(nodes), 10.0,
                          DistancePolicy::kExactEuclidean);
}

}  // namespace ctr3
