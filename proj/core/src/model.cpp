#include "bpnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace bpnet {

namespace {

std::string format_real(double v) {
  std::ostringstream os;
  os << v;  // default 6 significant digits, plenty for a diagnostic
  return os.str();
}

}  // namespace

std::size_t Network::add_node(std::string id, std::vector<std::string> states) {
  if (index_.count(id) != 0) {
    throw std::invalid_argument("duplicate node id: " + id);
  }
  std::size_t idx = nodes_.size();
  index_.emplace(id, idx);
  nodes_.push_back(Node{std::move(id), std::move(states)});
  cpts_.emplace_back(std::nullopt);
  return idx;
}

void Network::set_cpt(std::string_view child, std::vector<std::string> parents,
                      std::vector<std::vector<double>> rows) {
  std::size_t i = index_of(child);
  cpts_[i] = Cpt{nodes_[i].id, std::move(parents), std::move(rows)};
}

void Network::set_prior(std::string_view node, std::vector<double> row) {
  set_cpt(node, {}, {std::move(row)});
}

std::optional<std::size_t> Network::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::index_of(std::string_view id) const {
  auto i = find(id);
  if (!i) throw std::invalid_argument("unknown node: " + std::string(id));
  return *i;
}

std::optional<std::size_t> Network::state_index(std::size_t node,
                                                std::string_view state) const {
  const auto& states = nodes_[node].states;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s] == state) return s;
  }
  return std::nullopt;
}

const Cpt& Network::cpt(std::size_t i) const {
  if (!cpts_[i]) {
    throw std::invalid_argument("node has no cpt: " + nodes_[i].id);
  }
  return *cpts_[i];
}

Cpt& Network::mutable_cpt(std::size_t i) {
  if (!cpts_[i]) {
    throw std::invalid_argument("node has no cpt: " + nodes_[i].id);
  }
  return *cpts_[i];
}

std::vector<std::pair<std::size_t, std::size_t>> Network::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < nodes_.size(); ++c) {
    if (!cpts_[c]) continue;
    for (const auto& p : cpts_[c]->parents) {
      if (auto pi = find(p)) out.emplace_back(*pi, c);
    }
  }
  return out;
}

// --- mixed-radix ------------------------------------------------------------

std::size_t radix_count(std::span<const std::size_t> cards) {
  std::size_t n = 1;
  for (std::size_t c : cards) {
    if (c != 0 && n > std::numeric_limits<std::size_t>::max() / c) {
      return std::numeric_limits<std::size_t>::max();  // saturate
    }
    n *= c;
  }
  return n;
}

std::size_t radix_index(std::span<const std::size_t> digits,
                        std::span<const std::size_t> cards) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    idx = idx * cards[i] + digits[i];
  }
  return idx;
}

void radix_decode(std::size_t index, std::span<const std::size_t> cards,
                  std::span<std::size_t> digits) {
  for (std::size_t i = cards.size(); i-- > 0;) {
    digits[i] = index % cards[i];
    index /= cards[i];
  }
}

bool radix_next(std::span<std::size_t> digits, std::span<const std::size_t> cards) {
  for (std::size_t i = cards.size(); i-- > 0;) {
    if (++digits[i] < cards[i]) return true;
    digits[i] = 0;
  }
  return false;
}

// --- validation ---------------------------------------------------------

namespace {

void check_cpt(const Network& net, std::size_t i, Mode mode,
               ValidationReport& report) {
  const Node& node = net.node(i);
  if (!net.has_cpt(i)) {
    report.add_error(node.id, "no prior or cpt declared");
    return;
  }
  const Cpt& cpt = net.cpt(i);

  bool parents_ok = true;
  std::set<std::string> seen;
  std::vector<std::size_t> cards;
  for (const auto& p : cpt.parents) {
    if (!seen.insert(p).second) {
      report.add_error("cpt " + node.id, "duplicate parent: " + p);
      parents_ok = false;
    }
    auto pi = net.find(p);
    if (!pi) {
      report.add_error("cpt " + node.id, "unknown node: " + p);
      parents_ok = false;
    } else {
      cards.push_back(net.cardinality(*pi));
    }
  }

  if (parents_ok) {
    std::size_t expected = radix_count(cards);
    if (cpt.rows.size() != expected) {
      report.add_error("cpt " + node.id,
                       "expected " + std::to_string(expected) + " rows, found " +
                           std::to_string(cpt.rows.size()));
    }
  }

  for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
    const auto& row = cpt.rows[r];
    std::string loc = "cpt " + node.id + " row " + std::to_string(r);
    if (row.size() != node.states.size()) {
      report.add_error(loc, "expected " + std::to_string(node.states.size()) +
                                " entries, found " + std::to_string(row.size()));
      continue;
    }
    bool entries_ok = true;
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0) {
        report.add_error(loc, "entry " + format_real(v) + " is not a finite nonnegative real");
        entries_ok = false;
      }
    }
    if (!entries_ok) continue;
    if (mode == Mode::probabilistic) {
      double sum = std::accumulate(row.begin(), row.end(), 0.0);
      if (std::abs(sum - 1.0) > kCptTolerance) {
        report.add_error(loc, "row sum " + format_real(sum) + " != 1");
      }
    } else {
      double mx = *std::max_element(row.begin(), row.end());
      if (std::abs(mx - 1.0) > kCptTolerance) {
        report.add_error(loc, "row max " + format_real(mx) + " != 1");
      }
    }
  }
}

// Kahn's algorithm over indices with a min-heap, so equal-rank nodes come
// out in declaration order.
std::optional<std::vector<std::size_t>> try_topological(
    const Network& net, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::size_t n = net.node_count();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (auto [p, c] : edges) {
    ++indegree[c];
    out[p].push_back(c);
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t c : out[i]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace

ValidationReport validate_network(const Network& net, Mode mode) {
  ValidationReport report;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const Node& node = net.node(i);
    if (node.states.size() < 2) {
      report.add_error(node.id, "fewer than 2 states");
    }
    std::set<std::string> seen;
    for (const auto& s : node.states) {
      if (!seen.insert(s).second) {
        report.add_error(node.id, "duplicate state label: " + s);
      }
    }
    check_cpt(net, i, mode, report);
  }

  auto edges = net.edges();
  if (!try_topological(net, edges)) {
    report.add_error("graph", "directed cycle");
  }
  return report;
}

bool is_polytree(const Network& net) {
  std::size_t n = net.node_count();
  std::vector<std::size_t> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find_root = [&](std::size_t x) {
    while (root[x] != x) {
      root[x] = root[root[x]];
      x = root[x];
    }
    return x;
  };
  for (auto [p, c] : net.edges()) {
    std::size_t rp = find_root(p), rc = find_root(c);
    if (rp == rc) return false;  // skeleton cycle
    root[rp] = rc;
  }
  return true;
}

std::vector<std::string> topological_order(const Network& net) {
  auto order = try_topological(net, net.edges());
  if (!order) throw StructuralError("directed cycle");
  std::vector<std::string> ids;
  ids.reserve(order->size());
  for (std::size_t i : *order) ids.push_back(net.node(i).id);
  return ids;
}

void normalize_rows(Network& net, Mode mode) {
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    if (!net.has_cpt(i)) continue;
    for (auto& row : net.mutable_cpt(i).rows) {
      if (row.empty()) continue;
      double scale = mode == Mode::probabilistic
                         ? std::accumulate(row.begin(), row.end(), 0.0)
                         : *std::max_element(row.begin(), row.end());
      if (scale <= 0.0) continue;
      for (double& v : row) v /= scale;
    }
  }
}

std::size_t skeleton_diameter(const Network& net) {
  std::size_t n = net.node_count();
  std::vector<std::vector<std::size_t>> nbr(n);
  for (auto [p, c] : net.edges()) {
    nbr[p].push_back(c);
    nbr[c].push_back(p);
  }
  std::size_t diameter = 0;
  std::vector<std::size_t> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<std::size_t>::max());
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      diameter = std::max(diameter, dist[u]);
      for (std::size_t v : nbr[u]) {
        if (dist[v] == std::numeric_limits<std::size_t>::max()) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
  }
  return diameter;
}

Adjacency make_adjacency(const Network& net) {
  std::size_t n = net.node_count();
  Adjacency adj;
  adj.in_edges.resize(n);
  adj.out_edges.resize(n);
  adj.parents.resize(n);
  adj.children.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    if (!net.has_cpt(c)) throw std::invalid_argument("node has no cpt: " + net.node(c).id);
    for (const auto& pid : net.cpt(c).parents) {
      std::size_t p = net.index_of(pid);
      std::size_t e = adj.edge_list.size();
      adj.edge_list.emplace_back(p, c);
      adj.in_edges[c].push_back(e);
      adj.out_edges[p].push_back(e);
      adj.parents[c].push_back(p);
      adj.children[p].push_back(c);
    }
  }
  return adj;
}

std::vector<std::optional<std::size_t>> resolve_evidence(const Network& net,
                                                         const Evidence& ev) {
  std::vector<std::optional<std::size_t>> observed(net.node_count());
  for (const auto& [id, state] : ev.observations) {
    std::size_t i = net.index_of(id);
    auto s = net.state_index(i, state);
    if (!s) {
      throw std::invalid_argument("unknown state '" + state + "' for node " + id);
    }
    observed[i] = *s;
  }
  return observed;
}

std::vector<std::size_t> parent_cards(const Network& net, std::size_t i) {
  std::vector<std::size_t> cards;
  for (const auto& p : net.cpt(i).parents) {
    cards.push_back(net.cardinality(net.index_of(p)));
  }
  return cards;
}

bool joint_size_within(const Network& net, std::size_t limit) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    std::size_t c = net.cardinality(i);
    if (c == 0) continue;
    if (n > limit / c) return false;
    n *= c;
  }
  return n <= limit;
}

}  // namespace bpnet
