#include "bpnet/pearl.hpp"

#include <numeric>

#include "bpnet/errors.hpp"

namespace bpnet::pearl {

namespace {

void normalize_or_throw(std::vector<double>& v, const char* what) {
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum <= 0.0) {
    throw InconsistentEvidenceError(std::string("inconsistent evidence: all-zero ") + what);
  }
  for (double& x : v) x /= sum;
}

bool all_in_edges_sent(const EdgeMessages& msgs, std::size_t x) {
  for (std::size_t e : msgs.adj.in_edges[x]) {
    if (!msgs.pi_sent[e]) return false;
  }
  return true;
}

bool all_out_lambdas_sent(const EdgeMessages& msgs, std::size_t x) {
  for (std::size_t e : msgs.adj.out_edges[x]) {
    if (!msgs.lambda_sent[e]) return false;
  }
  return true;
}

}  // namespace

EdgeMessages init_messages(const Network& net, const Evidence& ev) {
  if (!is_polytree(net)) {
    throw StructuralError("network is not a polytree");
  }

  EdgeMessages msgs;
  std::size_t n = net.node_count();
  msgs.node_ids.reserve(n);
  msgs.cards.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    msgs.node_ids.push_back(net.node(i).id);
    msgs.cards.push_back(net.cardinality(i));
  }
  msgs.adj = make_adjacency(net);
  msgs.observed = resolve_evidence(net, ev);

  std::size_t m = msgs.adj.edge_count();
  msgs.pi.resize(m);
  msgs.lambda.resize(m);
  msgs.pi_sent.assign(m, 0);
  msgs.lambda_sent.assign(m, 0);

  msgs.node_pi.resize(n);
  msgs.node_lambda.resize(n);
  msgs.node_pi_ready.assign(n, 0);
  msgs.node_lambda_ready.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    if (msgs.observed[i]) {
      std::vector<double> indicator(msgs.cards[i], 0.0);
      indicator[*msgs.observed[i]] = 1.0;
      msgs.node_pi[i] = indicator;
      msgs.node_lambda[i] = std::move(indicator);
      msgs.node_pi_ready[i] = 1;
      msgs.node_lambda_ready[i] = 1;
      continue;
    }
    if (msgs.adj.parents[i].empty()) {
      msgs.node_pi[i] = net.cpt(i).rows[0];  // prior
      msgs.node_pi_ready[i] = 1;
    }
    if (msgs.adj.children[i].empty()) {
      msgs.node_lambda[i].assign(msgs.cards[i], 1.0);
      msgs.node_lambda_ready[i] = 1;
    }
  }
  return msgs;
}

std::vector<double> lambda_value(const EdgeMessages& msgs, std::size_t x) {
  std::vector<double> v(msgs.cards[x], 1.0);
  for (std::size_t e : msgs.adj.out_edges[x]) {
    if (!msgs.lambda_sent[e]) {
      throw StructuralError("scheduling error: lambda_value before all children reported");
    }
    for (std::size_t s = 0; s < v.size(); ++s) v[s] *= msgs.lambda[e][s];
  }
  return v;
}

std::vector<double> pi_value(const Network& net, const EdgeMessages& msgs, std::size_t x) {
  const Cpt& cpt = net.cpt(x);
  const auto& in = msgs.adj.in_edges[x];
  for (std::size_t e : in) {
    if (!msgs.pi_sent[e]) {
      throw StructuralError("scheduling error: pi_value before all parents reported");
    }
  }
  std::vector<std::size_t> cards = parent_cards(net, x);
  std::vector<std::size_t> digits(cards.size(), 0);
  std::vector<double> v(msgs.cards[x], 0.0);
  for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
    double w = 1.0;
    for (std::size_t k = 0; k < in.size(); ++k) w *= msgs.pi[in[k]][digits[k]];
    for (std::size_t s = 0; s < v.size(); ++s) v[s] += cpt.rows[row][s] * w;
    radix_next(digits, cards);
  }
  return v;
}

std::vector<double> pi_message_to_child(const EdgeMessages& msgs, std::size_t x,
                                        std::size_t child) {
  if (!msgs.node_pi_ready[x]) {
    throw StructuralError("scheduling error: pi message before pi(x) is available");
  }
  std::vector<double> v = msgs.node_pi[x];
  for (std::size_t e : msgs.adj.out_edges[x]) {
    if (msgs.adj.edge_list[e].second == child) continue;
    if (!msgs.lambda_sent[e]) {
      throw StructuralError("scheduling error: pi message before sibling lambdas arrived");
    }
    for (std::size_t s = 0; s < v.size(); ++s) v[s] *= msgs.lambda[e][s];
  }
  normalize_or_throw(v, "pi message");
  return v;
}

std::vector<double> lambda_message_to_parent(const Network& net, const EdgeMessages& msgs,
                                             std::size_t y, std::size_t parent) {
  if (!msgs.node_lambda_ready[y]) {
    throw StructuralError("scheduling error: lambda message before lambda(y) is available");
  }
  const Cpt& cpt = net.cpt(y);
  const auto& in = msgs.adj.in_edges[y];
  std::size_t parent_slot = in.size();
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (msgs.adj.edge_list[in[k]].first == parent) {
      parent_slot = k;
    } else if (!msgs.pi_sent[in[k]]) {
      throw StructuralError("scheduling error: lambda message before co-parent pi arrived");
    }
  }
  if (parent_slot == in.size()) {
    throw std::invalid_argument("lambda_message_to_parent: not a parent of the node");
  }

  std::vector<std::size_t> cards = parent_cards(net, y);
  std::vector<std::size_t> digits(cards.size(), 0);
  const auto& lam = msgs.node_lambda[y];
  std::vector<double> v(cards[parent_slot], 0.0);
  for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
    double w = 1.0;
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (k != parent_slot) w *= msgs.pi[in[k]][digits[k]];
    }
    double s = 0.0;
    for (std::size_t ys = 0; ys < lam.size(); ++ys) s += lam[ys] * cpt.rows[row][ys];
    v[digits[parent_slot]] += s * w;
    radix_next(digits, cards);
  }
  return v;
}

EdgeMessages propagate(const Network& net, const Evidence& ev) {
  EdgeMessages msgs = init_messages(net, ev);
  const Adjacency& adj = msgs.adj;
  std::size_t n = net.node_count();

  std::vector<std::size_t> topo;
  topo.reserve(n);
  for (const auto& id : topological_order(net)) topo.push_back(net.index_of(id));
  std::vector<std::size_t> sweep(topo);
  sweep.insert(sweep.end(), topo.rbegin(), topo.rend());

  std::size_t done_nodes = 0, total_node_values = 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    done_nodes += msgs.node_pi_ready[i] + msgs.node_lambda_ready[i];
  }

  auto visit = [&](std::size_t x) {
    if (!msgs.node_pi_ready[x] && all_in_edges_sent(msgs, x)) {
      msgs.node_pi[x] = pi_value(net, msgs, x);
      msgs.node_pi_ready[x] = 1;
      ++done_nodes;
    }
    if (!msgs.node_lambda_ready[x] && all_out_lambdas_sent(msgs, x)) {
      msgs.node_lambda[x] = lambda_value(msgs, x);
      msgs.node_lambda_ready[x] = 1;
      ++done_nodes;
    }
    if (msgs.node_pi_ready[x]) {
      for (std::size_t e : adj.out_edges[x]) {
        if (msgs.pi_sent[e]) continue;
        std::size_t child = adj.edge_list[e].second;
        bool ready = true;
        for (std::size_t other : adj.out_edges[x]) {
          if (other != e && !msgs.lambda_sent[other]) ready = false;
        }
        if (!ready) continue;
        msgs.pi[e] = pi_message_to_child(msgs, x, child);
        msgs.pi_sent[e] = 1;
        ++msgs.messages_sent;
      }
    }
    if (msgs.node_lambda_ready[x]) {
      for (std::size_t e : adj.in_edges[x]) {
        if (msgs.lambda_sent[e]) continue;
        std::size_t parent = adj.edge_list[e].first;
        bool ready = true;
        for (std::size_t other : adj.in_edges[x]) {
          if (other != e && !msgs.pi_sent[other]) ready = false;
        }
        if (!ready) continue;
        std::vector<double> v = lambda_message_to_parent(net, msgs, x, parent);
        normalize_or_throw(v, "lambda message");
        msgs.lambda[e] = std::move(v);
        msgs.lambda_sent[e] = 1;
        ++msgs.messages_sent;
      }
    }
  };

  std::size_t total_messages = 2 * adj.edge_count();
  // A polytree quiesces within diameter+1 sweeps and diameter < |nodes|;
  // the |nodes| cap only trips on an internal bug.
  for (std::size_t round = 0; round < n; ++round) {
    if (msgs.messages_sent == total_messages && done_nodes == total_node_values) break;
    ++msgs.rounds_used;
    std::size_t before = msgs.messages_sent + done_nodes;
    for (std::size_t x : sweep) visit(x);
    if (msgs.messages_sent + done_nodes == before) {
      throw StructuralError("internal error: propagation stalled");
    }
  }
  if (msgs.messages_sent != total_messages || done_nodes != total_node_values) {
    throw StructuralError("internal error: propagation exceeded the round cap");
  }
  return msgs;
}

Distribution belief(const EdgeMessages& msgs, std::size_t x) {
  if (!msgs.node_pi_ready[x] || !msgs.node_lambda_ready[x]) {
    throw StructuralError("scheduling error: belief before propagation finished");
  }
  std::vector<double> v(msgs.cards[x]);
  for (std::size_t s = 0; s < v.size(); ++s) {
    v[s] = msgs.node_lambda[x][s] * msgs.node_pi[x][s];
  }
  normalize_or_throw(v, "belief");
  return Distribution{msgs.node_ids[x], std::move(v)};
}

std::vector<Distribution> all_beliefs(const EdgeMessages& msgs) {
  std::vector<Distribution> out;
  out.reserve(msgs.node_ids.size());
  for (std::size_t i = 0; i < msgs.node_ids.size(); ++i) out.push_back(belief(msgs, i));
  return out;
}

}  // namespace bpnet::pearl
