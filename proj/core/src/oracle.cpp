#include "bpnet/oracle.hpp"

#include <numeric>

#include "bpnet/errors.hpp"

namespace bpnet::oracle {

namespace {

// Per-node lookup data: parent indices and cardinalities in declared order.
struct TableView {
  const Cpt* cpt;
  std::vector<std::size_t> parents;
  std::vector<std::size_t> cards;
};

std::vector<TableView> make_views(const Network& net) {
  std::vector<TableView> views(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    views[i].cpt = &net.cpt(i);
    for (const auto& p : views[i].cpt->parents) {
      std::size_t pi = net.index_of(p);
      views[i].parents.push_back(pi);
      views[i].cards.push_back(net.cardinality(pi));
    }
  }
  return views;
}

double entry(const TableView& view, std::span<const std::size_t> assignment,
             std::size_t state) {
  std::size_t row = 0;
  for (std::size_t k = 0; k < view.parents.size(); ++k) {
    row = row * view.cards[k] + assignment[view.parents[k]];
  }
  return view.cpt->rows[row][state];
}

// Depth-first sweep over all completions in mixed-radix order of the
// topological node sequence, carrying the running combine of table entries.
// Parents always precede children in the sequence, so each node's row is
// determined when it is reached. Zero weights prune the whole subtree
// (zero is absorbing for both combines and neutral for both marginalizers).
struct Enumerator {
  const Network& net;
  const Semiring& sr;
  std::vector<TableView> views;
  std::vector<std::size_t> topo;
  std::vector<std::optional<std::size_t>> observed;
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> marginals;

  Enumerator(const Network& n, const Evidence& ev, const Semiring& s)
      : net(n), sr(s), views(make_views(n)), observed(resolve_evidence(n, ev)) {
    for (const auto& id : topological_order(net)) topo.push_back(net.index_of(id));
    assignment.resize(net.node_count(), 0);
    marginals.resize(net.node_count());
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      marginals[i].assign(net.cardinality(i), Semiring::marginalize_unit);
    }
  }

  void run() { descend(0, Semiring::combine_unit); }

  void descend(std::size_t depth, double weight) {
    if (depth == topo.size()) {
      for (std::size_t i = 0; i < assignment.size(); ++i) {
        marginals[i][assignment[i]] = sr.marginalize(marginals[i][assignment[i]], weight);
      }
      return;
    }
    std::size_t node = topo[depth];
    std::size_t lo = 0, hi = net.cardinality(node);
    if (observed[node]) {
      lo = *observed[node];
      hi = lo + 1;
    }
    for (std::size_t s = lo; s < hi; ++s) {
      assignment[node] = s;
      double w = sr.combine(weight, entry(views[node], assignment, s));
      if (w != Semiring::marginalize_unit) descend(depth + 1, w);
    }
  }
};

std::vector<Distribution> enumerate_posteriors(const Network& net, const Evidence& ev,
                                               const Semiring& sr) {
  if (!joint_size_within(net, kEnumerationLimit)) {
    throw EnumerationLimitError("joint state space exceeds the enumeration bound (2^24)");
  }
  Enumerator en(net, ev, sr);
  en.run();

  std::vector<Distribution> out;
  out.reserve(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    Distribution d{net.node(i).id, std::move(en.marginals[i])};
    if (sr.possibilistic()) {
      d.values = poss_normalize(d.values, sr.conditioning());
    } else {
      double total = std::accumulate(d.values.begin(), d.values.end(), 0.0);
      if (total <= 0.0) {
        throw ImpossibleEvidenceError("impossible evidence: zero total probability");
      }
      for (double& v : d.values) v /= total;
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

double joint_weight(const Network& net, std::span<const std::size_t> assignment,
                    const Semiring& semiring) {
  auto views = make_views(net);
  double w = Semiring::combine_unit;
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    w = semiring.combine(w, entry(views[i], assignment, assignment[i]));
  }
  return w;
}

Distribution exact_posterior(const Network& net, const Evidence& ev,
                             std::string_view query, const Semiring& semiring) {
  std::size_t q = net.index_of(query);
  return enumerate_posteriors(net, ev, semiring)[q];
}

std::vector<Distribution> exact_all_posteriors(const Network& net, const Evidence& ev,
                                               const Semiring& semiring) {
  return enumerate_posteriors(net, ev, semiring);
}

}  // namespace bpnet::oracle
