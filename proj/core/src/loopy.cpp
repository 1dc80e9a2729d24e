#include "bpnet/loopy.hpp"

#include <cmath>
#include <numeric>

#include "bpnet/errors.hpp"

namespace bpnet::loopy {

namespace {

// Message-scale normalization. Probabilistic messages sum to 1 and
// max-product messages peak at 1; both are scale-free so this only guards
// against under/overflow. Min-combination is not scale-free, so max-min
// messages are passed through unrescaled. All modes reject all-zero
// messages.
void normalize_message(std::vector<double>& v, const Semiring& sr) {
  double scale = 0.0;
  if (sr.id == SemiringId::prob_sum_product) {
    scale = std::accumulate(v.begin(), v.end(), 0.0);
  } else {
    for (double x : v) scale = std::max(scale, x);
  }
  if (scale <= 0.0) {
    throw InconsistentEvidenceError("inconsistent evidence: all-zero message");
  }
  if (sr.id == SemiringId::poss_max_min) return;
  for (double& x : v) x /= scale;
}

std::vector<double> conditioned_belief(std::vector<double> v, const Semiring& sr) {
  if (sr.possibilistic()) {
    return poss_normalize(v, sr.conditioning());
  }
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum <= 0.0) {
    throw InconsistentEvidenceError("inconsistent evidence: all-zero belief");
  }
  for (double& x : v) x /= sum;
  return v;
}

// lambda(x) at the current buffers: self message combined with every
// child's upward message.
std::vector<double> fused_lambda(const IterationState& st, const Semiring& sr,
                                 std::size_t x) {
  std::vector<double> v = st.self_lambda[x];
  for (std::size_t e : st.adj.out_edges[x]) {
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = sr.combine(v[s], st.lambda[e][s]);
  }
  return v;
}

// pi(x) at the current buffers: CPT marginalized against the incoming
// downward messages, in mixed-radix row order.
std::vector<double> fused_pi(const Network& net, const IterationState& st,
                             const Semiring& sr, std::size_t x) {
  const Cpt& cpt = net.cpt(x);
  const auto& in = st.adj.in_edges[x];
  std::vector<std::size_t> cards = parent_cards(net, x);
  std::vector<std::size_t> digits(cards.size(), 0);
  std::vector<double> v(st.cards[x], Semiring::marginalize_unit);
  for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
    double w = Semiring::combine_unit;
    for (std::size_t k = 0; k < in.size(); ++k) w = sr.combine(w, st.pi[in[k]][digits[k]]);
    for (std::size_t s = 0; s < v.size(); ++s) {
      v[s] = sr.marginalize(v[s], sr.combine(cpt.rows[row][s], w));
    }
    radix_next(digits, cards);
  }
  return v;
}

}  // namespace

IterationState lbp_init(const Network& net, const Evidence& ev, const Semiring& sr) {
  IterationState st;
  std::size_t n = net.node_count();
  st.node_ids.reserve(n);
  st.cards.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.node_ids.push_back(net.node(i).id);
    st.cards.push_back(net.cardinality(i));
  }
  st.adj = make_adjacency(net);
  st.observed = resolve_evidence(net, ev);

  st.self_lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (st.observed[i]) {
      st.self_lambda[i].assign(st.cards[i], 0.0);
      st.self_lambda[i][*st.observed[i]] = 1.0;
    } else {
      st.self_lambda[i].assign(st.cards[i], 1.0);
    }
  }

  std::size_t m = st.adj.edge_count();
  st.pi.resize(m);
  st.lambda.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    std::size_t parent_card = st.cards[st.adj.edge_list[e].first];
    double uniform = sr.possibilistic() ? 1.0 : 1.0 / static_cast<double>(parent_card);
    st.pi[e].assign(parent_card, uniform);
    st.lambda[e].assign(parent_card, 1.0);
  }
  st.pi_prev = st.pi;
  st.lambda_prev = st.lambda;
  st.iteration = 0;
  return st;
}

std::vector<double> apply_damping(const std::vector<double>& fresh,
                                  const std::vector<double>& previous, double gamma,
                                  const Semiring& sr) {
  if (gamma == 0.0) return fresh;
  std::vector<double> v(fresh.size());
  for (std::size_t s = 0; s < v.size(); ++s) {
    v[s] = (1.0 - gamma) * fresh[s] + gamma * previous[s];
  }
  // A convex blend of sum-normalized vectors is itself sum-normalized, so
  // the probabilistic path needs no rescale (and a fixed point stays fixed
  // bit for bit). Max-normalized messages are restored to peak 1.
  if (sr.id == SemiringId::poss_max_product) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, x);
    if (mx > 0.0) {
      for (double& x : v) x /= mx;
    }
  }
  return v;
}

void lbp_round(const Network& net, IterationState& st, double gamma, const Semiring& sr) {
  // Reads come from st.pi/st.lambda (iteration t); outputs accumulate
  // locally and are committed at the end, so every node sees the same
  // snapshot no matter the processing order.
  std::size_t n = st.cards.size();
  std::size_t m = st.adj.edge_count();
  std::vector<std::vector<double>> pi_out(m), lambda_out(m);

  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> lam = fused_lambda(st, sr, x);
    std::vector<double> pi = fused_pi(net, st, sr, x);
    const auto& in = st.adj.in_edges[x];
    const auto& out = st.adj.out_edges[x];

    // Downward: to child j, pi(x)*selflambda(x)*prod of the other children.
    for (std::size_t j = 0; j < out.size(); ++j) {
      std::vector<double> msg(st.cards[x]);
      for (std::size_t s = 0; s < msg.size(); ++s) {
        double v = sr.combine(pi[s], st.self_lambda[x][s]);
        for (std::size_t k = 0; k < out.size(); ++k) {
          if (k != j) v = sr.combine(v, st.lambda[out[k]][s]);
        }
        msg[s] = v;
      }
      normalize_message(msg, sr);
      pi_out[out[j]] = apply_damping(msg, st.pi[out[j]], gamma, sr);
    }

    // Upward: to parent i, marginalize lambda(x)*CPT against the other
    // parents' downward messages.
    if (!in.empty()) {
      const Cpt& cpt = net.cpt(x);
      std::vector<std::size_t> cards = parent_cards(net, x);
      for (std::size_t i = 0; i < in.size(); ++i) {
        std::vector<double> msg(cards[i], Semiring::marginalize_unit);
        std::vector<std::size_t> digits(cards.size(), 0);
        for (std::size_t row = 0; row < cpt.rows.size(); ++row) {
          double w = Semiring::combine_unit;
          for (std::size_t k = 0; k < cards.size(); ++k) {
            if (k != i) w = sr.combine(w, st.pi[in[k]][digits[k]]);
          }
          for (std::size_t s = 0; s < lam.size(); ++s) {
            double contrib = sr.combine(lam[s], sr.combine(cpt.rows[row][s], w));
            msg[digits[i]] = sr.marginalize(msg[digits[i]], contrib);
          }
          radix_next(digits, cards);
        }
        normalize_message(msg, sr);
        lambda_out[in[i]] = apply_damping(msg, st.lambda[in[i]], gamma, sr);
      }
    }
  }

  // Commit: t becomes t-1, outputs become t.
  st.pi_prev = std::move(st.pi);
  st.lambda_prev = std::move(st.lambda);
  st.pi = std::move(pi_out);
  st.lambda = std::move(lambda_out);
  ++st.iteration;
}

BeliefSnapshot node_beliefs(const Network& net, const IterationState& st,
                            const Semiring& sr) {
  BeliefSnapshot beliefs(st.cards.size());
  for (std::size_t x = 0; x < st.cards.size(); ++x) {
    std::vector<double> lam = fused_lambda(st, sr, x);
    std::vector<double> pi = fused_pi(net, st, sr, x);
    std::vector<double> v(st.cards[x]);
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = sr.combine(lam[s], pi[s]);
    beliefs[x] = conditioned_belief(std::move(v), sr);
  }
  return beliefs;
}

namespace {

double max_abs_delta(const BeliefSnapshot& a, const BeliefSnapshot& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t s = 0; s < a[i].size(); ++s) {
      d = std::max(d, std::abs(a[i][s] - b[i][s]));
    }
  }
  return d;
}

// Largest entry change of any edge message between the t-1 and t buffers.
// Belief deltas alone can stall while information is still in flight
// (min/max fronts move through plateaus where the conditioned beliefs do
// not react), so convergence also demands quiet messages.
double message_delta(const IterationState& st) {
  double d = 0.0;
  for (std::size_t e = 0; e < st.pi.size(); ++e) {
    for (std::size_t s = 0; s < st.pi[e].size(); ++s) {
      d = std::max(d, std::abs(st.pi[e][s] - st.pi_prev[e][s]));
      d = std::max(d, std::abs(st.lambda[e][s] - st.lambda_prev[e][s]));
    }
  }
  return d;
}

bool snapshots_agree(const BeliefSnapshot& a, const BeliefSnapshot& b, double threshold) {
  return max_abs_delta(a, b) < threshold;
}

}  // namespace

std::size_t detect_oscillation(const std::deque<BeliefSnapshot>& history, double threshold,
                               std::size_t history_depth) {
  if (history.size() < 2) return 0;
  std::size_t last = history.size() - 1;
  if (snapshots_agree(history[last], history[last - 1], threshold)) {
    return 0;  // that is convergence, not oscillation
  }
  for (std::size_t p = 2; p <= history_depth / 2; ++p) {
    if (history.size() < 2 * p + 1) break;
    bool repeats = true;
    for (std::size_t k = 0; k <= p && repeats; ++k) {
      repeats = snapshots_agree(history[last - k], history[last - k - p], threshold);
    }
    if (repeats) return p;
  }
  return 0;
}

LbpResult semiring_message_pass(const Network& net, const Evidence& ev,
                                const Semiring& sr, const LbpOptions& opts) {
  IterationState st = lbp_init(net, ev, sr);
  std::deque<BeliefSnapshot> ring;
  BeliefSnapshot current = node_beliefs(net, st, sr);
  ring.push_back(current);

  LbpResult result;
  result.status.kind = StatusKind::iteration_cap;

  // Converged means two successive quiet rounds: the first is the candidate,
  // the second is the forced probe round whose belief delta is reported in
  // post_convergence_delta. A round is quiet when neither beliefs nor
  // messages moved past the threshold.
  std::size_t quiet_streak = 0;
  for (std::size_t t = 1; t <= opts.max_iterations; ++t) {
    lbp_round(net, st, opts.damping, sr);
    BeliefSnapshot next = node_beliefs(net, st, sr);
    double delta = max_abs_delta(next, current);
    result.max_delta_trace.push_back(delta);
    ring.push_back(next);
    while (ring.size() > opts.history_depth) ring.pop_front();
    current = std::move(next);
    result.iterations_run = t;

    if (delta < opts.threshold && message_delta(st) < opts.threshold) {
      if (++quiet_streak >= 2) {
        result.status = {StatusKind::converged, 0};
        result.post_convergence_delta = delta;
        break;
      }
      continue;
    }
    quiet_streak = 0;
    if (std::size_t p = detect_oscillation(ring, opts.threshold, opts.history_depth)) {
      result.status = {StatusKind::oscillating, p};
      break;
    }
  }

  result.beliefs.reserve(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    result.beliefs.push_back(Distribution{st.node_ids[i], current[i]});
  }
  result.history.assign(ring.begin(), ring.end());
  return result;
}

LbpResult run_lbp(const Network& net, const Evidence& ev, const LbpOptions& opts) {
  return semiring_message_pass(net, ev, Semiring::prob_sum_product(), opts);
}

}  // namespace bpnet::loopy
