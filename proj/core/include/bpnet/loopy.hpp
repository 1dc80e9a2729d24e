#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "bpnet/model.hpp"
#include "bpnet/semiring.hpp"

namespace bpnet::loopy {

struct LbpOptions {
  double threshold = 1e-4;         // max belief change that still counts as stable
  std::size_t max_iterations = 200;
  double damping = 0.0;            // gamma in [0,1); 0 = off
  std::size_t history_depth = 8;   // >= 2, bounds detectable periods
};

enum class StatusKind { converged, oscillating, iteration_cap };

struct Status {
  StatusKind kind = StatusKind::iteration_cap;
  std::size_t period = 0;  // meaningful when oscillating
};

// One belief vector per node, node declaration order.
using BeliefSnapshot = std::vector<std::vector<double>>;

struct LbpResult {
  Status status;
  std::size_t iterations_run = 0;
  std::vector<Distribution> beliefs;      // final round, node declaration order
  std::vector<BeliefSnapshot> history;    // last <= history_depth rounds, oldest first
  std::vector<double> max_delta_trace;    // per round
  // Belief delta of the forced extra round run after stability was first
  // observed; convergence is only reported when this round stayed quiet
  // too. Unset unless status is converged.
  std::optional<double> post_convergence_delta;
};

// Synchronous, iteration-indexed message state. Messages live on directed
// edges e = (parent u, child c), both as vectors over u's states: pi[e] is
// the downward message u -> c, lambda[e] the upward message c -> u. Updates
// for round t+1 read only the t buffers and write only the t+1 buffers.
struct IterationState {
  std::vector<std::string> node_ids;
  std::vector<std::size_t> cards;
  Adjacency adj;
  std::vector<std::optional<std::size_t>> observed;
  std::vector<std::vector<double>> self_lambda;  // per node, indicator if observed

  std::vector<std::vector<double>> pi;           // buffer t, per edge
  std::vector<std::vector<double>> lambda;       // buffer t, per edge
  std::vector<std::vector<double>> pi_prev;      // buffer t-1
  std::vector<std::vector<double>> lambda_prev;  // buffer t-1
  std::size_t iteration = 0;                     // t of the current buffers
};

// Start state: uniform pi messages (all-ones on the possibilistic scale),
// all-ones lambda messages, self messages from the evidence.
IterationState lbp_init(const Network& net, const Evidence& ev,
                        const Semiring& semiring = Semiring::prob_sum_product());

// One synchronous round: every node reads the t buffers, fuses its incoming
// messages, and emits to every neighbour into the t+1 buffers. Outgoing
// messages are damped against their previous value with coefficient gamma
// and normalized (sum for probabilistic, max for poss_max_product; the
// max-min semiring passes raw values, which stay on the input scale).
// Throws InconsistentEvidenceError when a message comes out all zero.
void lbp_round(const Network& net, IterationState& state, double gamma,
               const Semiring& semiring = Semiring::prob_sum_product());

// Beliefs of the current buffers: conditioning-normalized combine of
// lambda(x) and pi(x) per node.
BeliefSnapshot node_beliefs(const Network& net, const IterationState& state,
                            const Semiring& semiring = Semiring::prob_sum_product());

// Convex blend (1-gamma)*fresh + gamma*previous; gamma = 0 returns `fresh`
// untouched. The blend of two normalized messages is already normalized on
// the sum scale; max-product messages are rescaled back to peak 1.
std::vector<double> apply_damping(const std::vector<double>& fresh,
                                  const std::vector<double>& previous, double gamma,
                                  const Semiring& semiring = Semiring::prob_sum_product());

// Smallest period p in [2, history_depth/2] such that the last 2p+1
// snapshots repeat with period p (componentwise within threshold) while the
// last two snapshots differ by at least threshold somewhere. 0 when there is
// no such period (including: not enough history).
std::size_t detect_oscillation(const std::deque<BeliefSnapshot>& history, double threshold,
                               std::size_t history_depth);

// Full run: iterate synchronous rounds until two successive rounds leave
// both beliefs and messages inside the threshold (converged), beliefs
// repeat with a detectable period (oscillating), or the iteration cap hits.
// Reports the final round's beliefs in every case.
LbpResult run_lbp(const Network& net, const Evidence& ev, const LbpOptions& opts = {});

// The same engine over an arbitrary semiring; run_lbp is exactly the
// prob_sum_product instantiation.
LbpResult semiring_message_pass(const Network& net, const Evidence& ev,
                                const Semiring& semiring, const LbpOptions& opts = {});

}  // namespace bpnet::loopy
