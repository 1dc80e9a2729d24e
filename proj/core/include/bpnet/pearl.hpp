#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpnet/model.hpp"

namespace bpnet::pearl {

// Message store for one exact propagation pass. Both messages of edge e =
// (parent u, child c) are vectors over u's states: pi[e] is what u sent
// down to c, lambda[e] is what c sent up to u. Node values hold the fused
// lambda(x)/pi(x); observed nodes keep both clamped to the observed
// indicator from initialization on.
struct EdgeMessages {
  std::vector<std::string> node_ids;
  std::vector<std::size_t> cards;
  Adjacency adj;
  std::vector<std::optional<std::size_t>> observed;

  std::vector<std::vector<double>> pi;      // per edge
  std::vector<std::vector<double>> lambda;  // per edge
  std::vector<char> pi_sent;
  std::vector<char> lambda_sent;

  std::vector<std::vector<double>> node_pi;
  std::vector<std::vector<double>> node_lambda;
  std::vector<char> node_pi_ready;
  std::vector<char> node_lambda_ready;

  std::size_t messages_sent = 0;
  std::size_t rounds_used = 0;
};

// Initialization: observed nodes clamp lambda and pi to the observed
// indicator; unobserved roots take their prior as pi; unobserved leaves take
// the all-ones lambda. No edge has sent anything yet.
// Throws StructuralError when the network is not a polytree.
EdgeMessages init_messages(const Network& net, const Evidence& ev);

// lambda(x): elementwise product of the lambda messages of x's children
// (all of which must have been sent); all-ones for childless nodes.
std::vector<double> lambda_value(const EdgeMessages& msgs, std::size_t x);

// pi(x): CPT-weighted sum over parent assignments of the product of the
// incoming pi messages; the prior for roots.
std::vector<double> pi_value(const Network& net, const EdgeMessages& msgs, std::size_t x);

// Message x -> child: pi(x) times the lambda messages of every other child,
// normalized to sum to 1. Throws InconsistentEvidenceError on an all-zero
// product.
std::vector<double> pi_message_to_child(const EdgeMessages& msgs, std::size_t x,
                                        std::size_t child);

// Message y -> parent u, unnormalized: for every u-state, the sum over y's
// states of lambda(y) times the CPT marginalized over y's other parents
// weighted by their pi messages.
std::vector<double> lambda_message_to_parent(const Network& net, const EdgeMessages& msgs,
                                             std::size_t y, std::size_t parent);

// Full propagation to quiescence: every edge carries exactly one lambda and
// one pi message. Emitted messages are normalized to sum to 1.
EdgeMessages propagate(const Network& net, const Evidence& ev);

// BEL(x): normalized lambda(x)*pi(x).
Distribution belief(const EdgeMessages& msgs, std::size_t x);
std::vector<Distribution> all_beliefs(const EdgeMessages& msgs);

}  // namespace bpnet::pearl
