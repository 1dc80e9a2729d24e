#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bpnet/model.hpp"
#include "bpnet/semiring.hpp"

namespace bpnet::oracle {

// Hard ceiling on the joint state space; exact_posterior refuses anything
// larger before doing any work.
inline constexpr std::size_t kEnumerationLimit = std::size_t{1} << 24;

// Weight of one full assignment (state index per node, declaration order):
// the combine of every node's table entry given its parents.
double joint_weight(const Network& net, std::span<const std::size_t> assignment,
                    const Semiring& semiring);

// Ground-truth posterior of `query` given the evidence, by enumerating every
// consistent completion of the joint. Probabilistic results are divided by
// the evidence weight; possibilistic results go through poss_normalize with
// the semiring's conditioning.
//
// Throws EnumerationLimitError when the joint exceeds kEnumerationLimit and
// ImpossibleEvidenceError when the evidence has zero weight.
Distribution exact_posterior(const Network& net, const Evidence& ev,
                             std::string_view query, const Semiring& semiring);

// Same enumeration, accumulating every node's marginal in a single pass.
// Results are in node declaration order.
std::vector<Distribution> exact_all_posteriors(const Network& net, const Evidence& ev,
                                               const Semiring& semiring);

}  // namespace bpnet::oracle
