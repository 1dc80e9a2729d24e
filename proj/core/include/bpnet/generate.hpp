#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bpnet/model.hpp"

namespace bpnet::gen {

// Deterministic random source: std::mt19937_64 (a fixed, standardized
// algorithm) with fixed output mappings, so the same seed gives the same
// bytes on every platform. No std::*_distribution anywhere -- their
// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1), 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n) by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Exp(1), never infinite.
  double exponential() { return -std::log1p(-unit()); }

 private:
  std::mt19937_64 eng_;
};

enum class Family { random_polytree, pyramid, toyqmr };

std::string family_name(Family f);

// A fully deterministic recipe: the same GenSpec always produces the
// byte-identical serialized network.
struct GenSpec {
  Family family = Family::random_polytree;
  std::size_t nodes = 8;                   // random_polytree
  std::vector<std::size_t> widths = {1, 3, 3};  // pyramid, top layer first
  std::size_t diseases = 3;                // toyqmr
  std::size_t findings = 5;                // toyqmr
  std::size_t cardinality = 2;             // max; per-node uniform in [2, cardinality]
  std::uint64_t seed = 0;
  double prior_scale = 0.02;               // toyqmr "present" prior multiplier
  Mode mode = Mode::probabilistic;         // row normalization of the output

  std::string label() const;  // compact human/CSV tag, no commas
};

// Builds the network for a spec. Throws std::invalid_argument on degenerate
// sizes (zero nodes, empty layers, cardinality < 2, prior_scale outside
// (0,1]).
//
//   random_polytree: uniform random tree skeleton (Pruefer sequence) with
//     coin-flip edge orientations; any orientation of a tree is acyclic.
//   pyramid: layered DAG, each node below the top layer draws 1..3 distinct
//     parents from the layer above. Loopy whenever two parents share an
//     ancestor.
//   toyqmr: bipartite disease -> finding graph, binary nodes; disease priors
//     are prior_scale * U[0.25, 0.75]; findings are noisy-OR rows with leak
//     0.01 and per-parent inhibition U[0.2, 0.9].
//
// CPT rows are symmetric-Dirichlet samples (normalized Exp(1) draws) for the
// first two families. mode=possibilistic rescales every row to max 1.
Network generate(const GenSpec& spec);

// The deterministic evidence used by studies and searches: `count` distinct
// nodes drawn from a salted copy of the spec's seed. toyqmr observes
// findings at "present" (the diagnostic query shape); other families pick
// uniform nodes and states.
Evidence study_evidence(const Network& net, const GenSpec& spec, std::size_t count);

}  // namespace bpnet::gen
