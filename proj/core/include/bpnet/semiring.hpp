#pragma once

#include <algorithm>
#include <string_view>
#include <vector>

#include "bpnet/model.hpp"

namespace bpnet {

enum class SemiringId { prob_sum_product, poss_max_product, poss_max_min };

enum class Conditioning { product_based, min_based };

// The (marginalize, combine) operator pair the propagation recursions run
// over. combine distributes over marginalize on [0,1] in all three
// instances: product over sum, product over max, min over max.
struct Semiring {
  SemiringId id;

  static constexpr double combine_unit = 1.0;
  static constexpr double marginalize_unit = 0.0;

  double combine(double a, double b) const {
    return id == SemiringId::poss_max_min ? std::min(a, b) : a * b;
  }
  double marginalize(double a, double b) const {
    return id == SemiringId::prob_sum_product ? a + b : std::max(a, b);
  }

  bool possibilistic() const { return id != SemiringId::prob_sum_product; }
  Mode mode() const {
    return possibilistic() ? Mode::possibilistic : Mode::probabilistic;
  }
  Conditioning conditioning() const {
    return id == SemiringId::poss_max_min ? Conditioning::min_based
                                          : Conditioning::product_based;
  }
  std::string_view name() const;

  static const Semiring& prob_sum_product();
  static const Semiring& poss_max_product();
  static const Semiring& poss_max_min();
};

// Possibilistic conditioning of a nonnegative vector:
//   product_based: divide everything by the max;
//   min_based:     entries equal to the max become 1, the rest keep their value.
// Throws ImpossibleEvidenceError when the input is all zero.
std::vector<double> poss_normalize(const std::vector<double>& values,
                                   Conditioning conditioning);

}  // namespace bpnet
