#include "bpnet/semiring.hpp"

#include "bpnet/errors.hpp"

namespace bpnet {

std::string_view Semiring::name() const {
  switch (id) {
    case SemiringId::prob_sum_product:
      return "prob_sum_product";
    case SemiringId::poss_max_product:
      return "poss_max_product";
    case SemiringId::poss_max_min:
      return "poss_max_min";
  }
  return "?";
}

const Semiring& Semiring::prob_sum_product() {
  static const Semiring s{SemiringId::prob_sum_product};
  return s;
}

const Semiring& Semiring::poss_max_product() {
  static const Semiring s{SemiringId::poss_max_product};
  return s;
}

const Semiring& Semiring::poss_max_min() {
  static const Semiring s{SemiringId::poss_max_min};
  return s;
}

std::vector<double> poss_normalize(const std::vector<double>& values,
                                   Conditioning conditioning) {
  double mx = 0.0;
  for (double v : values) mx = std::max(mx, v);
  if (mx <= 0.0) throw ImpossibleEvidenceError("impossible evidence: all possibilities are zero");

  std::vector<double> out(values.size());
  if (conditioning == Conditioning::product_based) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / mx;
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out[i] = values[i] == mx ? 1.0 : values[i];
    }
  }
  return out;
}

}  // namespace bpnet
