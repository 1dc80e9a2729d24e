#include "bpnet/generate.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace bpnet::gen {

namespace {

constexpr std::uint64_t kEvidenceSalt = 0x9e3779b97f4a7c15ull;

std::vector<std::string> state_labels(std::size_t card) {
  std::vector<std::string> states;
  states.reserve(card);
  for (std::size_t s = 0; s < card; ++s) states.push_back("s" + std::to_string(s));
  return states;
}

std::size_t draw_cardinality(Rng& rng, std::size_t max_card) {
  if (max_card <= 2) return 2;
  return 2 + static_cast<std::size_t>(rng.below(max_card - 1));
}

std::vector<double> dirichlet_row(Rng& rng, std::size_t card) {
  std::vector<double> row(card);
  double sum = 0.0;
  for (double& v : row) {
    v = rng.exponential();
    sum += v;
  }
  if (sum <= 0.0) {  // all draws zero: astronomically unlikely, keep it valid
    return std::vector<double>(card, 1.0 / static_cast<double>(card));
  }
  for (double& v : row) v /= sum;
  return row;
}

void fill_dirichlet_cpts(Network& net, Rng& rng) {
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    Cpt& cpt = net.mutable_cpt(i);
    std::vector<std::size_t> cards;
    for (const auto& p : cpt.parents) cards.push_back(net.cardinality(net.index_of(p)));
    std::size_t rows = radix_count(cards);
    cpt.rows.clear();
    cpt.rows.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      cpt.rows.push_back(dirichlet_row(rng, net.cardinality(i)));
    }
  }
}

// First `take` elements of a deterministic partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t population, std::size_t take) {
  std::vector<std::size_t> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

Network gen_random_polytree(const GenSpec& spec) {
  std::size_t n = spec.nodes;
  Rng rng(spec.seed);
  Network net;
  for (std::size_t i = 0; i < n; ++i) {
    net.add_node("n" + std::to_string(i), state_labels(draw_cardinality(rng, spec.cardinality)));
  }

  // Uniform random labeled tree via a Pruefer sequence.
  std::vector<std::pair<std::size_t, std::size_t>> skeleton;
  if (n == 2) {
    skeleton.emplace_back(0, 1);
  } else if (n > 2) {
    std::vector<std::size_t> pruefer(n - 2);
    for (auto& p : pruefer) p = static_cast<std::size_t>(rng.below(n));
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t p : pruefer) ++degree[p];
    std::size_t ptr = 0;
    while (degree[ptr] != 1) ++ptr;
    std::size_t leaf = ptr;
    for (std::size_t p : pruefer) {
      skeleton.emplace_back(leaf, p);
      if (--degree[p] == 1 && p < ptr) {
        leaf = p;
      } else {
        ++ptr;
        while (ptr < n && degree[ptr] != 1) ++ptr;
        leaf = ptr;
      }
    }
    skeleton.emplace_back(leaf, n - 1);
  }

  // Random orientations; a tree skeleton stays acyclic either way.
  std::vector<std::vector<std::size_t>> parents(n);
  for (auto [a, b] : skeleton) {
    bool a_is_parent = rng.below(2) == 0;
    if (a_is_parent) {
      parents[b].push_back(a);
    } else {
      parents[a].push_back(b);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(parents[i].begin(), parents[i].end());
    std::vector<std::string> ids;
    for (std::size_t p : parents[i]) ids.push_back(net.node(p).id);
    net.set_cpt(net.node(i).id, std::move(ids), {});
  }
  fill_dirichlet_cpts(net, rng);
  return net;
}

Network gen_pyramid(const GenSpec& spec) {
  Rng rng(spec.seed);
  Network net;
  std::vector<std::vector<std::size_t>> layers;
  std::size_t counter = 0;
  for (std::size_t w : spec.widths) {
    std::vector<std::size_t> layer;
    for (std::size_t k = 0; k < w; ++k) {
      layer.push_back(net.add_node("n" + std::to_string(counter++),
                                   state_labels(draw_cardinality(rng, spec.cardinality))));
    }
    layers.push_back(std::move(layer));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i : layers[l]) {
      std::vector<std::string> parent_ids;
      if (l > 0) {
        const auto& above = layers[l - 1];
        std::size_t take = 1 + static_cast<std::size_t>(rng.below(std::min<std::size_t>(3, above.size())));
        auto picks = sample_distinct(rng, above.size(), take);
        std::sort(picks.begin(), picks.end());
        for (std::size_t p : picks) parent_ids.push_back(net.node(above[p]).id);
      }
      net.set_cpt(net.node(i).id, std::move(parent_ids), {});
    }
  }
  fill_dirichlet_cpts(net, rng);
  return net;
}

Network gen_toyqmr(const GenSpec& spec) {
  Rng rng(spec.seed);
  Network net;
  std::vector<std::string> disease_ids;
  for (std::size_t d = 0; d < spec.diseases; ++d) {
    std::string id = "d" + std::to_string(d);
    net.add_node(id, {"absent", "present"});
    disease_ids.push_back(id);
  }
  for (std::size_t f = 0; f < spec.findings; ++f) {
    net.add_node("f" + std::to_string(f), {"absent", "present"});
  }

  for (std::size_t d = 0; d < spec.diseases; ++d) {
    double present = spec.prior_scale * rng.range(0.25, 0.75);
    net.set_prior(disease_ids[d], {1.0 - present, present});
  }

  constexpr double kLeak = 0.01;
  for (std::size_t f = 0; f < spec.findings; ++f) {
    std::size_t take = 1 + static_cast<std::size_t>(rng.below(std::min<std::size_t>(3, spec.diseases)));
    auto picks = sample_distinct(rng, spec.diseases, take);
    std::sort(picks.begin(), picks.end());
    std::vector<std::string> parent_ids;
    for (std::size_t p : picks) parent_ids.push_back(disease_ids[p]);
    std::vector<double> inhibition;
    for (std::size_t k = 0; k < take; ++k) inhibition.push_back(rng.range(0.2, 0.9));

    // Noisy-OR: the finding stays absent iff the leak cause and every
    // present parent are all inhibited.
    std::vector<std::size_t> cards(take, 2);
    std::vector<std::size_t> digits(take, 0);
    std::vector<std::vector<double>> rows;
    rows.reserve(radix_count(cards));
    for (std::size_t r = 0; r < (std::size_t{1} << take); ++r) {
      double absent = 1.0 - kLeak;
      for (std::size_t k = 0; k < take; ++k) {
        if (digits[k] == 1) absent *= inhibition[k];
      }
      rows.push_back({absent, 1.0 - absent});
      radix_next(digits, cards);
    }
    net.set_cpt("f" + std::to_string(f), std::move(parent_ids), std::move(rows));
  }
  return net;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::random_polytree:
      return "random_polytree";
    case Family::pyramid:
      return "pyramid";
    case Family::toyqmr:
      return "toyqmr";
  }
  return "?";
}

std::string GenSpec::label() const {
  std::ostringstream os;
  os << family_name(family) << "(";
  switch (family) {
    case Family::random_polytree:
      os << "n=" << nodes << ";card=" << cardinality;
      break;
    case Family::pyramid: {
      os << "widths=";
      for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i) os << "-";
        os << widths[i];
      }
      os << ";card=" << cardinality;
      break;
    }
    case Family::toyqmr:
      os << "d=" << diseases << ";f=" << findings << ";scale=" << prior_scale;
      break;
  }
  os << ";seed=" << seed << ")";
  return os.str();
}

Network generate(const GenSpec& spec) {
  if (spec.cardinality < 2) throw std::invalid_argument("cardinality must be >= 2");
  if (spec.prior_scale <= 0.0 || spec.prior_scale > 1.0) {
    throw std::invalid_argument("prior_scale must be in (0, 1]");
  }
  Network net;
  switch (spec.family) {
    case Family::random_polytree:
      if (spec.nodes == 0) throw std::invalid_argument("node count must be positive");
      net = gen_random_polytree(spec);
      break;
    case Family::pyramid:
      if (spec.widths.empty()) throw std::invalid_argument("pyramid needs at least one layer");
      for (std::size_t w : spec.widths) {
        if (w == 0) throw std::invalid_argument("pyramid layers must be non-empty");
      }
      net = gen_pyramid(spec);
      break;
    case Family::toyqmr:
      if (spec.diseases == 0 || spec.findings == 0) {
        throw std::invalid_argument("toyqmr needs at least one disease and one finding");
      }
      net = gen_toyqmr(spec);
      break;
  }
  if (spec.mode == Mode::possibilistic) {
    normalize_rows(net, Mode::possibilistic);
  }
  return net;
}

Evidence study_evidence(const Network& net, const GenSpec& spec, std::size_t count) {
  Rng rng(spec.seed ^ kEvidenceSalt);
  Evidence ev;
  if (count == 0 || net.node_count() == 0) return ev;

  if (spec.family == Family::toyqmr) {
    std::size_t n = std::min(count, spec.findings);
    auto picks = sample_distinct(rng, spec.findings, n);
    std::sort(picks.begin(), picks.end());
    for (std::size_t p : picks) {
      ev.observations.emplace("f" + std::to_string(p), "present");
    }
    return ev;
  }

  std::size_t n = std::min(count, net.node_count());
  auto picks = sample_distinct(rng, net.node_count(), n);
  std::sort(picks.begin(), picks.end());
  for (std::size_t p : picks) {
    const Node& node = net.node(p);
    ev.observations.emplace(node.id, node.states[rng.below(node.states.size())]);
  }
  return ev;
}

}  // namespace bpnet::gen
