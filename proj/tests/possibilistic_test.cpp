#include "bpnet/semiring.hpp"

#include <gtest/gtest.h>

#include "bpnet/errors.hpp"
#include "bpnet/generate.hpp"
#include "bpnet/loopy.hpp"
#include "bpnet/netio.hpp"
#include "bpnet/oracle.hpp"
#include "test_util.hpp"

namespace bpnet {
namespace {

using testutil::expect_near_vec;
using testutil::observe;

TEST(Semiring, DistributivityOnSampledTriples) {
  gen::Rng rng(17);
  for (const Semiring* sr :
       {&Semiring::prob_sum_product(), &Semiring::poss_max_product(), &Semiring::poss_max_min()}) {
    for (int i = 0; i < 200; ++i) {
      double a = rng.unit(), b = rng.unit(), c = rng.unit();
      double lhs = sr->combine(a, sr->marginalize(b, c));
      double rhs = sr->marginalize(sr->combine(a, b), sr->combine(a, c));
      EXPECT_NEAR(lhs, rhs, 1e-15) << sr->name();
    }
    EXPECT_EQ(sr->combine(0.37, Semiring::combine_unit), 0.37);
    EXPECT_EQ(sr->marginalize(0.37, Semiring::marginalize_unit), 0.37);
  }
}

TEST(PossNormalize, TwoConditionings) {
  expect_near_vec(poss_normalize({0.5, 1.0}, Conditioning::product_based), {0.5, 1.0}, 0.0);
  expect_near_vec(poss_normalize({0.2, 0.4}, Conditioning::product_based), {0.5, 1.0}, 1e-15);
  expect_near_vec(poss_normalize({0.2, 0.4}, Conditioning::min_based), {0.2, 1.0}, 0.0);
  EXPECT_THROW(poss_normalize({0.0, 0.0}, Conditioning::product_based),
               ImpossibleEvidenceError);
  EXPECT_THROW(poss_normalize({0.0, 0.0}, Conditioning::min_based), ImpossibleEvidenceError);
}

TEST(SemiringMessagePass, ProbInstantiationIsRunLbp) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    gen::GenSpec spec;
    spec.family = seed % 2 ? gen::Family::pyramid : gen::Family::random_polytree;
    spec.widths = {2, 3};
    spec.nodes = 6;
    spec.cardinality = 3;
    spec.seed = seed;
    Network net = gen::generate(spec);
    Evidence ev = gen::study_evidence(net, spec, 2);

    auto a = loopy::run_lbp(net, ev);
    auto b = loopy::semiring_message_pass(net, ev, Semiring::prob_sum_product());
    ASSERT_EQ(a.status.kind, b.status.kind);
    ASSERT_EQ(a.iterations_run, b.iterations_run);
    for (std::size_t i = 0; i < a.beliefs.size(); ++i) {
      EXPECT_EQ(a.beliefs[i].values, b.beliefs[i].values);  // bit-identical
    }
    EXPECT_EQ(a.max_delta_trace, b.max_delta_trace);
  }
}

TEST(SemiringMessagePass, MaxProductExactOnPolytrees) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    gen::GenSpec spec;
    spec.family = gen::Family::random_polytree;
    spec.nodes = 3 + seed % 6;
    spec.cardinality = 3;
    spec.seed = seed;
    spec.mode = Mode::possibilistic;
    Network net = gen::generate(spec);
    Evidence ev = gen::study_evidence(net, spec, seed % 3);

    loopy::LbpOptions opts;
    opts.threshold = 1e-9;
    auto run = loopy::semiring_message_pass(net, ev, Semiring::poss_max_product(), opts);
    ASSERT_EQ(run.status.kind, loopy::StatusKind::converged) << "seed " << seed;
    auto exact = oracle::exact_all_posteriors(net, ev, Semiring::poss_max_product());
    for (std::size_t i = 0; i < exact.size(); ++i) {
      for (std::size_t s = 0; s < exact[i].values.size(); ++s) {
        EXPECT_NEAR(run.beliefs[i].values[s], exact[i].values[s], 1e-12)
            << "seed " << seed << " node " << exact[i].node;
      }
    }
  }
}

TEST(SemiringMessagePass, MaxMinExactOnPolytrees) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    gen::GenSpec spec;
    spec.family = gen::Family::random_polytree;
    spec.nodes = 3 + seed % 6;
    spec.cardinality = 3;
    spec.seed = seed;
    spec.mode = Mode::possibilistic;
    Network net = gen::generate(spec);
    Evidence ev = gen::study_evidence(net, spec, seed % 3);

    loopy::LbpOptions opts;
    opts.threshold = 1e-9;
    auto run = loopy::semiring_message_pass(net, ev, Semiring::poss_max_min(), opts);
    ASSERT_EQ(run.status.kind, loopy::StatusKind::converged) << "seed " << seed;
    auto exact = oracle::exact_all_posteriors(net, ev, Semiring::poss_max_min());
    for (std::size_t i = 0; i < exact.size(); ++i) {
      for (std::size_t s = 0; s < exact[i].values.size(); ++s) {
        EXPECT_NEAR(run.beliefs[i].values[s], exact[i].values[s], 1e-12)
            << "seed " << seed << " node " << exact[i].node;
      }
    }
  }
}

TEST(SemiringMessagePass, MaxMinHandChain) {
  // Chain from a small value set; every joint possibility is one of the
  // inputs, so the engine must match the enumeration exactly.
  Network net;
  net.add_node("A", {"s0", "s1"});
  net.add_node("B", {"s0", "s1"});
  net.set_prior("A", {1.0, 0.7});
  net.set_cpt("B", {"A"}, {{1.0, 0.2}, {0.7, 1.0}});
  Evidence ev = observe({{"B", "s1"}});

  // pi(A=s0, B=s1) = min(1.0, 0.2) = 0.2; pi(A=s1, B=s1) = min(0.7, 1.0) = 0.7.
  auto run = loopy::semiring_message_pass(net, ev, Semiring::poss_max_min());
  ASSERT_EQ(run.status.kind, loopy::StatusKind::converged);
  expect_near_vec(run.beliefs[0].values, {0.2, 1.0}, 0.0);

  auto exact = oracle::exact_posterior(net, ev, "A", Semiring::poss_max_min());
  expect_near_vec(exact.values, {0.2, 1.0}, 0.0);
}

TEST(SemiringMessagePass, PossibilisticBeliefsPeakAtOne) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    gen::GenSpec spec;
    spec.family = gen::Family::pyramid;
    spec.widths = {2, 3};
    spec.cardinality = 3;
    spec.seed = seed;
    spec.mode = Mode::possibilistic;
    Network net = gen::generate(spec);
    Evidence ev = gen::study_evidence(net, spec, 1);
    for (const Semiring* sr : {&Semiring::poss_max_product(), &Semiring::poss_max_min()}) {
      auto run = loopy::semiring_message_pass(net, ev, *sr);
      for (const auto& bel : run.beliefs) {
        double mx = 0.0;
        for (double v : bel.values) mx = std::max(mx, v);
        EXPECT_NEAR(mx, 1.0, 1e-12) << sr->name() << " seed " << seed;
      }
    }
  }
}

TEST(SemiringMessagePass, DuplicatedComponentLeavesMinBeliefsAlone) {
  // Min/max beliefs depend only on the value multiset along completions, so
  // appending a disconnected copy of the network cannot change the original
  // component's beliefs.
  gen::GenSpec spec;
  spec.family = gen::Family::random_polytree;
  spec.nodes = 5;
  spec.seed = 11;
  spec.mode = Mode::possibilistic;
  Network net = gen::generate(spec);
  Evidence ev = gen::study_evidence(net, spec, 1);

  Network doubled;
  for (const auto& node : net.nodes()) doubled.add_node(node.id, node.states);
  for (const auto& node : net.nodes()) doubled.add_node("copy_" + node.id, node.states);
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const Cpt& cpt = net.cpt(i);
    doubled.set_cpt(net.node(i).id, cpt.parents, cpt.rows);
    std::vector<std::string> copy_parents;
    for (const auto& p : cpt.parents) copy_parents.push_back("copy_" + p);
    doubled.set_cpt("copy_" + net.node(i).id, copy_parents, cpt.rows);
  }

  auto base = loopy::semiring_message_pass(net, ev, Semiring::poss_max_min());
  auto extended = loopy::semiring_message_pass(doubled, ev, Semiring::poss_max_min());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    EXPECT_EQ(base.beliefs[i].values, extended.beliefs[i].values);
  }
}

TEST(SemiringMessagePass, DegenerateZeroOneTablesCollapse) {
  // All-0/1 tables: the three semirings agree on the resulting 0/1 beliefs.
  Network net;
  net.add_node("A", {"s0", "s1"});
  net.add_node("B", {"s0", "s1"});
  net.add_node("C", {"s0", "s1"});
  net.set_prior("A", {0.0, 1.0});
  net.set_cpt("B", {"A"}, {{1.0, 0.0}, {0.0, 1.0}});   // B = A
  net.set_cpt("C", {"B"}, {{0.0, 1.0}, {1.0, 0.0}});   // C = not B
  for (const Semiring* sr :
       {&Semiring::prob_sum_product(), &Semiring::poss_max_product(), &Semiring::poss_max_min()}) {
    auto run = loopy::semiring_message_pass(net, {}, *sr);
    expect_near_vec(run.beliefs[0].values, {0.0, 1.0}, 0.0);
    expect_near_vec(run.beliefs[1].values, {0.0, 1.0}, 0.0);
    expect_near_vec(run.beliefs[2].values, {1.0, 0.0}, 0.0);
  }
}

TEST(SemiringMessagePass, ImpossibleEvidenceThrows) {
  // Zero-possibility evidence surfaces as the typed impossible-evidence
  // error from the belief conditioning (the max-min engine passes raw
  // messages, so the zero shows up in the conditioned belief).
  Network net;
  net.add_node("A", {"s0", "s1"});
  net.add_node("B", {"s0", "s1"});
  net.set_prior("A", {1.0, 0.0});
  net.set_cpt("B", {"A"}, {{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_THROW(
      loopy::semiring_message_pass(net, observe({{"B", "s1"}}), Semiring::poss_max_min()),
      ImpossibleEvidenceError);
}

}  // namespace
}  // namespace bpnet
