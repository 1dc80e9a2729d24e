#include <benchmark/benchmark.h>

#include <sstream>

#include "bpnet/generate.hpp"
#include "bpnet/loopy.hpp"
#include "bpnet/netio.hpp"
#include "bpnet/oracle.hpp"
#include "bpnet/pearl.hpp"

namespace {

bpnet::Network polytree(std::size_t nodes, std::uint64_t seed) {
  bpnet::gen::GenSpec spec;
  spec.family = bpnet::gen::Family::random_polytree;
  spec.nodes = nodes;
  spec.cardinality = 3;
  spec.seed = seed;
  return bpnet::gen::generate(spec);
}

void BM_PearlPropagate(benchmark::State& state) {
  auto net = polytree(static_cast<std::size_t>(state.range(0)), 42);
  bpnet::gen::GenSpec spec;
  spec.seed = 42;
  bpnet::Evidence ev = bpnet::gen::study_evidence(net, spec, 2);
  for (auto _ : state) {
    auto msgs = bpnet::pearl::propagate(net, ev);
    benchmark::DoNotOptimize(msgs.messages_sent);
  }
}
BENCHMARK(BM_PearlPropagate)->Arg(8)->Arg(32)->Arg(128);

void BM_LbpOnPyramid(benchmark::State& state) {
  bpnet::gen::GenSpec spec;
  spec.family = bpnet::gen::Family::pyramid;
  spec.widths = {2, 3, 3, static_cast<std::size_t>(state.range(0))};
  spec.seed = 7;
  auto net = bpnet::gen::generate(spec);
  bpnet::Evidence ev = bpnet::gen::study_evidence(net, spec, 3);
  bpnet::loopy::LbpOptions opts;
  opts.max_iterations = 50;
  for (auto _ : state) {
    auto result = bpnet::loopy::run_lbp(net, ev, opts);
    benchmark::DoNotOptimize(result.iterations_run);
  }
}
BENCHMARK(BM_LbpOnPyramid)->Arg(3)->Arg(6);

void BM_OracleEnumeration(benchmark::State& state) {
  auto net = polytree(static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    auto all = bpnet::oracle::exact_all_posteriors(net, {}, bpnet::Semiring::prob_sum_product());
    benchmark::DoNotOptimize(all.size());
  }
}
BENCHMARK(BM_OracleEnumeration)->Arg(8)->Arg(12)->Arg(14);

void BM_ParseSerializeRoundTrip(benchmark::State& state) {
  auto net = polytree(static_cast<std::size_t>(state.range(0)), 3);
  std::string text = bpnet::io::serialize_network(net);
  for (auto _ : state) {
    auto parsed = bpnet::io::parse_network(text);
    benchmark::DoNotOptimize(parsed.node_count());
  }
}
BENCHMARK(BM_ParseSerializeRoundTrip)->Arg(32)->Arg(128);

void BM_MaxMinMessagePass(benchmark::State& state) {
  bpnet::gen::GenSpec spec;
  spec.family = bpnet::gen::Family::pyramid;
  spec.widths = {2, 3, 3};
  spec.seed = 5;
  spec.mode = bpnet::Mode::possibilistic;
  auto net = bpnet::gen::generate(spec);
  bpnet::Evidence ev = bpnet::gen::study_evidence(net, spec, 2);
  bpnet::loopy::LbpOptions opts;
  opts.max_iterations = 50;
  for (auto _ : state) {
    auto result =
        bpnet::loopy::semiring_message_pass(net, ev, bpnet::Semiring::poss_max_min(), opts);
    benchmark::DoNotOptimize(result.iterations_run);
  }
}
BENCHMARK(BM_MaxMinMessagePass);

}  // namespace

BENCHMARK_MAIN();
