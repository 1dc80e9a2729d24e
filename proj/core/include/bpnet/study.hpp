#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bpnet/generate.hpp"
#include "bpnet/loopy.hpp"
#include "bpnet/model.hpp"
#include "bpnet/semiring.hpp"

namespace bpnet::gen {

struct StudyOptions {
  loopy::LbpOptions lbp;
  std::vector<double> damping_grid = {0.0};
  std::size_t observe = 2;    // evidence nodes per network (study_evidence policy)
  bool run_pearl = false;     // additionally diff the exact engine on polytrees
  SemiringId semiring = SemiringId::prob_sum_product;
};

// One network x damping combination.
struct StudyRow {
  GenSpec spec;
  std::string label;
  double gamma = 0.0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  bool polytree = false;
  loopy::Status status;
  std::size_t iterations = 0;
  // Probe-round delta stayed under the threshold (converged rows only).
  std::optional<bool> honest;
  bool oracle_refused = false;
  std::optional<double> mean_l1;       // vs oracle, mean over nodes
  std::optional<double> max_l1;        // vs oracle, max over nodes
  std::optional<double> pearl_max_abs; // pearl vs oracle, polytrees with run_pearl
  std::string error;                   // non-empty: the run failed, other fields partial
};

struct GammaAggregate {
  double gamma = 0.0;
  std::size_t rows = 0;
  std::size_t converged = 0;
  std::size_t oscillating = 0;
  std::size_t capped = 0;
  std::size_t failed = 0;
  double fraction_converged = 0.0;
  std::optional<double> mean_l1_converged;
  std::optional<double> max_l1_converged;
};

struct StudyReport {
  std::vector<StudyRow> rows;

  // Recomputed from the rows on demand, one bucket per damping value.
  std::vector<GammaAggregate> aggregates() const;

  // Fixed column order (see kCsvHeader); optional cells are blank.
  std::string to_csv() const;
  std::string to_text() const;

  static const char* csv_header();
};

// Runs LBP (in the configured semiring) on every spec x gamma, recording
// status, iterations and, when the joint is enumerable, L1 belief error
// against the exact oracle. Individual failures become rows with the error
// column set; the study itself never throws on a bad network.
StudyReport run_study(const std::vector<GenSpec>& specs, const StudyOptions& opts);

// Randomized search for a gamma=0 period-2 oscillator among small loopy
// networks: walks the given seed range through a fixed grid of toyqmr and
// pyramid shapes (all <= 8 nodes) with the study evidence policy and returns
// the first hit together with its run.
struct OscillatorHit {
  GenSpec spec;
  Evidence evidence;
  loopy::LbpResult run;
};

std::optional<OscillatorHit> find_period2_oscillator(std::uint64_t seed_begin,
                                                     std::uint64_t seed_end,
                                                     const loopy::LbpOptions& opts = {});

}  // namespace bpnet::gen
