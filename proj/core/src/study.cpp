#include "bpnet/study.hpp"

#include <cmath>
#include <sstream>

#include "bpnet/errors.hpp"
#include "bpnet/oracle.hpp"
#include "bpnet/pearl.hpp"

namespace bpnet::gen {

namespace {

const Semiring& semiring_for(SemiringId id) {
  switch (id) {
    case SemiringId::prob_sum_product:
      return Semiring::prob_sum_product();
    case SemiringId::poss_max_product:
      return Semiring::poss_max_product();
    case SemiringId::poss_max_min:
      return Semiring::poss_max_min();
  }
  return Semiring::prob_sum_product();
}

std::string status_name(const loopy::Status& s) {
  switch (s.kind) {
    case loopy::StatusKind::converged:
      return "converged";
    case loopy::StatusKind::oscillating:
      return "oscillating";
    case loopy::StatusKind::iteration_cap:
      return "iteration_cap";
  }
  return "?";
}

void append_csv_real(std::string& out, double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  out += os.str();
}

}  // namespace

const char* StudyReport::csv_header() {
  return "family,params,seed,gamma,nodes,edges,polytree,status,period,iterations,"
         "honest,oracle_refused,mean_l1,max_l1,pearl_max_abs,error";
}

StudyReport run_study(const std::vector<GenSpec>& specs, const StudyOptions& opts) {
  StudyReport report;
  const Semiring& sr = semiring_for(opts.semiring);

  for (const GenSpec& base : specs) {
    GenSpec spec = base;
    if (sr.possibilistic()) spec.mode = Mode::possibilistic;

    for (double gamma : opts.damping_grid) {
      StudyRow row;
      row.spec = spec;
      row.label = spec.label();
      row.gamma = gamma;
      try {
        Network net = generate(spec);
        row.node_count = net.node_count();
        row.edge_count = net.edges().size();
        row.polytree = is_polytree(net);
        Evidence ev = study_evidence(net, spec, opts.observe);

        loopy::LbpOptions lbp = opts.lbp;
        lbp.damping = gamma;
        loopy::LbpResult run = loopy::semiring_message_pass(net, ev, sr, lbp);
        row.status = run.status;
        row.iterations = run.iterations_run;
        if (run.status.kind == loopy::StatusKind::converged) {
          row.honest = run.post_convergence_delta &&
                       *run.post_convergence_delta < lbp.threshold;
        }

        if (!joint_size_within(net, oracle::kEnumerationLimit)) {
          row.oracle_refused = true;
        } else {
          auto exact = oracle::exact_all_posteriors(net, ev, sr);
          double sum_l1 = 0.0, max_l1 = 0.0;
          for (std::size_t i = 0; i < exact.size(); ++i) {
            double l1 = 0.0;
            for (std::size_t s = 0; s < exact[i].values.size(); ++s) {
              l1 += std::abs(exact[i].values[s] - run.beliefs[i].values[s]);
            }
            sum_l1 += l1;
            max_l1 = std::max(max_l1, l1);
          }
          row.mean_l1 = sum_l1 / static_cast<double>(exact.size());
          row.max_l1 = max_l1;

          if (opts.run_pearl && row.polytree && !sr.possibilistic()) {
            auto msgs = pearl::propagate(net, ev);
            double worst = 0.0;
            for (std::size_t i = 0; i < exact.size(); ++i) {
              Distribution bel = pearl::belief(msgs, i);
              for (std::size_t s = 0; s < bel.values.size(); ++s) {
                worst = std::max(worst, std::abs(bel.values[s] - exact[i].values[s]));
              }
            }
            row.pearl_max_abs = worst;
          }
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<GammaAggregate> StudyReport::aggregates() const {
  std::vector<GammaAggregate> out;
  auto bucket = [&](double gamma) -> GammaAggregate& {
    for (auto& a : out) {
      if (a.gamma == gamma) return a;
    }
    GammaAggregate fresh;
    fresh.gamma = gamma;
    out.push_back(fresh);
    return out.back();
  };

  for (const auto& row : rows) {
    GammaAggregate& a = bucket(row.gamma);
    ++a.rows;
    if (!row.error.empty()) {
      ++a.failed;
      continue;
    }
    switch (row.status.kind) {
      case loopy::StatusKind::converged:
        ++a.converged;
        break;
      case loopy::StatusKind::oscillating:
        ++a.oscillating;
        break;
      case loopy::StatusKind::iteration_cap:
        ++a.capped;
        break;
    }
  }
  for (auto& a : out) {
    a.fraction_converged =
        a.rows == 0 ? 0.0 : static_cast<double>(a.converged) / static_cast<double>(a.rows);
    double sum = 0.0, mx = 0.0;
    std::size_t counted = 0;
    for (const auto& row : rows) {
      if (row.gamma != a.gamma || row.error.empty() == false) continue;
      if (row.status.kind != loopy::StatusKind::converged || !row.mean_l1) continue;
      sum += *row.mean_l1;
      mx = std::max(mx, *row.max_l1);
      ++counted;
    }
    if (counted > 0) {
      a.mean_l1_converged = sum / static_cast<double>(counted);
      a.max_l1_converged = mx;
    }
  }
  return out;
}

std::string StudyReport::to_csv() const {
  std::string out = csv_header();
  out += "\n";
  for (const auto& row : rows) {
    out += family_name(row.spec.family);
    out += ",";
    out += row.label;
    out += ",";
    out += std::to_string(row.spec.seed);
    out += ",";
    append_csv_real(out, row.gamma);
    out += "," + std::to_string(row.node_count);
    out += "," + std::to_string(row.edge_count);
    out += row.polytree ? ",1" : ",0";
    out += "," + (row.error.empty() ? status_name(row.status) : std::string("error"));
    out += "," + std::to_string(row.status.kind == loopy::StatusKind::oscillating
                                    ? row.status.period
                                    : 0);
    out += "," + std::to_string(row.iterations);
    out += ",";
    if (row.honest) out += *row.honest ? "1" : "0";
    out += row.oracle_refused ? ",1" : ",0";
    out += ",";
    if (row.mean_l1) append_csv_real(out, *row.mean_l1);
    out += ",";
    if (row.max_l1) append_csv_real(out, *row.max_l1);
    out += ",";
    if (row.pearl_max_abs) append_csv_real(out, *row.pearl_max_abs);
    out += ",";
    out += row.error;  // free text, never contains commas from our messages
    out += "\n";
  }
  return out;
}

std::string StudyReport::to_text() const {
  std::ostringstream os;
  os << "study: " << rows.size() << " runs\n";
  for (const auto& row : rows) {
    os << "  " << row.label << " gamma=" << row.gamma << ": ";
    if (!row.error.empty()) {
      os << "error: " << row.error << "\n";
      continue;
    }
    os << status_name(row.status);
    if (row.status.kind == loopy::StatusKind::oscillating) {
      os << "(period " << row.status.period << ")";
    }
    os << " in " << row.iterations << " iterations";
    if (row.polytree) os << ", polytree";
    if (row.oracle_refused) {
      os << ", oracle refused";
    } else if (row.max_l1) {
      os << ", L1 vs oracle mean=" << *row.mean_l1 << " max=" << *row.max_l1;
    }
    if (row.pearl_max_abs) os << ", pearl max|.|=" << *row.pearl_max_abs;
    os << "\n";
  }
  for (const auto& a : aggregates()) {
    os << "gamma=" << a.gamma << ": " << a.rows << " runs, " << a.converged
       << " converged (" << a.fraction_converged * 100.0 << "%), " << a.oscillating
       << " oscillating, " << a.capped << " capped, " << a.failed << " failed";
    if (a.mean_l1_converged) {
      os << "; L1 among converged mean=" << *a.mean_l1_converged
         << " max=" << *a.max_l1_converged;
    }
    os << "\n";
  }
  return os.str();
}

std::optional<OscillatorHit> find_period2_oscillator(std::uint64_t seed_begin,
                                                     std::uint64_t seed_end,
                                                     const loopy::LbpOptions& opts) {
  // Small loopy shapes, all <= 8 nodes so a hit stays enumerable for
  // cross-checks. Pyramids lead: the bipartite disease->finding layout
  // tends to cycle at period 4 (upward and downward messages alternate
  // between rounds), while mixed-depth pyramids produce genuine two-state
  // belief cycles.
  std::vector<GenSpec> shapes;
  {
    GenSpec pyr;
    pyr.family = Family::pyramid;
    pyr.widths = {1, 3, 4};
    shapes.push_back(pyr);
    pyr.widths = {2, 3, 3};
    shapes.push_back(pyr);
  }
  for (double scale : {0.02, 0.1, 1.0}) {
    GenSpec qmr;
    qmr.family = Family::toyqmr;
    qmr.diseases = 3;
    qmr.findings = 5;
    qmr.prior_scale = scale;
    shapes.push_back(qmr);
    qmr.diseases = 2;
    qmr.findings = 6;
    shapes.push_back(qmr);
  }

  loopy::LbpOptions run_opts = opts;
  run_opts.damping = 0.0;
  for (std::uint64_t seed = seed_begin; seed < seed_end; ++seed) {
    for (GenSpec spec : shapes) {
      spec.seed = seed;
      Network net = generate(spec);
      if (is_polytree(net)) continue;
      Evidence ev = study_evidence(net, spec, 3);
      try {
        loopy::LbpResult run = loopy::run_lbp(net, ev, run_opts);
        if (run.status.kind == loopy::StatusKind::oscillating && run.status.period == 2) {
          return OscillatorHit{spec, std::move(ev), std::move(run)};
        }
      } catch (const InconsistentEvidenceError&) {
        continue;  // conflicting evidence draw; not a candidate
      }
    }
  }
  return std::nullopt;
}

}  // namespace bpnet::gen
