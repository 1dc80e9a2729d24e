// bpnet: discrete belief-propagation toolkit.
//
// Subcommands: validate, infer, generate, bench, compare. Exit codes are a
// stable contract: 0 success, 2 validation/parse/usage failure, 3 impossible
// evidence, 4 oscillation, 5 iteration cap, 6 oracle refusal.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bpnet/errors.hpp"
#include "bpnet/generate.hpp"
#include "bpnet/loopy.hpp"
#include "bpnet/model.hpp"
#include "bpnet/netio.hpp"
#include "bpnet/oracle.hpp"
#include "bpnet/pearl.hpp"
#include "bpnet/semiring.hpp"
#include "bpnet/study.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitImpossibleEvidence = 3;
constexpr int kExitOscillating = 4;
constexpr int kExitIterationCap = 5;
constexpr int kExitOracleRefusal = 6;

struct ModeChoice {
  bpnet::Mode mode = bpnet::Mode::probabilistic;
  const bpnet::Semiring* semiring = &bpnet::Semiring::prob_sum_product();
};

ModeChoice parse_mode(const std::string& text) {
  if (text == "prob") return {bpnet::Mode::probabilistic, &bpnet::Semiring::prob_sum_product()};
  if (text == "poss-product") {
    return {bpnet::Mode::possibilistic, &bpnet::Semiring::poss_max_product()};
  }
  if (text == "poss-min") return {bpnet::Mode::possibilistic, &bpnet::Semiring::poss_max_min()};
  throw CLI::ValidationError("--mode must be prob, poss-product or poss-min");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Parse + validate + renormalize, printing any failure the way the exit-code
// contract wants it. Returns nullopt after printing (caller exits 2).
std::optional<bpnet::Network> load_network(const std::string& path, bpnet::Mode mode,
                                           bool print_report) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  bpnet::Network net;
  try {
    net = bpnet::io::parse_network(text);
  } catch (const bpnet::ParseError& e) {
    std::cerr << path << ":" << e.located_message() << "\n";
    return std::nullopt;
  }
  auto report = bpnet::validate_network(net, mode);
  for (const auto& issue : report.issues) {
    std::cerr << (issue.severity == bpnet::Severity::error ? "error: " : "warning: ")
              << issue.location << ": " << issue.message << "\n";
  }
  if (!report.ok) return std::nullopt;
  (void)print_report;
  bpnet::normalize_rows(net, mode);
  return net;
}

std::optional<bpnet::Evidence> load_evidence(const std::string& path,
                                             const bpnet::Network& net) {
  if (path.empty()) return bpnet::Evidence{};
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  try {
    return bpnet::io::parse_evidence(text, net);
  } catch (const bpnet::ParseError& e) {
    std::cerr << path << ":" << e.located_message() << "\n";
    return std::nullopt;
  }
}

std::string format_values(const std::vector<double>& values, int precision) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    std::snprintf(buf, sizeof(buf), "%.*f", precision, values[i]);
    out += buf;
  }
  return out;
}

std::vector<std::size_t> query_indices(const bpnet::Network& net, const bpnet::Evidence& ev,
                                       const std::vector<std::string>& requested) {
  std::vector<std::size_t> out;
  if (requested.empty()) {
    for (std::size_t i = 0; i < net.node_count(); ++i) {
      if (ev.observations.count(net.node(i).id) == 0) out.push_back(i);
    }
    return out;
  }
  for (const auto& id : requested) {
    out.push_back(net.index_of(id));  // throws on unknown
  }
  return out;
}

const char* status_text(const bpnet::loopy::Status& s) {
  switch (s.kind) {
    case bpnet::loopy::StatusKind::converged:
      return "converged";
    case bpnet::loopy::StatusKind::oscillating:
      return "oscillating";
    case bpnet::loopy::StatusKind::iteration_cap:
      return "iteration_cap";
  }
  return "?";
}

// --- subcommand payloads ----------------------------------------------------

struct CommonArgs {
  std::string network_path;
  std::string evidence_path;
  std::string mode_text = "prob";
  bpnet::loopy::LbpOptions lbp;
  int precision = 6;
};

int run_validate(const std::string& path, const std::string& mode_text) {
  ModeChoice mode = parse_mode(mode_text);
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  bpnet::Network net;
  try {
    net = bpnet::io::parse_network(text);
  } catch (const bpnet::ParseError& e) {
    std::cerr << path << ":" << e.located_message() << "\n";
    return kExitUsage;
  }
  auto report = bpnet::validate_network(net, mode.mode);
  for (const auto& issue : report.issues) {
    std::cout << (issue.severity == bpnet::Severity::error ? "error: " : "warning: ")
              << issue.location << ": " << issue.message << "\n";
  }
  if (!report.ok) return kExitUsage;
  std::cout << "ok, " << (bpnet::is_polytree(net) ? "polytree" : "loopy (not a polytree)")
            << "\n";
  return kExitOk;
}

int run_infer(const CommonArgs& args, const std::string& engine,
              const std::vector<std::string>& query) {
  ModeChoice mode = parse_mode(args.mode_text);
  if (engine == "pearl" && mode.mode != bpnet::Mode::probabilistic) {
    std::cerr << "error: engine=pearl supports --mode prob only (use exact or lbp)\n";
    return kExitUsage;
  }

  auto net = load_network(args.network_path, mode.mode, false);
  if (!net) return kExitUsage;
  auto ev = load_evidence(args.evidence_path, *net);
  if (!ev) return kExitUsage;

  std::vector<std::size_t> queried;
  try {
    queried = query_indices(*net, *ev, query);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  int exit_code = kExitOk;
  std::vector<bpnet::Distribution> beliefs;
  try {
    if (engine == "exact") {
      beliefs = bpnet::oracle::exact_all_posteriors(*net, *ev, *mode.semiring);
    } else if (engine == "pearl") {
      auto msgs = bpnet::pearl::propagate(*net, *ev);
      beliefs = bpnet::pearl::all_beliefs(msgs);
    } else if (engine == "lbp") {
      auto result = bpnet::loopy::semiring_message_pass(*net, *ev, *mode.semiring, args.lbp);
      beliefs = result.beliefs;
      for (std::size_t i : queried) {
        std::cout << net->node(i).id << ": "
                  << format_values(beliefs[i].values, args.precision) << "\n";
      }
      std::cout << "status: " << status_text(result.status);
      if (result.status.kind == bpnet::loopy::StatusKind::oscillating) {
        std::cout << " (period " << result.status.period << ")";
      }
      std::cout << "\niterations: " << result.iterations_run << "\n";
      switch (result.status.kind) {
        case bpnet::loopy::StatusKind::converged:
          return kExitOk;
        case bpnet::loopy::StatusKind::oscillating:
          return kExitOscillating;
        case bpnet::loopy::StatusKind::iteration_cap:
          return kExitIterationCap;
      }
      return kExitOk;
    } else {
      std::cerr << "error: unknown engine: " << engine << "\n";
      return kExitUsage;
    }
  } catch (const bpnet::EnumerationLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOracleRefusal;
  } catch (const bpnet::ImpossibleEvidenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitImpossibleEvidence;
  } catch (const bpnet::InconsistentEvidenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitImpossibleEvidence;
  } catch (const bpnet::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  for (std::size_t i : queried) {
    std::cout << net->node(i).id << ": " << format_values(beliefs[i].values, args.precision)
              << "\n";
  }
  return exit_code;
}

int run_compare(const CommonArgs& args, std::vector<std::string> engines) {
  ModeChoice mode = parse_mode(args.mode_text);
  auto net = load_network(args.network_path, mode.mode, false);
  if (!net) return kExitUsage;
  auto ev = load_evidence(args.evidence_path, *net);
  if (!ev) return kExitUsage;

  if (engines.empty()) {
    if (!mode.semiring->possibilistic() && bpnet::is_polytree(*net)) engines.push_back("pearl");
    engines.push_back("lbp");
  }

  bool oracle_refused = false;
  bool any_oscillating = false, any_capped = false;
  std::vector<bpnet::Distribution> exact;
  try {
    exact = bpnet::oracle::exact_all_posteriors(*net, *ev, *mode.semiring);
  } catch (const bpnet::EnumerationLimitError& e) {
    oracle_refused = true;
    std::cout << "oracle refused: " << e.what() << "\n";
  } catch (const bpnet::ImpossibleEvidenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitImpossibleEvidence;
  }

  struct EngineRun {
    std::string name;
    std::vector<bpnet::Distribution> beliefs;
    std::string annotation;
  };
  std::vector<EngineRun> runs;

  for (const auto& engine : engines) {
    EngineRun run;
    run.name = engine;
    try {
      if (engine == "pearl") {
        if (mode.semiring->possibilistic()) {
          std::cout << "pearl: skipped (probabilistic engine)\n";
          continue;
        }
        auto msgs = bpnet::pearl::propagate(*net, *ev);
        run.beliefs = bpnet::pearl::all_beliefs(msgs);
      } else if (engine == "lbp") {
        auto result = bpnet::loopy::semiring_message_pass(*net, *ev, *mode.semiring, args.lbp);
        run.beliefs = result.beliefs;
        if (result.status.kind == bpnet::loopy::StatusKind::oscillating) {
          any_oscillating = true;
          run.annotation = "no stable beliefs (oscillating, period " +
                           std::to_string(result.status.period) + "); diff vs final round";
        } else if (result.status.kind == bpnet::loopy::StatusKind::iteration_cap) {
          any_capped = true;
          run.annotation = "no stable beliefs (iteration cap); diff vs final round";
        }
      } else {
        std::cerr << "error: unknown engine: " << engine << "\n";
        return kExitUsage;
      }
    } catch (const bpnet::ImpossibleEvidenceError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitImpossibleEvidence;
    } catch (const bpnet::InconsistentEvidenceError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitImpossibleEvidence;
    } catch (const bpnet::StructuralError& e) {
      std::cout << engine << ": skipped (" << e.what() << ")\n";
      continue;
    }
    runs.push_back(std::move(run));
  }

  auto print_diff = [&](const std::string& label, const std::vector<bpnet::Distribution>& a,
                        const std::vector<bpnet::Distribution>& b) {
    double total_l1 = 0.0, worst = 0.0;
    std::cout << label << ":\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
      double l1 = 0.0, mx = 0.0;
      for (std::size_t s = 0; s < a[i].values.size(); ++s) {
        double d = std::abs(a[i].values[s] - b[i].values[s]);
        l1 += d;
        mx = std::max(mx, d);
      }
      total_l1 += l1;
      worst = std::max(worst, mx);
      std::cout << "  " << a[i].node << ": L1=" << l1 << " max=" << mx << "\n";
    }
    std::cout << "  overall: mean L1=" << total_l1 / static_cast<double>(a.size())
              << " max=" << worst << "\n";
  };

  for (const auto& run : runs) {
    if (!run.annotation.empty()) std::cout << run.name << ": " << run.annotation << "\n";
    if (!oracle_refused) print_diff(run.name + " vs exact", exact, run.beliefs);
  }
  if (oracle_refused) {
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        print_diff(runs[i].name + " vs " + runs[j].name, runs[i].beliefs, runs[j].beliefs);
      }
    }
  }

  if (oracle_refused) return kExitOracleRefusal;
  if (any_oscillating) return kExitOscillating;
  if (any_capped) return kExitIterationCap;
  return kExitOk;
}

struct GenArgs {
  std::string family = "random-polytree";
  std::size_t nodes = 8;
  std::vector<std::size_t> widths;
  std::size_t diseases = 3;
  std::size_t findings = 5;
  std::size_t cardinality = 2;
  std::uint64_t seed = 0;
  double prior_scale = 0.02;
  std::string mode_text = "prob";

  bpnet::gen::GenSpec to_spec() const {
    bpnet::gen::GenSpec spec;
    if (family == "random-polytree") {
      spec.family = bpnet::gen::Family::random_polytree;
    } else if (family == "pyramid") {
      spec.family = bpnet::gen::Family::pyramid;
    } else if (family == "toyqmr") {
      spec.family = bpnet::gen::Family::toyqmr;
    } else {
      throw CLI::ValidationError("--family must be random-polytree, pyramid or toyqmr");
    }
    spec.nodes = nodes;
    if (!widths.empty()) spec.widths = widths;
    spec.diseases = diseases;
    spec.findings = findings;
    spec.cardinality = cardinality;
    spec.seed = seed;
    spec.prior_scale = prior_scale;
    spec.mode = parse_mode(mode_text).mode;
    return spec;
  }
};

int run_generate(const GenArgs& args, const std::string& out_path) {
  bpnet::gen::GenSpec spec = args.to_spec();
  bpnet::Network net;
  try {
    net = bpnet::gen::generate(spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string text = bpnet::io::serialize_network(net);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitUsage;
    }
    out << text;
  }
  return kExitOk;
}

int run_bench(const GenArgs& args, std::size_t count, const std::vector<double>& gammas,
              const bpnet::loopy::LbpOptions& lbp, std::size_t observe, bool run_pearl,
              const std::string& csv_path, const std::string& text_path) {
  bpnet::gen::StudyOptions opts;
  opts.lbp = lbp;
  if (!gammas.empty()) opts.damping_grid = gammas;
  opts.observe = observe;
  opts.run_pearl = run_pearl;
  opts.semiring = parse_mode(args.mode_text).semiring->id;

  std::vector<bpnet::gen::GenSpec> specs;
  bpnet::gen::GenSpec base;
  try {
    base = args.to_spec();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  for (std::size_t k = 0; k < count; ++k) {
    bpnet::gen::GenSpec spec = base;
    spec.seed = base.seed + k;
    specs.push_back(spec);
  }

  bpnet::gen::StudyReport report = bpnet::gen::run_study(specs, opts);

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << csv_path << "\n";
      return kExitUsage;
    }
    out << report.to_csv();
  }
  std::string text = report.to_text();
  if (text_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(text_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << text_path << "\n";
      return kExitUsage;
    }
    out << text;
  }
  return kExitOk;
}

void add_lbp_options(CLI::App* cmd, bpnet::loopy::LbpOptions& lbp) {
  cmd->add_option("--threshold", lbp.threshold, "Belief-change convergence threshold");
  cmd->add_option("--max-iters", lbp.max_iterations, "Iteration cap");
  cmd->add_option("--damping", lbp.damping, "Momentum coefficient in [0,1)")
      ->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--history-depth", lbp.history_depth, "Belief snapshots kept (>= 2)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1024}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Bayesian-network belief propagation toolkit"};
  app.require_subcommand(1);

  // validate
  std::string v_path, v_mode = "prob";
  auto* validate = app.add_subcommand("validate", "Check a network file and report issues");
  validate->add_option("network", v_path, "Network file")->required();
  validate->add_option("--mode", v_mode, "prob | poss-product | poss-min");

  // infer
  CommonArgs i_args;
  std::string i_engine = "exact";
  std::vector<std::string> i_query;
  auto* infer = app.add_subcommand("infer", "Posterior marginals given evidence");
  infer->add_option("network", i_args.network_path, "Network file")->required();
  infer->add_option("-e,--evidence", i_args.evidence_path, "Evidence file");
  infer->add_option("-q,--query", i_query, "Query nodes (default: all unobserved)");
  infer->add_option("--engine", i_engine, "exact | pearl | lbp");
  infer->add_option("--mode", i_args.mode_text, "prob | poss-product | poss-min");
  infer->add_option("--precision", i_args.precision, "Digits after the decimal point")
      ->check(CLI::Range(0, 17));
  add_lbp_options(infer, i_args.lbp);

  // compare
  CommonArgs c_args;
  std::vector<std::string> c_engines;
  auto* compare = app.add_subcommand("compare", "Diff engine posteriors against the oracle");
  compare->add_option("network", c_args.network_path, "Network file")->required();
  compare->add_option("-e,--evidence", c_args.evidence_path, "Evidence file");
  compare->add_option("--engines", c_engines, "Engines to diff (pearl, lbp)")->delimiter(',');
  compare->add_option("--mode", c_args.mode_text, "prob | poss-product | poss-min");
  add_lbp_options(compare, c_args.lbp);

  // generate
  GenArgs g_args;
  std::string g_out;
  auto* generate = app.add_subcommand("generate", "Emit a synthetic network");
  generate->add_option("--family", g_args.family, "random-polytree | pyramid | toyqmr");
  generate->add_option("--nodes", g_args.nodes, "Node count (random-polytree)");
  generate->add_option("--widths", g_args.widths, "Layer widths (pyramid)")->delimiter(',');
  generate->add_option("--diseases", g_args.diseases, "Disease count (toyqmr)");
  generate->add_option("--findings", g_args.findings, "Finding count (toyqmr)");
  generate->add_option("--cardinality", g_args.cardinality, "Max state count per node");
  generate->add_option("--seed", g_args.seed, "Generator seed");
  generate->add_option("--prior-scale", g_args.prior_scale, "toyqmr present-prior scale");
  generate->add_option("--mode", g_args.mode_text, "prob | poss-product | poss-min");
  generate->add_option("-o,--output", g_out, "Output path (default: stdout)");

  // bench
  GenArgs b_args;
  std::size_t b_count = 20;
  std::vector<double> b_gammas;
  bpnet::loopy::LbpOptions b_lbp;
  std::size_t b_observe = 2;
  bool b_pearl = false;
  std::string b_csv, b_text;
  auto* bench = app.add_subcommand("bench", "Run a seeded convergence study");
  bench->add_option("--family", b_args.family, "random-polytree | pyramid | toyqmr");
  bench->add_option("--nodes", b_args.nodes, "Node count (random-polytree)");
  bench->add_option("--widths", b_args.widths, "Layer widths (pyramid)")->delimiter(',');
  bench->add_option("--diseases", b_args.diseases, "Disease count (toyqmr)");
  bench->add_option("--findings", b_args.findings, "Finding count (toyqmr)");
  bench->add_option("--cardinality", b_args.cardinality, "Max state count per node");
  bench->add_option("--seed-base", b_args.seed, "First seed");
  bench->add_option("--count", b_count, "Number of networks")->check(CLI::PositiveNumber);
  bench->add_option("--prior-scale", b_args.prior_scale, "toyqmr present-prior scale");
  bench->add_option("--mode", b_args.mode_text, "prob | poss-product | poss-min");
  bench->add_option("--gamma", b_gammas, "Damping grid (default: 0)")->delimiter(',');
  bench->add_option("--observe", b_observe, "Evidence nodes per network");
  bench->add_flag("--pearl", b_pearl, "Also diff the Pearl engine on polytrees");
  bench->add_option("--csv", b_csv, "CSV report path");
  bench->add_option("--text", b_text, "Text report path (default: stdout)");
  add_lbp_options(bench, b_lbp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return run_validate(v_path, v_mode);
    if (infer->parsed()) return run_infer(i_args, i_engine, i_query);
    if (compare->parsed()) return run_compare(c_args, c_engines);
    if (generate->parsed()) return run_generate(g_args, g_out);
    if (bench->parsed()) {
      return run_bench(b_args, b_count, b_gammas, b_lbp, b_observe, b_pearl, b_csv, b_text);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
